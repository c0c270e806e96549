"""Command dispatch and deterministic JSON reports."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field as dc_field

from gmpy2 import mpq

from . import __version__
from . import catalog as cat
from . import laplace as lap
from .config import CurveConfig, dump_scalar, load_scalar, parse_curve_config
from .curve import INF, check_admissibility
from .functions import ExpSum, Func
from .quantum import verify_quantum_curve
from .recursion import CorrelatorStore, correlator_expansion, gw_invariants, omega01_expansion
from .scalars import FloatField, format_rational
from .series import HbarSeries
from .wavefunction import build_wavefunction

COMMANDS = ("correlators", "wavefunction", "laplace", "verify-qc", "check-duality", "catalog")

EXIT_OK, EXIT_FAILED, EXIT_PRECONDITION = 0, 1, 2


@dataclass
class RunReport:
    command: str
    provenance: dict
    result: dict
    verified: bool = True
    timings: dict = dc_field(default_factory=dict)

    def to_dict(self, timings: bool = False) -> dict:
        d = {"command": self.command, "provenance": self.provenance, "result": self.result,
             "status": "ok" if self.verified else "verification-failed"}
        if timings:
            d["timings"] = {k: round(v, 3) for k, v in self.timings.items()}
        return d

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @property
    def exit_code(self):
        return EXIT_OK if self.verified else EXIT_FAILED


class Renderer:
    """Scalar and function rendering: exact strings, or {re, im} at precision P in float mode."""

    def __init__(self, cfg: CurveConfig, field):
        self.field = field
        self.float = FloatField(cfg.precision, cfg.tolerance) if cfg.mode == "float" else None

    def scalar(self, v):
        if v is INF or v == INF:
            return "inf"
        if self.float is None:
            return dump_scalar(v)
        F = self.float
        w = F(v)
        if F.is_zero(w):
            w = F(0)
        return F.to_json(w)

    def half(self, e2: int) -> str:
        return format_rational(mpq(e2, 2))

    def func(self, f):
        """A Func as a sympy string in z; bare scalars go through scalar()."""
        import sympy as sp
        z = sp.Symbol("z")
        if isinstance(f, ExpSum):
            expr = sum((c.to_sympy(self.field, z) * sp.exp(E.to_sympy(self.field, z)) for E, c in f.terms.items()),
                       sp.Integer(0))
        elif isinstance(f, Func):
            expr = f.to_sympy(self.field, z)
        else:
            return self.scalar(f)
        if self.float is not None:
            dps = max(15, int(self.float.precision * 0.30103))
            expr = sp.N(expr, dps)
            tol = sp.Float(str(self.float.tol), dps)
            expr = expr.xreplace({a: sp.Integer(0) for a in expr.atoms(sp.Float) if abs(a) <= tol})
        return sp.sstr(expr)

    def series(self, s: HbarSeries) -> dict:
        return {"coefficients": {self.half(k): self.func(v) for k, v in sorted(s.items())},
                "truncation": self.half(s.prec - 1) if s.prec is not None else None}


def _provenance(cfg: CurveConfig) -> dict:
    return {"curve": cfg.curve, "curve_hash": cfg.curve_hash(), "order": cfg.order,
            "mode": cfg.mode, "precision": cfg.precision, "tolerance": cfg.tolerance,
            "field": cfg.field, "basepoint": cfg.basepoint, "engine_version": __version__}


def _chis(N):
    for chi in range(1, N + 1):
        for g in range(0, chi // 2 + 2):
            n = chi + 2 - 2 * g
            if n >= 1:
                yield g, n


# -- commands --------------------------------------------------------------

def cmd_correlators(cfg, curve, R, T):
    store = CorrelatorStore(curve)
    allowed = set(store.R) | set(store.L)
    out, ok = [], True
    for g, n in _chis(cfg.order):
        t = time.perf_counter()
        w = store.get(g, n)
        T[f"omega_{g}_{n}"] = time.perf_counter() - t
        checks = {"symmetric": w.is_symmetric(), "residue_free": w.residues_vanish(),
                  "poles_in_R_and_L": w.poles() <= allowed}
        ok = ok and all(checks.values())
        entry = {"g": g, "n": n, "checks": checks,
                 "terms": [{"slots": [[R.scalar(p), k] for p, k in key], "coeff": R.scalar(c)}
                           for key, c in w.sorted_items()]}
        K = cfg.options.get("gw_expansion")
        if K is not None:
            table = correlator_expansion(w, curve, order=K)
            entry["expansion"] = [{"a": list(a), "coeff": R.scalar(c)} for a, c in table.items()]
            entry["descendants"] = [{"a": list(a), "value": R.scalar(c)}
                                    for a, c in gw_invariants(table, n).items()]
        out.append(entry)
    res = {"ramification_points": [R.scalar(a) for a in store.R],
           "log_points": [{"point": R.scalar(a), "residue": R.scalar(r)} for a, r in store.L.items()],
           "correlators": out, "invariants_hold": ok,
           "convention": "coefficients of prod dz_i/(z_i - p_i)^k_i; omega_{0,1} = -y dx"}
    K = cfg.options.get("gw_expansion")
    if K is not None:
        res["omega_0_1_expansion"] = {str(a): R.scalar(c) for a, c in omega01_expansion(curve, INF, K).items()}
    return res, ok


def _wkb_dict(R, psi):
    S = {str(m): R.func(v) for m, v in sorted(psi.S.items())}
    return {"x": R.func(psi.x), "Y": R.func(psi.Y),
            "S_minus_1": R.func(psi.S_minus1) if psi.S_minus1 is not None else None,
            "S": S, "truncation": psi.order, "basepoint": R.scalar(psi.basepoint),
            "marker": dict(sorted(psi.marker.items()))}


def cmd_wavefunction(cfg, curve, R, T):
    t = time.perf_counter()
    psi = build_wavefunction(CorrelatorStore(curve), curve.basepoint, cfg.order)
    T["wavefunction"] = time.perf_counter() - t
    return _wkb_dict(R, psi), True


def cmd_laplace(cfg, curve, R, T):
    coord = cfg.options.get("coordinate", "additive")
    t = time.perf_counter()
    psi = build_wavefunction(CorrelatorStore(curve), curve.basepoint, cfg.order)
    T["wavefunction"] = time.perf_counter() - t
    t = time.perf_counter()
    out = lap.laplace_transform(psi, cfg.order, coord)
    T["laplace"] = time.perf_counter() - t
    res = _wkb_dict(R, lap.absorb_prefactor(out))
    res["coordinate"] = coord
    return res, True


def cmd_verify_qc(cfg, curve, R, T):
    op = cfg.operator()
    if op is None:
        raise cat.CatalogError("no quantum-curve recipe configured")
    N = cfg.order
    t = time.perf_counter()
    psi = build_wavefunction(CorrelatorStore(curve), curve.basepoint, max(N - 1, 0))
    T["wavefunction"] = time.perf_counter() - t
    t = time.perf_counter()
    rep = verify_quantum_curve(op, psi, N)
    T["apply"] = time.perf_counter() - t
    res = {"operator": {"label": op.label, "terms": op.describe()}, "recipe": cfg.recipe,
           "kills": rep.kills, "order": N,
           "first_nonzero_order": None if rep.first_nonzero_order is None else format_rational(rep.first_nonzero_order),
           "residual": None if rep.residual is None else R.func(rep.residual),
           "ratio": R.series(rep.ratio),
           "convention": "ratio is (A psi)/psi as a series in hbar"}
    return res, rep.kills


def _cmp(R, c: lap.Comparison):
    return {"equal": c.equal, "order": c.order,
            "constant": None if c.constant is None else R.func(c.constant),
            "mismatch": [str(m) for m in c.mismatch]}


def cmd_check_duality(cfg, curve, R, T):
    kind = cfg.options.get("duality", "laplace")
    N = cfg.order
    res, ok = {"duality": kind}, True
    store = CorrelatorStore(curve)
    dual = curve.dual()
    dstore = CorrelatorStore(dual)
    if kind in ("laplace", "both"):
        coord = cfg.options.get("coordinate", "additive")
        t = time.perf_counter()
        psi = build_wavefunction(store, curve.basepoint, N)
        psid = build_wavefunction(dstore, dual.basepoint, N)
        T["wavefunctions"] = time.perf_counter() - t
        t = time.perf_counter()
        fwd = lap.compare_up_to_constant(lap.laplace_transform(psi, N, coord), psid, N)
        T["laplace"] = time.perf_counter() - t
        t = time.perf_counter()
        inv = lap.compare_up_to_constant(lap.inverse_laplace(psid, N, coord), psi, N)
        T["inverse_laplace"] = time.perf_counter() - t
        res["laplace"] = {"coordinate": coord, "forward": _cmp(R, fwd), "inverse": _cmp(R, inv)}
        ok = ok and fwd.equal and inv.equal
    if kind in ("ba", "both"):
        pts = cfg.options.get("ba_points", ["2", "3"])
        z1, z2 = (load_scalar(p, "$.options.ba_points") for p in pts)
        t = time.perf_counter()
        sw = lap.ba_swap_check(store, dstore, z1, z2, max(N, 1))
        T["ba_kernel"] = time.perf_counter() - t
        res["ba_kernel"] = {"points": [R.scalar(z1), R.scalar(z2)], "equal": sw.equal, "order": sw.order,
                            "lhs": R.series(sw.lhs), "rhs": R.series(sw.rhs),
                            "difference": R.series(sw.difference),
                            "constant_squared": R.scalar(sw.constant_squared)}
        ok = ok and sw.equal
    return res, ok


def cmd_catalog(cfg, curve, R, T):
    entries = []
    for name in sorted(cat.CATALOG):
        e = cat.CATALOG[name]
        c = parse_curve_config(name)
        sc = c.build_curve()
        entries.append({"name": name, "description": e.description, "notes": e.notes,
                        "params": c.params, "x": c.x, "y": c.y, "basepoint": c.basepoint,
                        "field": c.field, "recipe": c.recipe, "options": c.options,
                        "admissibility": _adm(check_admissibility(sc, dual=True), R)})
    return {"entries": entries}, True


def _adm(rep, R):
    def clean(r):
        return {"admissible": r["admissible"], "violations": list(r["violations"]),
                "zeros": [{k: (R.scalar(v) if k == "point" else v) for k, v in sorted(z.items())}
                          for z in r.get("zeros", [])]}
    return {"admissible": rep["admissible"], "curve": clean(rep["curve"]), "dual": clean(rep["dual"])}


_DISPATCH = {"correlators": cmd_correlators, "wavefunction": cmd_wavefunction, "laplace": cmd_laplace,
             "verify-qc": cmd_verify_qc, "check-duality": cmd_check_duality, "catalog": cmd_catalog}


def run_command(cmd: str, cfg: CurveConfig | None) -> RunReport:
    if cmd not in _DISPATCH:
        raise ValueError(f"unknown command {cmd!r}; known: {', '.join(COMMANDS)}")
    if cfg is None:
        if cmd != "catalog":
            raise ValueError(f"command {cmd!r} needs a curve")
        cfg = parse_curve_config("airy")
    T = {}
    t = time.perf_counter()
    curve = cfg.build_curve() if cmd != "catalog" else None
    R = Renderer(cfg, curve.field if curve is not None else cfg.exact_field())
    result, ok = _DISPATCH[cmd](cfg, curve, R, T)
    T["total"] = time.perf_counter() - t
    prov = _provenance(cfg) if cmd != "catalog" else {"engine_version": __version__, "mode": cfg.mode}
    if cmd != "catalog":
        result = {"config": cfg.to_dict(), **result}
    return RunReport(cmd, prov, result, ok, T)
