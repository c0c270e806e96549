"""Built-in spectral curves with their quantum-curve recipes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from gmpy2 import mpq

from . import poly
from . import quantum as qm
from .curve import INF, CurveError, LogRationalFunction, SpectralCurve
from .functions import PI2I, Func, RationalFunction
from .scalars import ExactField, FieldExtensionError, parse_rational


class CatalogError(CurveError):
    pass


@dataclass
class CatalogEntry:
    name: str
    description: str
    defaults: dict
    build: Callable          # params -> (x, y, basepoint)
    recipe: Callable | None  # params -> recipe spec dict
    notes: str = ""
    options: dict = field(default_factory=dict)


Z = RationalFunction.z()


def _q(v):
    return v if isinstance(v, type(mpq(0))) else parse_rational(str(v))


def _poly_rf(coeffs):
    return RationalFunction(tuple(_q(c) for c in coeffs))


def _laurent(terms: dict) -> RationalFunction:
    """sum_l c_l z^l for integer l."""
    out = RationalFunction(())
    for l, c in terms.items():
        c = _q(c)
        if c == 0:
            continue
        l = int(l)
        out = out + (RationalFunction.pole(mpq(0), -l, c) if l < 0 else RationalFunction((mpq(0),) * l + (c,)))
    return out


def _log_z():
    return LogRationalFunction(RationalFunction(()), {mpq(0): mpq(1)})


# -- builders --------------------------------------------------------------

def _airy(p):
    return LogRationalFunction(Z * Z), LogRationalFunction(Z), INF


def _rational(p):
    P1, P2 = [_q(c) for c in p["P1"]], [_q(c) for c in p["P2"]]
    if not poly.trim(tuple(P2)):
        raise CatalogError("P2 must be nonzero")
    x = RationalFunction.from_num_den(ExactField(), tuple(P1), tuple(P2))
    return LogRationalFunction(x), LogRationalFunction(Z), INF


def _gw_p1(p):
    return LogRationalFunction(Z + RationalFunction.pole(mpq(0), 1)), _log_z(), INF


def _gw_pab(p):
    a, b = int(p["a"]), int(p["b"])
    q = {int(l): _q(v) for l, v in p["q"].items()}
    w = {int(l): _q(v) for l, v in p.get("w", {}).items() if _q(v) != 0}
    if q.get(a, 0) == 0 or q.get(-b, 0) == 0:
        raise CatalogError("q_a and q_-b must be nonzero")
    if q[a] != 1:
        raise CatalogError("normalize q_a = 1 (rescale z)")
    if q.get(0, 0) != 0 or w.get(0, 0) != 0:
        raise CatalogError("normalize q_0 = w_0 = 0 (shift x)")
    if any(l > a or l < -b for l in q if q[l] != 0):
        raise CatalogError("q_l is only allowed for -b <= l <= a")
    for l in w:
        if q.get(l, 0) == 0:
            raise CatalogError(f"w_{l} is nonzero while q_{l} = 0")
    rat = _laurent(q)
    logz = sum((w[l] * l for l in w), mpq(0))
    const = Func()
    for l, v in w.items():
        const = const + Func.log_const(q[l], v)
    x = LogRationalFunction(rat, {mpq(0): logz} if logz else {}, const)
    return x, _log_z(), INF


def _gw_pab_recipe(p):
    return {"family": "gw", "q": p["q"], "w": p.get("w", {}), "C": p.get("C", {})}


def _framed_polys(f):
    # e^x = z^f (1 - z)
    one_minus_z = (mpq(1), mpq(-1))
    if f >= 0:
        return poly.mul((mpq(0),) * f + (mpq(1),), one_minus_z), (mpq(1),)
    return one_minus_z, (mpq(0),) * (-f) + (mpq(1),)


def _framed(p):
    f = int(p["f"])
    logs = {mpq(1): mpq(1)}
    if f:
        logs[mpq(0)] = mpq(f)
    # log(1 - z) = log(z - 1) + pi i
    x = LogRationalFunction(RationalFunction(()), logs, Func.atom(PI2I, mpq(1, 2)))
    return x, _log_z(), INF


def _framed_recipe(p):
    P1, P2 = _framed_polys(int(p["f"]))
    return {"family": "exponential", "P1": P1, "P2": P2}


def _torus_data(p):
    Q, P, c = int(p["Q"]), int(p["P"]), _q(p["c"])
    if c in (0, 1):
        raise CatalogError("c must differ from 0 and 1")
    if P == 0:
        raise CatalogError("P must be nonzero")
    if abs(Q) > 1:
        raise CatalogError("|Q| <= 1 is required for the quantization theorem")
    return Q, P, c


def _torus(p):
    Q, P, c = _torus_data(p)
    logs = {mpq(0): mpq(P)}
    if Q:
        logs[mpq(1)] = mpq(Q)
        logs[c * c] = mpq(-Q)
    const = Func.log_const(c, mpq(Q - P)) if Q != P else Func()
    return LogRationalFunction(RationalFunction(()), logs, const), _log_z(), INF


def _torus_recipe(p):
    Q, P, c = _torus_data(p)
    # e^x = c^(Q-P) z^P (z - 1)^Q (z - c^2)^(-Q)
    num, den = (c ** (Q - P),), (mpq(1),)
    mono = (mpq(0),) * abs(P) + (mpq(1),)
    if P > 0:
        num = poly.mul(num, mono)
    else:
        den = poly.mul(den, mono)
    for root, e in ((mpq(1), Q), (c * c, -Q)):
        if e > 0:
            num = poly.mul(num, poly.linear(root))
        elif e < 0:
            den = poly.mul(den, poly.linear(root))
    return {"family": "exponential", "P1": num, "P2": den}


def _hurwitz(p):
    phi = tuple(_q(c) for c in p["phi"])
    return LogRationalFunction(-_poly_rf(phi), {mpq(0): mpq(1)}), LogRationalFunction(Z), INF


def _hurwitz_recipe(p):
    return {"family": "hurwitz", "phi": p["phi"]}


def _twoside(p):
    return LogRationalFunction(Z * Z), LogRationalFunction(Z + Z * Z * Z), INF


CATALOG = {
    "airy": CatalogEntry("airy", "x = z^2, y = z", {}, _airy,
                         lambda p: {"family": "rational", "P1": [0, 0, 1], "P2": [1]}),
    "rational": CatalogEntry("rational", "x = P1(z)/P2(z), y = z", {"P1": ["0", "0", "1"], "P2": ["1"]},
                             _rational, lambda p: {"family": "rational", "P1": p["P1"], "P2": p["P2"]}),
    "gw-p1": CatalogEntry("gw-p1", "x = z + 1/z, y = log z", {}, _gw_p1,
                          lambda p: {"family": "gw", "q": {1: 1, -1: 1}},
                          "basepoint z = infinity: the branch where x -> infinity with y ~ log x"),
    "gw-pab": CatalogEntry("gw-pab", "x = sum_l [q_l z^l + w_l log(q_l z^l)], y = log z",
                           {"a": 2, "b": 1, "q": {"2": "1", "1": "7", "-1": "9"}, "w": {}, "C": {}},
                           _gw_pab, _gw_pab_recipe),
    "framed-c3": CatalogEntry("framed-c3", "x = f log z + log(1 - z), y = log z", {"f": 1},
                              _framed, _framed_recipe),
    "torus-QP": CatalogEntry("torus-QP", "x = P log z + Q log(z - 1) - Q log(z - c^2) + (Q - P) log c, y = log z",
                             {"Q": 1, "P": 2, "c": "2"}, _torus, _torus_recipe),
    "hurwitz-phi": CatalogEntry("hurwitz-phi", "x = log z - phi(z), y = z (phi polynomial)", {"phi": ["0", "1"]},
                                _hurwitz, _hurwitz_recipe),
    "twoside-test": CatalogEntry("twoside-test", "x = z^2, y = z + z^3", {}, _twoside, None,
                                 options={"duality": "ba", "ba_points": ["2", "3"]}),
}


def auto_field(x: LogRationalFunction, y: LogRationalFunction):
    """Smallest field (Q or a quadratic extension) holding the ramification points of both directions."""
    needed = set()
    for f in (x, y):
        d = f.derivative()
        try:
            ExactField().roots(d.num)
        except FieldExtensionError as e:
            if not e.discriminants:
                raise
            needed.update(e.discriminants)
    if len(needed) > 1:
        raise FieldExtensionError("ramification points need more than one quadratic extension; use float mode",
                                  tuple(sorted(needed)))
    return ExactField(needed.pop()) if needed else ExactField()


def build_curve(name: str, params: dict | None = None, basepoint=None, field=None) -> SpectralCurve:
    entry = CATALOG.get(name)
    if entry is None:
        raise CatalogError(f"unknown catalog curve {name!r}; known: {', '.join(sorted(CATALOG))}")
    p = dict(entry.defaults)
    p.update(params or {})
    x, y, b = entry.build(p)
    if field is None:
        field = auto_field(x, y)
    return SpectralCurve(x, y, b if basepoint is None else basepoint, field, name=name)


def recipe_spec(name: str, params: dict | None = None) -> dict | None:
    entry = CATALOG[name]
    if entry.recipe is None:
        return None
    p = dict(entry.defaults)
    p.update(params or {})
    return entry.recipe(p)


RECIPE_FAMILIES = ("rational", "exponential", "mixed", "gw", "hurwitz")


def make_operator(spec: dict):
    """QuantumOperator from a recipe spec {"family": ..., parameters}."""
    fam = spec.get("family")
    if fam in ("rational", "exponential", "mixed"):
        P1 = [_q(c) for c in spec["P1"]]
        P2 = [_q(c) for c in spec["P2"]]
        return {"rational": qm.quantize_rational, "exponential": qm.quantize_exponential,
                "mixed": qm.quantize_mixed}[fam](P1, P2)
    if fam == "gw":
        q = {int(l): _q(v) for l, v in spec["q"].items()}
        w = {int(l): _q(v) for l, v in spec.get("w", {}).items()}
        C = {int(l): int(n) for l, n in spec.get("C", {}).items()}
        return qm.quantize_gw(q, w, C)
    if fam == "hurwitz":
        return qm.quantize_hurwitz([_q(c) for c in spec["phi"]])
    raise CatalogError(f"unknown recipe family {fam!r}")


def recipe(name: str, params: dict | None = None):
    spec = recipe_spec(name, params)
    if spec is None:
        raise CatalogError(f"catalog curve {name!r} has no quantum-curve recipe")
    return make_operator(spec)
