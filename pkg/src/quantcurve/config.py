"""Curve configuration documents: parsing, validation and canonical serialization.

Scalars are JSON strings "p/q"; quadratic numbers are {"a", "b", "sqrt"};
numbers with an i-part are {"re", "im"}.  A function spec is

    {"num": [...], "den": [...], "logs": [[gamma, a], ...],
     "const_logs": [[v, c], ...], "two_pi_i": k, "const": c}

meaning num(z)/den(z) + sum gamma log(z - a) + sum c log v + k 2 pi i + c.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field as dc_field

from gmpy2 import mpq

from . import catalog as cat
from .curve import INF, LogRationalFunction, SpectralCurve
from .functions import PI2I, Func, RationalFunction
from .scalars import (ExactField, FieldError, FloatField, QuadraticNumber, format_rational,
                      parse_rational, sort_key)

MODES = ("exact", "float")
COORDINATES = ("additive", "multiplicative")
DUALITY = ("laplace", "ba", "both")
DEFAULT_ORDER = 4


class ConfigError(ValueError):
    """Parse or validation failure; ``location`` is a JSON path."""

    def __init__(self, location: str, msg: str):
        super().__init__(f"{location}: {msg}")
        self.location = location


# -- scalars ---------------------------------------------------------------

def dump_scalar(v):
    if isinstance(v, QuadraticNumber):
        if v.d == -1:
            return {"re": format_rational(v.a), "im": format_rational(v.b)}
        return {"a": format_rational(v.a), "b": format_rational(v.b), "sqrt": int(v.d)}
    return format_rational(v)


def load_scalar(v, loc: str):
    try:
        if isinstance(v, dict):
            if set(v) <= {"re", "im"}:
                a, b, d = v.get("re", "0"), v.get("im", "0"), -1
            elif set(v) <= {"a", "b", "sqrt"} and "sqrt" in v:
                a, b, d = v.get("a", "0"), v.get("b", "0"), v["sqrt"]
                if isinstance(d, bool) or not isinstance(d, int):
                    raise FieldError(f"sqrt must be an integer, got {d!r}")
            else:
                raise ConfigError(loc, f"unknown scalar keys {sorted(v)}")
            return QuadraticNumber.make(parse_rational(a), parse_rational(b), d)
        return parse_rational(v)
    except FieldError as e:
        raise ConfigError(loc, str(e)) from None


def _ext_of(v):
    return v.d if isinstance(v, QuadraticNumber) else None


# -- function specs --------------------------------------------------------

_FUNC_KEYS = {"num", "den", "logs", "const_logs", "two_pi_i", "const"}


def _coeff_list(v, loc):
    if not isinstance(v, list):
        raise ConfigError(loc, "expected a coefficient list")
    return [load_scalar(c, f"{loc}[{i}]") for i, c in enumerate(v)]


def _pairs(v, loc):
    if not isinstance(v, list):
        raise ConfigError(loc, "expected a list of pairs")
    out = []
    for i, pr in enumerate(v):
        if not isinstance(pr, list) or len(pr) != 2:
            raise ConfigError(f"{loc}[{i}]", "expected a pair")
        out.append((load_scalar(pr[0], f"{loc}[{i}][0]"), load_scalar(pr[1], f"{loc}[{i}][1]")))
    return out


def load_function(spec, loc: str, field) -> LogRationalFunction:
    if not isinstance(spec, dict):
        raise ConfigError(loc, "expected a function object")
    extra = set(spec) - _FUNC_KEYS
    if extra:
        raise ConfigError(loc, f"unknown field {sorted(extra)[0]!r}")
    num = _coeff_list(spec.get("num", []), f"{loc}.num")
    den = _coeff_list(spec.get("den", ["1"]), f"{loc}.den")
    if not any(c != 0 for c in den):
        raise ConfigError(f"{loc}.den", "denominator is zero")
    rat = RationalFunction.from_num_den(field, tuple(num), tuple(den))
    logs = {}
    for gamma, a in _pairs(spec.get("logs", []), f"{loc}.logs"):
        logs[a] = logs.get(a, 0) + gamma
    const = Func()
    for v, c in _pairs(spec.get("const_logs", []), f"{loc}.const_logs"):
        if v == 0:
            raise ConfigError(f"{loc}.const_logs", "log of zero")
        const = const + Func.log_const(v, c)
    k = load_scalar(spec.get("two_pi_i", "0"), f"{loc}.two_pi_i")
    if k != 0:
        const = const + Func.atom(PI2I, k)
    c0 = load_scalar(spec.get("const", "0"), f"{loc}.const")
    if c0 != 0:
        const = const + Func.const(c0)
    return LogRationalFunction(rat, logs, const)


def dump_function(f: LogRationalFunction) -> dict:
    r = f.rational
    num, den = list(r.num), list(r.den_poly()) if r.den else [mpq(1)]
    out = {"num": [dump_scalar(c) for c in num]}
    if den != [mpq(1)]:
        out["den"] = [dump_scalar(c) for c in den]
    if f.logs:
        out["logs"] = [[dump_scalar(g), dump_scalar(a)] for a, g in sorted(f.logs.items(), key=lambda ag: sort_key(ag[0]))]
    const_logs, k, c0 = [], mpq(0), mpq(0)
    for m, c in f.const.terms.items():
        cv = c.const_value()
        if m == ():
            c0 = cv
            continue
        (atom, power), = m
        if power != 1:
            raise ConfigError("$", "constant part is not linear in logs")
        if atom == PI2I:
            k = cv
        elif atom[0] == "logp":
            const_logs.append((mpq(atom[1]), cv))
        elif atom[0] == "logq":
            const_logs.append((atom[1], cv))
        else:
            raise ConfigError("$", f"unexpected atom {atom!r} in constant part")
    if const_logs:
        const_logs.sort(key=lambda vc: sort_key(vc[0]))
        out["const_logs"] = [[dump_scalar(v), dump_scalar(c)] for v, c in const_logs]
    if k != 0:
        out["two_pi_i"] = dump_scalar(k)
    if c0 != 0:
        out["const"] = dump_scalar(c0)
    return out


# -- catalog parameters ----------------------------------------------------

_PARAM_KIND = {"a": "int", "b": "int", "f": "int", "Q": "int", "P": "int", "c": "rat",
               "q": "ratmap", "w": "ratmap", "C": "intmap", "phi": "ratlist",
               "P1": "ratlist", "P2": "ratlist"}


def _int(v, loc):
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, str):
            try:
                return int(v)
            except ValueError:
                pass
        raise ConfigError(loc, f"expected an integer, got {v!r}")
    return v


def _canon_param(kind, v, loc):
    if kind == "int":
        return _int(v, loc)
    if kind == "rat":
        return dump_scalar(load_scalar(v, loc))
    if kind == "ratlist":
        return [dump_scalar(c) for c in _coeff_list(v, loc)]
    if not isinstance(v, dict):
        raise ConfigError(loc, "expected a map from integer l to a value")
    out = {}
    for l, c in v.items():
        li = _int(l, f"{loc}.{l}")
        val = _int(c, f"{loc}.{l}") if kind == "intmap" else dump_scalar(load_scalar(c, f"{loc}.{l}"))
        if val not in (0, "0"):
            out[str(li)] = val
    return dict(sorted(out.items(), key=lambda kv: int(kv[0])))


def _canon_params(names, params, loc):
    if not isinstance(params, dict):
        raise ConfigError(loc, "expected an object")
    out = {}
    for k, v in params.items():
        if k not in names:
            raise ConfigError(f"{loc}.{k}", "unknown field")
        out[k] = _canon_param(_PARAM_KIND[k], v, f"{loc}.{k}")
    return dict(sorted(out.items()))


_RECIPE_KEYS = {
    "rational": ("P1", "P2"), "exponential": ("P1", "P2"), "mixed": ("P1", "P2"),
    "gw": ("q", "w", "C"), "hurwitz": ("phi",),
}


def canon_recipe(spec, loc="$.recipe"):
    if spec is None:
        return None
    if not isinstance(spec, dict):
        raise ConfigError(loc, "expected an object")
    fam = spec.get("family")
    if fam not in _RECIPE_KEYS:
        raise ConfigError(f"{loc}.family", f"unknown recipe family {fam!r}; known: {', '.join(_RECIPE_KEYS)}")
    allowed = set(_RECIPE_KEYS[fam]) | {"family", "hbar_shift"}
    for k in spec:
        if k not in allowed:
            raise ConfigError(f"{loc}.{k}", "unknown field")
    out = {"family": fam}
    for k in _RECIPE_KEYS[fam]:
        if k in spec:
            out[k] = _canon_param(_PARAM_KIND[k], spec[k], f"{loc}.{k}")
        elif k in ("w", "C"):
            continue
        else:
            raise ConfigError(f"{loc}.{k}", "missing field")
    if "hbar_shift" in spec:
        s = load_scalar(spec["hbar_shift"], f"{loc}.hbar_shift")
        if s != 0:
            out["hbar_shift"] = dump_scalar(s)
    return out


# -- the config ------------------------------------------------------------

_TOP_KEYS = {"curve", "params", "x", "y", "basepoint", "field", "mode", "precision",
             "tolerance", "order", "recipe", "options"}
_OPTION_KEYS = {"coordinate", "duality", "ba_points", "gw_expansion"}


@dataclass
class CurveConfig:
    curve: str = "custom"
    params: dict = dc_field(default_factory=dict)
    x: dict = dc_field(default_factory=dict)
    y: dict = dc_field(default_factory=dict)
    basepoint: object = "inf"
    field: int | None = None            # quadratic extension sqrt(field), None for Q
    mode: str = "exact"
    precision: int | None = None
    tolerance: str | None = None
    order: int = DEFAULT_ORDER
    recipe: dict | None = None
    options: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "curve": self.curve, "params": copy.deepcopy(self.params),
            "x": copy.deepcopy(self.x), "y": copy.deepcopy(self.y),
            "basepoint": copy.deepcopy(self.basepoint), "field": self.field,
            "mode": self.mode, "precision": self.precision, "tolerance": self.tolerance,
            "order": self.order, "recipe": copy.deepcopy(self.recipe),
            "options": copy.deepcopy(self.options),
        }

    def exact_field(self):
        return ExactField(self.field) if self.field is not None else ExactField()

    def float_field(self):
        if self.mode != "float":
            return None
        return FloatField(self.precision, self.tolerance)

    def build_curve(self) -> SpectralCurve:
        F = self.exact_field()
        x = load_function(self.x, "$.x", F)
        y = load_function(self.y, "$.y", F)
        b = INF if self.basepoint == "inf" else load_scalar(self.basepoint, "$.basepoint")
        return SpectralCurve(x, y, b, F, name=self.curve)

    def operator(self):
        if self.recipe is None:
            return None
        from .operators import QuantumOperator
        op = cat.make_operator(self.recipe)
        if "hbar_shift" in self.recipe:
            label = op.label
            op = op + QuantumOperator.hbar(parse_rational(self.recipe["hbar_shift"]))
            op.label = label + "+shift"
        return op

    def curve_hash(self) -> str:
        """sha256 of the canonical curve data (functions, basepoint, field)."""
        doc = {"x": self.x, "y": self.y, "basepoint": self.basepoint, "field": self.field}
        return hashlib.sha256(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def serialize_config(cfg: CurveConfig) -> str:
    return json.dumps(cfg.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _options(opts, loc="$.options"):
    if not isinstance(opts, dict):
        raise ConfigError(loc, "expected an object")
    out = {}
    for k, v in opts.items():
        if k not in _OPTION_KEYS:
            raise ConfigError(f"{loc}.{k}", "unknown field")
        if k == "coordinate":
            if v not in COORDINATES:
                raise ConfigError(f"{loc}.coordinate", f"expected one of {COORDINATES}")
            out[k] = v
        elif k == "gw_expansion":
            n = _int(v, f"{loc}.gw_expansion")
            if n < 0:
                raise ConfigError(f"{loc}.gw_expansion", "order must be nonnegative")
            out[k] = n
        elif k == "duality":
            if v not in DUALITY:
                raise ConfigError(f"{loc}.duality", f"expected one of {DUALITY}")
            out[k] = v
        else:
            if not isinstance(v, list) or len(v) != 2:
                raise ConfigError(f"{loc}.ba_points", "expected two points")
            out[k] = [dump_scalar(load_scalar(p, f"{loc}.ba_points[{i}]")) for i, p in enumerate(v)]
    return dict(sorted(out.items()))


def _field_ext(v, loc="$.field"):
    if v is None:
        return None
    d = _int(v, loc)
    if d in (0, 1):
        return None
    ExactField(d)   # validates square-freeness
    return d


def _auto_field(x_spec, y_spec):
    x = load_function(x_spec, "$.x", ExactField())
    y = load_function(y_spec, "$.y", ExactField())
    F = cat.auto_field(x, y)
    return F.extension


def _spec_exts(obj):
    """Quadratic extensions used by scalars inside a spec."""
    if isinstance(obj, dict):
        if "sqrt" in obj:
            return {obj["sqrt"]}
        if set(obj) <= {"re", "im"} and obj:
            return {-1}
        return set().union(*(_spec_exts(v) for v in obj.values())) if obj else set()
    if isinstance(obj, list):
        return set().union(*(_spec_exts(v) for v in obj)) if obj else set()
    return set()


def parse_curve_config(document) -> CurveConfig:
    """Validate a config (dict, JSON text, or catalog name) into canonical form."""
    if isinstance(document, str):
        s = document.strip()
        if s in cat.CATALOG:
            document = {"curve": s}
        else:
            try:
                document = json.loads(document)
            except json.JSONDecodeError as e:
                raise ConfigError(f"line {e.lineno} column {e.colno}", f"malformed JSON: {e.msg}") from None
    if not isinstance(document, dict):
        raise ConfigError("$", "expected a JSON object")
    for k in document:
        if k not in _TOP_KEYS:
            raise ConfigError(f"$.{k}", "unknown field")
    name = document.get("curve", "custom")
    if not isinstance(name, str):
        raise ConfigError("$.curve", "expected a catalog name or 'custom'")

    mode = document.get("mode", "exact")
    if mode not in MODES:
        raise ConfigError("$.mode", f"expected one of {MODES}")
    prec, tol = document.get("precision"), document.get("tolerance")
    if mode == "float":
        if prec is None or tol is None:
            raise ConfigError("$", "float mode needs both precision and tolerance")
        prec = _int(prec, "$.precision")
        if prec < 16:
            raise ConfigError("$.precision", "precision must be at least 16 bits")
        try:
            import mpmath
            tv = mpmath.mpf(str(tol))
        except (ValueError, TypeError):
            raise ConfigError("$.tolerance", f"malformed tolerance {tol!r}") from None
        if not tv > 0:
            raise ConfigError("$.tolerance", "tolerance must be positive")
        tol = str(tol)
    else:
        prec, tol = None, None
    order = _int(document.get("order", DEFAULT_ORDER), "$.order")
    if order < 0:
        raise ConfigError("$.order", "order must be nonnegative")
    opts = document.get("options", {})
    if not isinstance(opts, dict):
        raise ConfigError("$.options", "expected an object")
    entry = cat.CATALOG.get(name)
    options = _options({**(entry.options if entry else {}), **opts})

    if name == "custom":
        if "params" in document and document["params"]:
            raise ConfigError("$.params", "custom curves take no catalog parameters")
        for k in ("x", "y"):
            if k not in document:
                raise ConfigError(f"$.{k}", "missing field")
        xs = dump_function(load_function(document["x"], "$.x", ExactField()))
        ys = dump_function(load_function(document["y"], "$.y", ExactField()))
        params, recipe = {}, canon_recipe(document.get("recipe"))
        default_b = "inf"
    else:
        entry = cat.CATALOG.get(name)
        if entry is None:
            raise ConfigError("$.curve", f"unknown catalog name {name!r}; known: {', '.join(sorted(cat.CATALOG))}")
        params = _canon_params(set(entry.defaults), {**entry.defaults, **document.get("params", {})}, "$.params")
        try:
            x, y, default_b = entry.build(params)
        except (ValueError, KeyError) as e:
            raise ConfigError("$.params", str(e)) from None
        xs, ys = dump_function(x), dump_function(y)
        for k, spec in (("x", xs), ("y", ys)):
            if k in document:
                given = dump_function(load_function(document[k], f"$.{k}", ExactField()))
                if given != spec:
                    raise ConfigError(f"$.{k}", f"does not match catalog curve {name!r}")
        default_b = "inf" if default_b == INF else dump_scalar(default_b)
        if "recipe" in document:
            recipe = canon_recipe(document["recipe"])
        else:
            recipe = canon_recipe(_jsonable(cat.recipe_spec(name, params)))

    b = document.get("basepoint", default_b)
    if b != "inf":
        b = dump_scalar(load_scalar(b, "$.basepoint"))

    if "field" in document:
        ext = _field_ext(document["field"])
    else:
        exts = _spec_exts([xs, ys, b]) - {None}
        if len(exts) > 1:
            raise ConfigError("$", f"scalars use several extensions {sorted(exts)}")
        try:
            ext = exts.pop() if exts else _auto_field(xs, ys)
        except FieldError as e:
            raise ConfigError("$.field", str(e)) from None
    return CurveConfig(curve=name, params=params, x=xs, y=ys, basepoint=b, field=ext, mode=mode,
                       precision=prec, tolerance=tol, order=order, recipe=recipe, options=options)


def _jsonable(obj):
    if obj is None:
        return None
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (str, int)) and not isinstance(obj, bool):
        return obj
    return dump_scalar(obj)
