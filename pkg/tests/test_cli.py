import json
from fractions import Fraction
import subprocess
import sys

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from quantcurve import catalog as cat
from quantcurve.cli import main
from quantcurve.config import ConfigError, load_scalar, dump_scalar, parse_curve_config, serialize_config
from quantcurve.scalars import QuadraticNumber

small = st.builds(Fraction, st.integers(-19, 19), st.integers(1, 9))


def _q(f):
    return f"{f.numerator}/{f.denominator}"


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- config -----------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(cat.CATALOG)), st.integers(min_value=0, max_value=6),
       st.sampled_from(["exact", "float"]), st.integers(min_value=16, max_value=512))
def test_catalog_config_round_trip(name, order, mode, prec):
    doc = {"curve": name, "order": order, "mode": mode}
    if mode == "float":
        doc.update(precision=prec, tolerance="1e-10")
    cfg = parse_curve_config(doc)
    text = serialize_config(cfg)
    again = parse_curve_config(text)
    assert serialize_config(again) == text
    assert again.curve_hash() == cfg.curve_hash()


@settings(max_examples=30, deadline=None)
@given(small, small, small.filter(lambda f: f != 0))
def test_custom_config_round_trip(a, b, c):
    doc = {"x": {"num": [_q(a), _q(b), _q(c)]}, "y": {"num": ["0", "1"]}}
    cfg = parse_curve_config(doc)
    text = serialize_config(cfg)
    assert serialize_config(parse_curve_config(text)) == text


def test_scalar_round_trip():
    for v in (mpq(-3, 7), QuadraticNumber(mpq(1), mpq(-2), 5), QuadraticNumber(mpq(0), mpq(1), -1)):
        assert load_scalar(dump_scalar(v), "$") == v


@pytest.mark.parametrize("doc, loc", [
    ({"curve": "airy", "bogus": 1}, "$.bogus"),
    ({"curve": "nope"}, "$.curve"),
    ({"curve": "airy", "mode": "float"}, "$"),
    ({"curve": "airy", "mode": "float", "precision": 8, "tolerance": "1e-5"}, "$.precision"),
    ({"curve": "airy", "mode": "float", "precision": 64, "tolerance": "-1"}, "$.tolerance"),
    ({"curve": "airy", "order": -1}, "$.order"),
    ({"curve": "airy", "options": {"coordinate": "polar"}}, "$.options.coordinate"),
    ({"x": {"num": ["0", "0", "1"]}}, "$.y"),
    ({"x": {"num": ["0", "0", "1"], "den": []}, "y": {"num": ["0", "1"]}}, "$.x.den"),
    ({"curve": "airy", "x": {"num": ["0", "0", "2"]}}, "$.x"),
    ({"curve": "airy", "recipe": {"family": "nope"}}, "$.recipe.family"),
])
def test_config_errors_carry_location(doc, loc):
    with pytest.raises(ConfigError) as e:
        parse_curve_config(doc)
    assert e.value.location == loc


def test_malformed_json_location():
    with pytest.raises(ConfigError) as e:
        parse_curve_config('{"curve": "airy",\n  "order": }')
    assert e.value.location.startswith("line 2")


# -- cli ---------------------------------------------------------------------

def test_exit_ok_and_report_shape(capsys):
    code, out, _ = _run(capsys, "--curve", "airy", "--command", "correlators", "--order", "2")
    assert code == 0
    rep = json.loads(out)
    assert rep["status"] == "ok"
    assert rep["provenance"]["order"] == 2
    assert {(c["g"], c["n"]) for c in rep["result"]["correlators"]} == {(0, 3), (1, 1), (0, 4), (1, 2)}
    assert "timings" not in rep


def test_exit_verification_failed(tmp_path, capsys):
    spec = cat.recipe_spec("gw-p1")
    spec["hbar_shift"] = "-1/2"
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"curve": "gw-p1", "order": 2, "recipe": spec}))
    code, out, err = _run(capsys, "--curve", str(p), "--command", "verify-qc")
    assert code == 1
    assert json.loads(out)["result"]["kills"] is False
    assert "verification failed" in err


def test_exit_precondition(tmp_path, capsys):
    code, _, err = _run(capsys, "--curve", "no-such-curve", "--command", "correlators")
    assert code == 2 and "--curve" in err
    code, _, err = _run(capsys, "--curve", "twoside-test", "--command", "verify-qc")
    assert code == 2 and "recipe" in err
    p = tmp_path / "broken.json"
    p.write_text("{oops")
    code, _, err = _run(capsys, "--curve", str(p), "--command", "correlators")
    assert code == 2 and "malformed JSON" in err


def test_output_file_and_timings(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, stdout, _ = _run(capsys, "--curve", "airy", "--command", "wavefunction", "--order", "1",
                           "--output", str(out), "--timings")
    assert code == 0 and stdout == ""
    assert "total" in json.loads(out.read_text())["timings"]


def test_float_mode_renders_re_im(capsys):
    code, out, _ = _run(capsys, "--curve", "gw-p1", "--command", "correlators", "--order", "1",
                        "--mode", "float", "--precision", "64", "--tolerance", "1e-12")
    assert code == 0
    rep = json.loads(out)
    pts = rep["result"]["ramification_points"]
    assert all(set(p) == {"re", "im"} for p in pts)
    assert rep["provenance"]["precision"] == 64


def test_catalog_command(capsys):
    code, out, _ = _run(capsys, "--command", "catalog")
    assert code == 0
    entries = json.loads(out)["result"]["entries"]
    assert [e["name"] for e in entries] == sorted(cat.CATALOG)
    assert all(e["admissibility"]["admissible"] for e in entries)


def test_check_duality_command(capsys):
    code, out, _ = _run(capsys, "--curve", "airy", "--command", "check-duality", "--order", "2")
    assert code == 0
    lap = json.loads(out)["result"]["laplace"]
    assert lap["forward"]["equal"] and lap["inverse"]["equal"]


def test_reports_are_deterministic_across_processes():
    outs = set()
    for seed in ("0", "7"):
        r = subprocess.run([sys.executable, "-m", "quantcurve.cli", "--curve", "gw-p1", "--command", "laplace",
                            "--order", "2"], capture_output=True, text=True, env={"PYTHONHASHSEED": seed},
                           check=True)
        outs.add(r.stdout)
    assert len(outs) == 1
