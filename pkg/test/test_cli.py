import contextlib
import io
import json
import math
import sys
import tempfile
from pathlib import Path

import numpy as np

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from cyclescope import EXIT_NUMERIC, EXIT_USAGE, run
from services.cli.options import UsageError, parse_parameters, parse_seeds, parse_window
from utils.artifact_writer import curves_frame, read_csv, sanitize_for_json, write_csv
from utils.svg_renderer import clip_runs, render_svg

SPECS = PROJECT_ROOT / "specs"


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = run([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


def write_spec(directory: Path, name: str, text: str) -> Path:
    path = Path(directory) / name
    path.write_text(text, encoding="utf-8")
    return path


# ───────────────────────────────────────────────
# check
# ───────────────────────────────────────────────

def test_check_exotic_applies():
    code, out, _ = invoke(["check", "--spec", SPECS / "fig3.toml", "--theorem", "t3"])
    assert code == 0
    reports = json.loads(out)
    assert [r["theorem"] for r in reports] == ["T3"]
    assert reports[0]["overall"] == "Applies"
    assert all(c["verdict"] == "Holds" for c in reports[0]["conditions"])


def test_check_polynomial_f2_fails_t2():
    with tempfile.TemporaryDirectory() as tmp:
        path = write_spec(tmp, "poly.toml", 'coefficients = ["x", "x^2-1", "-x^2"]\n')
        code, out, _ = invoke(["check", "--spec", path, "--theorem", "t2", "--out", tmp])
        assert code == 1
        report = json.loads(out)[0]
        d3 = next(c for c in report["conditions"] if c["label"] == "D3")
        assert d3["verdict"] == "Fails"
        assert "polynomial" in d3["evidence"]
        assert (Path(tmp) / "check.json").exists()


def test_check_usage_errors():
    with tempfile.TemporaryDirectory() as tmp:
        broken = write_spec(tmp, "broken.toml", 'coefficients = ["x", "x^2-1"\n')
        code, _, err = invoke(["check", "--spec", broken])
        assert code == EXIT_USAGE
        assert "malformed" in err

        bad_expr = write_spec(tmp, "bad.toml", 'coefficients = ["x", "x^^2"]\n')
        assert invoke(["check", "--spec", bad_expr])[0] == EXIT_USAGE

    assert invoke(["check", "--spec", SPECS / "missing.toml"])[0] == EXIT_USAGE
    assert invoke(["check", "--spec", SPECS / "fig1.toml", "--theorem", "t9"])[0] == EXIT_USAGE
    assert invoke(["check", "--spec", SPECS / "fig1.toml", "--no-such-flag"])[0] == EXIT_USAGE
    assert invoke(["frobnicate"])[0] == EXIT_USAGE
    # a single theorem that cannot take an n = 3 equation is a usage error
    assert invoke(["check", "--spec", SPECS / "fig4.toml", "--theorem", "t2"])[0] == EXIT_USAGE


def test_check_all_theorems_takes_best_verdict():
    code, out, _ = invoke(["check", "--spec", SPECS / "fig4.toml"])
    reports = json.loads(out)
    assert [r["theorem"] for r in reports] == ["T1", "T2", "T3", "T4"]
    by_name = {r["theorem"]: r["overall"] for r in reports}
    # T2 cannot take n = 3; it is reported, not raised
    assert by_name["T2"] == "DoesNotApply"
    expected = 0 if "Applies" in by_name.values() else (2 if "Indeterminate" in by_name.values() else 1)
    assert code == expected


# ───────────────────────────────────────────────
# cycle
# ───────────────────────────────────────────────

def test_cycle_vdp_artifacts():
    with tempfile.TemporaryDirectory() as tmp:
        code, out, _ = invoke(["cycle", "--spec", SPECS / "vdp.toml", "--out", tmp])
        assert code == 0
        estimate = json.loads(out)
        for key in ("y_star", "period", "closure_error", "multiplier", "stability"):
            assert key in estimate
        assert estimate["stability"] == "attracting"
        assert estimate["closure_error"] < 1e-6

        saved = json.loads((Path(tmp) / "cycle.json").read_text(encoding="utf-8"))
        assert saved == estimate

        first = (Path(tmp) / "cycle.csv").read_text(encoding="utf-8").splitlines()[0]
        assert first.startswith("# y_star=")
        frame = read_csv(Path(tmp) / "cycle.csv")
        assert list(frame.columns) == ["t", "x", "y"]
        assert len(frame) == 2048
        assert abs(frame["x"].abs().max() - 2.0) < 0.05

        svg = (Path(tmp) / "cycle.svg").read_text(encoding="utf-8")
        assert 'viewBox="-3 -3 6 6"' in svg
        assert 'data-curve="cycle"' in svg


def test_cycle_bracket_failure_prints_return_values():
    with tempfile.TemporaryDirectory() as tmp:
        code, out, err = invoke(["cycle", "--spec", SPECS / "harmonic.toml", "--out", tmp])
        assert code == EXIT_NUMERIC
        assert out == ""
        assert "R(1) - 1 = " in err and "R(2) - 2 = " in err


def test_cycle_needs_bracket_or_scan():
    with tempfile.TemporaryDirectory() as tmp:
        path = write_spec(tmp, "plain.toml", 'coefficients = ["x", "0.1*(x^2-1)"]\n')
        assert invoke(["cycle", "--spec", path, "--out", tmp])[0] == EXIT_USAGE
        assert invoke(["cycle", "--spec", path, "--bracket", "3,1", "--out", tmp])[0] == EXIT_USAGE
        code, out, _ = invoke(["cycle", "--spec", path, "--scan", "0.5,4,8", "--out", tmp])
        assert code == 0
        assert abs(json.loads(out)["amplitude"] - 2.0) < 0.05


# ───────────────────────────────────────────────
# portrait / isoclines
# ───────────────────────────────────────────────

def test_portrait_harmonic_circle():
    with tempfile.TemporaryDirectory() as tmp:
        code, out, _ = invoke(["portrait", "--spec", SPECS / "harmonic.toml", "--out", tmp])
        assert code == 0
        assert "TimeLimit" in out

        path = Path(tmp) / "trajectory_00.csv"
        header = path.read_text(encoding="utf-8").splitlines()[0]
        assert header.startswith("# seed=1.0,0.0")
        assert "termination=TimeLimit" in header
        frame = read_csv(path)
        radius = np.hypot(frame["x"].to_numpy(), frame["y"].to_numpy())
        assert np.max(np.abs(radius - 1.0)) < 1e-6
        assert abs(frame["t"].iloc[-1] - 2.0 * math.pi) < 1e-12

        curves = read_csv(Path(tmp) / "portrait_curves.csv")
        assert set(curves["curve_id"]) == {"finf"}
        # phase plane: y = F_1(x) is drawn as v = 0
        assert np.all(curves["y"].to_numpy() == 0.0)

        svg = (Path(tmp) / "portrait.svg").read_text(encoding="utf-8")
        assert 'data-curve="traj00"' in svg


def test_portrait_is_deterministic():
    with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
        argv = ["portrait", "--spec", SPECS / "vdp.toml", "--seeds", "0,0.5;0,3", "--tmax", "30"]
        assert invoke(argv + ["--out", a])[0] == 0
        assert invoke(argv + ["--out", b, "--threads", "1"])[0] == 0
        for name in ("trajectory_00.csv", "trajectory_01.csv", "portrait_curves.csv", "portrait.svg"):
            assert (Path(a) / name).read_bytes() == (Path(b) / name).read_bytes(), name


def test_portrait_no_cycle_levels():
    with tempfile.TemporaryDirectory() as tmp:
        code, out, _ = invoke(["portrait", "--spec", SPECS / "fig1.toml", "--seeds", "0,0.5", "--out", tmp])
        assert code == 0
        curves = read_csv(Path(tmp) / "portrait_curves.csv")
        ids = list(dict.fromkeys(curves["curve_id"]))
        for lam in ("0.1", "0.3", "0.5", "0.7", "0.9", "1.1"):
            assert f"level{lam}-0" in ids
        assert "iso+00" in ids or "iso-00" in ids
        assert out.count("closed") == 3
        assert out.count("open") == 3


def test_portrait_blow_up_is_not_fatal():
    with tempfile.TemporaryDirectory() as tmp:
        code, out, _ = invoke([
            "portrait", "--spec", SPECS / "hopf.toml", "--seeds=-35.35533905932738,35.35533905932738",
            "--out", tmp,
        ])
        assert code == 0
        assert "BlowUp" in out
        header = (Path(tmp) / "trajectory_00.csv").read_text(encoding="utf-8").splitlines()[0]
        assert "termination=BlowUp" in header


def test_isoclines_command():
    with tempfile.TemporaryDirectory() as tmp:
        code, out, _ = invoke(["isoclines", "--spec", SPECS / "fig2.toml", "--out", tmp])
        assert code == 0
        curves = read_csv(Path(tmp) / "isoclines.csv")
        ids = set(curves["curve_id"])
        assert "finf" in ids
        assert any(i.startswith("iso+") for i in ids)
        assert "yes" in out

        assert invoke(["isoclines", "--spec", SPECS / "harmonic.toml", "--out", tmp])[0] == EXIT_USAGE


def test_hopf_scan_usage():
    with tempfile.TemporaryDirectory() as tmp:
        path = write_spec(tmp, "family.toml", 'coefficients = ["x", "a*x^2-b", "x^2+1", "x^3"]\n')
        assert invoke(["hopf-scan", "--spec", path, "--out", tmp])[0] == EXIT_USAGE
        assert invoke(["hopf-scan", "--spec", path, "--b-values", "0.1,-1", "--a", "1", "--out", tmp])[0] == EXIT_USAGE
        no_b = write_spec(tmp, "no_b.toml", 'coefficients = ["x", "a*x^2-1"]\n')
        assert invoke(["hopf-scan", "--spec", no_b, "--b-values", "0.1", "--a", "1", "--out", tmp])[0] == EXIT_USAGE


# ───────────────────────────────────────────────
# helpers
# ───────────────────────────────────────────────

def test_option_parsers():
    assert parse_window("2") == (-2.0, 2.0, -2.0, 2.0)
    assert parse_window("-1,2,-3,4") == (-1.0, 2.0, -3.0, 4.0)
    assert parse_seeds("0,1; 2,-3") == [(0.0, 1.0), (2.0, -3.0)]
    assert parse_parameters(["a=1", "b = 1/3"]) == {"a": "1", "b": "1/3"}
    for call in (
        lambda: parse_window("1,2"),
        lambda: parse_seeds("1"),
        lambda: parse_parameters(["a"]),
        lambda: parse_parameters(["a=x"]),
    ):
        try:
            call()
        except UsageError:
            pass
        else:
            raise AssertionError("accepted bad option value")


def test_artifact_writer_round_trip_and_json():
    assert sanitize_for_json({"a": [1.0, math.inf, np.float64(math.nan)], "b": np.int64(3)}) == {"a": [1.0, None, None], "b": 3}
    values = np.array([0.1, 1.0 / 3.0, math.pi, -2.5e-300])
    with tempfile.TemporaryDirectory() as tmp:
        frame = curves_frame({"c": np.column_stack([values, values[::-1]])})
        path = write_csv(Path(tmp), "c", frame, header={"k": "v"})
        assert path.read_text(encoding="utf-8").startswith("# k=v\ncurve_id,x,y\n")
        back = read_csv(path)
        assert np.array_equal(back["x"].to_numpy(), values)
        assert np.array_equal(back["y"].to_numpy(), values[::-1])


def test_svg_clipping():
    pts = np.array([[0.0, 0.0], [0.5, 0.5], [5.0, 5.0], [0.2, 0.1], [0.3, 0.3], [0.4, 0.4], [np.inf, 0.0]])
    runs = clip_runs(pts, (-1.0, 1.0, -1.0, 1.0))
    assert [len(r) for r in runs] == [2, 3]
    svg = render_svg([("traj00", pts)], (-1.0, 1.0, -2.0, 2.0))
    assert 'viewBox="-1 -2 2 4"' in svg
    assert svg.count("<polyline") == 2


def main():
    tests = [
        test_check_exotic_applies,
        test_check_polynomial_f2_fails_t2,
        test_check_usage_errors,
        test_check_all_theorems_takes_best_verdict,
        test_cycle_vdp_artifacts,
        test_cycle_bracket_failure_prints_return_values,
        test_cycle_needs_bracket_or_scan,
        test_portrait_harmonic_circle,
        test_portrait_is_deterministic,
        test_portrait_no_cycle_levels,
        test_portrait_blow_up_is_not_fatal,
        test_isoclines_command,
        test_hopf_scan_usage,
        test_option_parsers,
        test_artifact_writer_round_trip_and_json,
        test_svg_clipping,
    ]

    for test_fn in tests:
        test_fn()
        print(f"[PASS] {test_fn.__name__}")

    print(f"All tests passed: {len(tests)}/{len(tests)}")


if __name__ == "__main__":
    main()
