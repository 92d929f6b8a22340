import contextlib
import os
import sys
import tempfile
from pathlib import Path

if not hasattr(contextlib, "chdir"):  # Python < 3.11
    @contextlib.contextmanager
    def _chdir(path):
        old = os.getcwd()
        os.chdir(path)
        try:
            yield
        finally:
            os.chdir(old)

    contextlib.chdir = _chdir

import numpy as np

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from config import settings
from dto.theorem_dto import Verdict
from services.symbolic.polynomial import Polynomial
from services.symbolic.expression import compile_expression
from services.system.equation import EquationFamily, EquationSpec, SpecError
from services.system.isoclines import (
    IsoclineError,
    branch_domains,
    infinity_isocline,
    isoclines,
    radicand_expression,
    upper_left,
)
from services.system.quadruple import polynomial_quadruple
from services.system.spec_io import document_from_spec, load_spec, resolve_spec_path
from services.system.validation import validate

NO_CYCLE = ["x", "x^2+1", "-x^2"]
EXOTIC = ["x/((x/3)^6+1)", "x^2-1", "(x^4-4*x^2+1)/((x/3)^6+1)"]


def spec(texts, **kw):
    return EquationSpec.from_texts(texts, **kw)


def test_field_examples():
    assert spec(["x"]).field(1.0, 0.0) == (0.0, -1.0)
    assert spec(NO_CYCLE).field(0.0, 1.0) == (1.0, -1.0)
    s = spec(EXOTIC)
    for x in np.linspace(-3, 3, 25):
        dx, dy = s.field(float(x), 0.0)
        assert dx == 0.0
        assert abs(dy + s.compiled[0].scalar(float(x))) < 1e-15


def test_divergence_examples():
    harmonic = spec(["x"])
    assert harmonic.divergence(0.3, -2.0) == 0.0
    lienard = spec(["x", "x^2-1"])
    for x, y in [(0.0, 1.0), (2.0, -3.0), (-0.5, 0.25)]:
        assert abs(lienard.divergence(x, y) + (x * x - 1)) < 1e-14


def test_divergence_matches_finite_difference_trace():
    rng = np.random.default_rng(21)
    h = 1e-5
    for _ in range(25):
        texts = []
        for l in range(4):
            a, b, c = (int(v) for v in rng.integers(-5, 6, size=3))
            if l == 3 and a == 0 and b == 0 and c == 0:
                c = 1
            texts.append(f"({a})*x^2 + ({b})*x + ({c})")
        s = spec(texts)
        x, y = (float(v) for v in rng.uniform(-1.5, 1.5, size=2))
        # first component is y, so only d(dy/dt)/dy contributes to the trace
        fd = (s.field(x, y + h)[1] - s.field(x, y - h)[1]) / (2 * h)
        d = s.divergence(x, y)
        assert abs(d - fd) < 1e-6 * max(1.0, abs(d)), (texts, x, y, d, fd)


def test_rhs_matches_field_and_divergence():
    s = spec(EXOTIC)
    rhs = s.rhs(with_divergence=True)
    out = rhs(0.0, np.array([0.7, -1.1, 0.0]))
    dx, dy = s.field(0.7, -1.1)
    assert abs(out[0] - dx) < 1e-15 and abs(out[1] - dy) < 1e-13
    assert abs(out[2] - s.divergence(0.7, -1.1)) < 1e-13


def test_validate_examples():
    report = validate(spec(["x"]))
    assert report.b.verdict == Verdict.HOLDS and "exact" in report.b.evidence
    assert report.valid

    report = validate(spec(["x^3-x"]))
    assert report.b.verdict == Verdict.FAILS

    report = validate(spec(EXOTIC))
    assert report.a1.verdict == Verdict.HOLDS
    assert report.a2.verdict == Verdict.HOLDS
    assert report.b.verdict == Verdict.HOLDS

    report = validate(spec(["x", "1/x"]))
    assert report.a2.verdict == Verdict.FAILS


def test_isoclines_negative_f2():
    s = spec(["x", "x^2-1", "-1"])
    assert branch_domains(s, (-3.0, 3.0)) == [(0.0, 3.0)]
    branches = isoclines(s, (-3.0, 3.0))
    assert sorted(br.sign for br in branches) == [-1, 1]
    for br in branches:
        F1 = br.x ** 3 / 3 - br.x
        assert np.all(br.x >= 0.0)
        assert np.max(np.abs(br.y - F1 - br.sign * np.sqrt(br.x))) < 1e-12


def test_isoclines_positive_f2():
    s = spec(["x", "0", "1"])
    domains = branch_domains(s, (-3.0, 3.0))
    assert domains == [(-3.0, 0.0)]
    for br in isoclines(s, (-3.0, 3.0)):
        assert np.all(br.x <= 0.0)


def test_isocline_endpoints_at_quartic_roots():
    s = spec(EXOTIC)
    domains = branch_domains(s, (-3.0, 3.0))
    assert len(domains) == 3
    endpoints = sorted({e for d in domains for e in d})
    for root in np.roots([1, 0, -4, 0, 1]).real:
        assert min(abs(root - e) for e in endpoints) < 1e-9, (root, endpoints)
    assert domains[0][0] == -3.0
    assert abs(domains[1][1]) < 1e-12

    left = upper_left(isoclines(s, (-3.0, 3.0)))
    assert left is not None and left.sign == 1 and left.lo == -3.0


def test_isocline_samples_are_zero_isocline_points():
    s = spec(EXOTIC)
    rho = compile_expression(radicand_expression(s))
    g = s.compiled[0]
    f2 = s.compiled[2]
    for br in isoclines(s, (-3.0, 3.0)):
        assert br.x.size > 10
        assert np.all(rho.vector(br.x) >= 0.0)
        F1 = s.F1.evaluate_array(br.x)
        if br.sign > 0:
            assert np.all(br.y >= F1)
        else:
            assert np.all(br.y <= F1)
        for x, y in zip(br.x, br.y):
            x, y = float(x), float(y)
            scale = 1.0 + abs(g.scalar(x)) + abs(f2.scalar(x))
            assert abs(s.shifted_field(x, y)[1]) < 1e-9 * (1.0 + abs(y)) * scale


def test_isocline_errors():
    try:
        isoclines(spec(["x", "x^2-1"]), (-1.0, 1.0))
    except IsoclineError:
        pass
    else:
        raise AssertionError("n=1 accepted")
    try:
        isoclines(spec(["x", "x^2-1"]).padded(2), (-1.0, 1.0))
    except IsoclineError as e:
        assert "identically zero" in str(e)
    else:
        raise AssertionError("f_2 = 0 accepted")


def test_infinity_isocline_is_f1_primitive():
    s = spec(NO_CYCLE)
    curve = infinity_isocline(s, (-2.0, 2.0), samples=41)
    assert curve.sign == 0 and curve.label == "y=F_1"
    assert np.max(np.abs(curve.y - (curve.x ** 3 / 3 + curve.x))) < 1e-13


def test_polynomial_quadruple_from_rational_spec():
    quad = polynomial_quadruple(spec(EXOTIC))
    assert quad is not None
    assert quad.p == Polynomial([729, 0, 0, 0, 0, 0, 1])
    assert quad.q1 == Polynomial([-1, 0, 1])
    assert quad.q2 == Polynomial([729, 0, -2916, 0, 729])
    assert quad.r == Polynomial([0, 729])
    assert polynomial_quadruple(spec(["x", "exp(x)"])) is None


def test_spec_document_round_trip_and_errors():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "fig1.toml"
        path.write_text('name = "no_cycle"\ncoefficients = ["x", "x^2+1", "-x^2"]\n', encoding="utf-8")
        s, doc = load_spec(path)
        assert s.n == 2 and doc.name == "no_cycle"
        assert document_from_spec(s).coefficients == NO_CYCLE

        bad = Path(tmp) / "bad.toml"
        bad.write_text("coefficients = [\n", encoding="utf-8")
        try:
            load_spec(bad)
        except SpecError:
            pass
        else:
            raise AssertionError("malformed TOML accepted")

        family = Path(tmp) / "hopf.toml"
        family.write_text('coefficients = ["x", "a*x^2-b"]\n', encoding="utf-8")
        try:
            load_spec(family)
        except SpecError as e:
            assert "unbound" in str(e)
        else:
            raise AssertionError("unbound parameters accepted")
        s, _ = load_spec(family, {"a": 1, "b": "1/10"})
        assert abs(s.coefficient_values(1.0)[1] - 0.9) < 1e-15


def test_family_and_spec_errors():
    fam = EquationFamily(texts=("x", "a*x^2-b"), parameter_names=("a", "b"), defaults={"a": 1})
    s = fam.instantiate(b="1/20")
    assert abs(s.compiled[1].scalar(0.0) + 0.05) < 1e-15
    for bad in (lambda: fam.instantiate(), lambda: spec([]), lambda: spec(["x", "0"]), lambda: spec(["x", "x^"])):
        try:
            bad()
        except SpecError:
            continue
        raise AssertionError("invalid spec accepted")


def test_bare_spec_name_falls_back_to_shipped_specs():
    with tempfile.TemporaryDirectory() as tmp, contextlib.chdir(tmp):
        shipped = settings.spec_dir / "harmonic.toml"
        assert resolve_spec_path(Path("harmonic.toml")) == shipped
        assert resolve_spec_path(Path("harmonic")) == shipped
        assert resolve_spec_path(Path("nowhere.toml")) == Path("nowhere.toml")
        s, doc = load_spec(Path("harmonic"))
        assert s.n == 0 and doc.name == "harmonic"

        # a local file of the same name wins
        Path("harmonic.toml").write_text('coefficients = ["x", "1"]\n', encoding="utf-8")
        assert resolve_spec_path(Path("harmonic.toml")) == Path("harmonic.toml")


def main():
    tests = [
        test_field_examples,
        test_divergence_examples,
        test_divergence_matches_finite_difference_trace,
        test_rhs_matches_field_and_divergence,
        test_validate_examples,
        test_isoclines_negative_f2,
        test_isoclines_positive_f2,
        test_isocline_endpoints_at_quartic_roots,
        test_isocline_samples_are_zero_isocline_points,
        test_isocline_errors,
        test_infinity_isocline_is_f1_primitive,
        test_polynomial_quadruple_from_rational_spec,
        test_spec_document_round_trip_and_errors,
        test_family_and_spec_errors,
        test_bare_spec_name_falls_back_to_shipped_specs,
    ]

    for test_fn in tests:
        test_fn()
        print(f"[PASS] {test_fn.__name__}")

    print(f"All tests passed: {len(tests)}/{len(tests)}")


if __name__ == "__main__":
    main()
