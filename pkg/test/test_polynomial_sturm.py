import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from services.symbolic.parser import parse
from services.symbolic.polynomial import Polynomial, poly_gcd, square_free_decomposition
from services.symbolic.sign_analysis import sign_summary
from services.symbolic.sturm import (
    SignTag,
    count_real_roots,
    isolate_real_roots,
    sturm_sign_analysis,
)

GRID = np.linspace(-100.0, 100.0, 100_001)


def random_polynomial(rng):
    degree = int(rng.integers(1, 9))
    coeffs = [int(c) for c in rng.integers(-9, 10, degree + 1)]
    while coeffs[-1] == 0:
        coeffs[-1] = int(rng.integers(-9, 10))
    return Polynomial(coeffs)


def oracle_points(p):
    """Dense grid plus midpoints between numerically estimated real roots."""
    real = sorted(r.real for r in np.roots([float(c) for c in reversed(p.coeffs)]) if abs(r.imag) < 1e-7)
    extra = [(a + b) / 2 for a, b in zip(real, real[1:])]
    if real:
        extra += [real[0] - 1.0, real[-1] + 1.0]
    return extra


def sampled_signs(p, xs):
    """Float signs with rounding-level values treated as zero."""
    high_first = [float(c) for c in reversed(p.coeffs)]
    values = np.polyval(high_first, xs)
    noise = 1e-12 * np.polyval([abs(c) for c in high_first], np.abs(xs))
    signs = np.sign(values).astype(int)
    signs[np.abs(values) <= noise] = 0
    return signs


def oracle_signs(p):
    signs = set(sampled_signs(p, GRID).tolist())
    for x in oracle_points(p):
        signs.add(p.sign_at(Fraction(x)))
    # leading-term asymptotics
    signs.add(p.sign_at_infinity(+1))
    signs.add(p.sign_at_infinity(-1))
    signs.discard(0)
    return signs


def oracle_root_count(p):
    """Sign changes of a square-free polynomial over grid plus root midpoints."""
    xs = np.unique(np.concatenate([GRID, oracle_points(p)]))
    signs = sampled_signs(p, xs)
    nz = signs[signs != 0]
    return int(np.count_nonzero(nz[1:] != nz[:-1]))


def test_sum_of_squares_is_positive():
    s = sturm_sign_analysis(Polynomial([1, 0, 1]))
    assert s.tag == SignTag.EVERYWHERE_POSITIVE
    assert s.roots == ()


def test_difference_of_squares_changes_sign():
    s = sturm_sign_analysis(Polynomial([-1, 0, 1]))
    assert s.tag == SignTag.CHANGES_SIGN
    assert [r.midpoint for r in s.roots] == [-1.0, 1.0]


def test_quartic_has_four_roots():
    s = sturm_sign_analysis(Polynomial([1, 0, -4, 0, 1]))
    assert s.tag == SignTag.CHANGES_SIGN
    expected = [-1.9318516525781366, -0.5176380902050415, 0.5176380902050415, 1.9318516525781366]
    got = [r.midpoint for r in s.roots]
    assert len(got) == 4
    for a, b in zip(got, expected):
        assert abs(a - b) < 1e-9


def test_multiplicities_and_degenerate_tags():
    assert sturm_sign_analysis(Polynomial([1, -2, 1])).tag == SignTag.NONNEG_WITH_ZEROS
    assert sturm_sign_analysis(-(Polynomial([0, 0, 1]) * Polynomial([1, 0, 1]))).tag == SignTag.NONPOS_WITH_ZEROS
    assert sturm_sign_analysis(Polynomial([1, -2, 1]) * Polynomial([2, 1])).tag == SignTag.CHANGES_SIGN
    assert sturm_sign_analysis(Polynomial([0, 0, 0, 1])).tag == SignTag.CHANGES_SIGN
    assert sturm_sign_analysis(Polynomial()).tag == SignTag.IDENTICALLY_ZERO
    assert sturm_sign_analysis(Polynomial([-3])).tag == SignTag.EVERYWHERE_NEGATIVE


def test_square_free_decomposition():
    p = Polynomial([-1, 1]) ** 3 * Polynomial([2, 1]) ** 2 * Polynomial([1, 0, 1])
    parts = {m: f for f, m in square_free_decomposition(p)}
    assert parts[3] == Polynomial([-1, 1])
    assert parts[2] == Polynomial([2, 1])
    assert parts[1] == Polynomial([1, 0, 1])
    assert poly_gcd(p, p.derivative()).degree == 3


def test_divmod_reconstructs():
    a = Polynomial([3, -1, 0, 2, 5])
    b = Polynomial([1, 0, 2])
    q, r = a.divmod(b)
    assert q * b + r == a
    assert r.degree < b.degree


def test_interval_root_count():
    p = Polynomial([1, 0, -4, 0, 1])
    assert count_real_roots(p) == 4
    assert count_real_roots(p, Fraction(0), Fraction(1)) == 1
    assert count_real_roots(p, Fraction(-3), Fraction(0)) == 2
    assert count_real_roots(Polynomial([-1, 0, 1]), Fraction(-1), Fraction(1)) == 1


def test_random_sign_verdicts_match_dense_sampling():
    rng = np.random.default_rng(11)
    for _ in range(100):
        p = random_polynomial(rng)
        tag = sturm_sign_analysis(p).tag
        signs = oracle_signs(p)
        if tag == SignTag.CHANGES_SIGN:
            assert signs == {-1, 1}, (str(p), signs)
        elif tag in (SignTag.EVERYWHERE_POSITIVE, SignTag.NONNEG_WITH_ZEROS):
            assert signs == {1}, (str(p), signs)
        else:
            assert tag in (SignTag.EVERYWHERE_NEGATIVE, SignTag.NONPOS_WITH_ZEROS)
            assert signs == {-1}, (str(p), signs)


def test_random_root_counts_match_bisection_oracle():
    rng = np.random.default_rng(12)
    checked = 0
    while checked < 100:
        p = random_polynomial(rng)
        if poly_gcd(p, p.derivative()).degree > 0:
            continue
        roots = isolate_real_roots(p)
        assert len(roots) == count_real_roots(p)
        assert len(roots) == oracle_root_count(p), str(p)
        for r in roots:
            assert r.exact or p.sign_at(r.lo) * p.sign_at(r.hi) <= 0
        checked += 1


def test_expression_sign_summary_dispatch():
    s = sign_summary(parse("x^2*exp(-x)"))
    assert s.tag == SignTag.NONNEG_WITH_ZEROS and s.exact
    s = sign_summary(parse("x/((x/3)^6+1)"))
    assert s.tag == SignTag.CHANGES_SIGN and s.exact
    s = sign_summary(parse("1/(x^2-1)"))
    assert s.tag == SignTag.CHANGES_SIGN
    assert [p.midpoint for p in s.poles] == [-1.0, 1.0]
    s = sign_summary(parse("exp(-x^2) - 1/2"), points=2001)
    assert s.tag == SignTag.CHANGES_SIGN and not s.exact
    assert s.positive_at is not None and s.negative_at is not None
    s = sign_summary(parse("exp(-x^2) + exp(-x^4)"), points=2001)
    assert s.tag == SignTag.INDETERMINATE
    assert sign_summary(parse("x - x")).tag == SignTag.IDENTICALLY_ZERO


def main():
    tests = [
        test_sum_of_squares_is_positive,
        test_difference_of_squares_changes_sign,
        test_quartic_has_four_roots,
        test_multiplicities_and_degenerate_tags,
        test_square_free_decomposition,
        test_divmod_reconstructs,
        test_interval_root_count,
        test_random_sign_verdicts_match_dense_sampling,
        test_random_root_counts_match_bisection_oracle,
        test_expression_sign_summary_dispatch,
    ]

    for test_fn in tests:
        test_fn()
        print(f"[PASS] {test_fn.__name__}")

    print(f"All tests passed: {len(tests)}/{len(tests)}")


if __name__ == "__main__":
    main()
