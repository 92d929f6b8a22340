import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from services.symbolic.expression import (
    X,
    Const,
    EvaluationError,
    Exp,
    Mul,
    add,
    compile_expression,
    differentiate,
    div,
    exp,
    mul,
    neg,
    power,
    sub,
    substitute_x,
    to_text,
)
from services.symbolic.parser import ExpressionSyntaxError, parse
from services.symbolic.polynomial import Polynomial
from services.symbolic.rational import to_polynomial


def random_tree(rng, depth):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return X
        choice = rng.integers(0, 3)
        if choice == 0:
            return Const(Fraction(int(rng.integers(-4, 5))))
        if choice == 1:
            return Const(Fraction(int(rng.integers(1, 7)), int(rng.integers(2, 7))))
        return Const(float(np.round(rng.uniform(-2, 2), 3)))
    op = rng.choice(["add", "sub", "mul", "div", "pow", "exp", "neg"])
    a = random_tree(rng, depth - 1)
    if op == "add":
        return add(a, random_tree(rng, depth - 1))
    if op == "sub":
        return sub(a, random_tree(rng, depth - 1))
    if op == "mul":
        return mul(a, random_tree(rng, depth - 1))
    if op == "div":
        b = random_tree(rng, depth - 1)
        return div(a, add(Const(Fraction(1)), power(b, 2)))
    if op == "pow":
        return power(a, int(rng.integers(2, 4)))
    if op == "neg":
        return neg(a)
    # bounded argument keeps exp away from overflow
    return exp(div(a, add(Const(Fraction(1)), power(a, 2))))


def test_parse_polynomial_structure():
    e = parse("x^2 - 1")
    assert to_polynomial(e) == Polynomial([-1, 0, 1])


def test_parse_gaussian_product():
    e = parse("(x^2-1)*exp(-x^2)")
    assert isinstance(e, Mul)
    assert isinstance(e.right, Exp)


def test_parse_rejects_non_integer_exponent():
    for text in ("x^y", "x^0.5", "x^(1/2)"):
        try:
            parse(text)
        except ExpressionSyntaxError as e:
            assert "non-integer exponent" in str(e)
            assert e.position == 2
        else:
            raise AssertionError(f"{text!r} should not parse")


def test_parse_reports_position():
    try:
        parse("x + * 2")
    except ExpressionSyntaxError as e:
        assert e.position == 4
    else:
        raise AssertionError("expected a syntax error")

    for text in ("2x", "sin(x)", "(x + 1", "", "x $ 1"):
        try:
            parse(text)
        except ExpressionSyntaxError:
            pass
        else:
            raise AssertionError(f"{text!r} should not parse")


def test_parse_parameters_and_scientific_numbers():
    e = parse("a*x^2 - b", {"a": 1, "b": "1/10"})
    assert to_polynomial(e) == Polynomial([Fraction(-1, 10), 0, 1])
    assert parse("1.5e-3*x").evaluate(2.0) == 0.003
    try:
        parse("a*x")
    except ExpressionSyntaxError as e:
        assert "unknown identifier" in str(e)
    else:
        raise AssertionError("unbound parameter should be rejected")


def test_eval_examples():
    assert parse("exp(-x^2)").evaluate(0.0) == 1.0
    assert parse("x^2 - 1").evaluate(2.0) == 3.0
    assert abs(parse("x^2/(50*(x^2+1))").evaluate(1.0) - 0.01) < 1e-15


def test_eval_division_by_zero_is_reported():
    e = parse("1/x")
    for fn in (e.evaluate, compile_expression(e).scalar):
        try:
            fn(0.0)
        except EvaluationError:
            pass
        else:
            raise AssertionError("division by zero should raise EvaluationError")


def test_eval_overflow_is_infinite():
    assert parse("exp(x^2)").evaluate(100.0) == math.inf
    assert compile_expression(parse("exp(x^2)")).scalar(100.0) == math.inf


def test_compiled_matches_tree_evaluation():
    rng = np.random.default_rng(7)
    xs = rng.uniform(-2, 2, 50)
    for _ in range(40):
        e = random_tree(rng, 3)
        c = compile_expression(e)
        vec = c.vector(xs)
        assert vec.shape == xs.shape
        for x, v in zip(xs, vec):
            ref = e.evaluate(x)
            assert abs(c.scalar(x) - ref) <= 1e-12 * max(1.0, abs(ref))
            assert abs(v - ref) <= 1e-12 * max(1.0, abs(ref))


def test_differentiate_cubic():
    d = differentiate(parse("x^3/3 - x"))
    assert to_polynomial(d) == Polynomial([-1, 0, 1])


def test_differentiate_gaussian():
    d = differentiate(parse("exp(-x^2)"))
    for x in (-1.3, 0.0, 0.4, 2.2):
        assert abs(d.evaluate(x) - (-2 * x * math.exp(-x * x))) < 1e-14


def test_differentiate_matches_central_difference_on_random_trees():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 100:
        e = random_tree(rng, 3)
        d = differentiate(e)
        x = float(rng.uniform(-1.5, 1.5))
        h = 1e-3
        # Richardson-extrapolated central difference, O(h^4)
        d1 = (e.evaluate(x + h) - e.evaluate(x - h)) / (2 * h)
        d2 = (e.evaluate(x + h / 2) - e.evaluate(x - h / 2)) / h
        fd = (4 * d2 - d1) / 3
        exact = d.evaluate(x)
        scale = max(1.0, abs(exact), abs(e.evaluate(x)))
        assert abs(exact - fd) <= 1e-6 * scale, (to_text(e), x, exact, fd)
        checked += 1


def test_print_parse_round_trip():
    rng = np.random.default_rng(99)
    for _ in range(100):
        e = random_tree(rng, 4)
        text = to_text(e)
        back = parse(text)
        x = float(rng.uniform(-2, 2))
        a, b = e.evaluate(x), back.evaluate(x)
        assert abs(a - b) <= 1e-12 * abs(a) + 1e-300, (text, x, a, b)


def test_substitute_x_reflects():
    e = parse("x^3 - 2*x")
    r = substitute_x(e, neg(X))
    for x in (-1.0, 0.5, 3.0):
        assert r.evaluate(x) == e.evaluate(-x)


def main():
    tests = [
        test_parse_polynomial_structure,
        test_parse_gaussian_product,
        test_parse_rejects_non_integer_exponent,
        test_parse_reports_position,
        test_parse_parameters_and_scientific_numbers,
        test_eval_examples,
        test_eval_division_by_zero_is_reported,
        test_eval_overflow_is_infinite,
        test_compiled_matches_tree_evaluation,
        test_differentiate_cubic,
        test_differentiate_gaussian,
        test_differentiate_matches_central_difference_on_random_trees,
        test_print_parse_round_trip,
        test_substitute_x_reflects,
    ]

    for test_fn in tests:
        test_fn()
        print(f"[PASS] {test_fn.__name__}")

    print(f"All tests passed: {len(tests)}/{len(tests)}")


if __name__ == "__main__":
    main()
