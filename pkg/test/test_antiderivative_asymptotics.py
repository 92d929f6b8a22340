import math
import sys
import threading
from fractions import Fraction
from pathlib import Path

import numpy as np

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from services.symbolic.antiderivative import Antiderivative
from services.symbolic.asymptotics import (
    TailBehaviour,
    dominance,
    expression_tail,
    sum_behaviour,
    to_exp_sum,
)
from services.symbolic.expression import differentiate
from services.symbolic.parser import parse
from services.symbolic.polynomial import Polynomial


def gaussian_primitive(x):
    """Closed form of integral_0^x (s^2 - 1) exp(-s^2) ds."""
    return -x * math.exp(-x * x) / 2 - math.sqrt(math.pi) / 4 * math.erf(x)


def test_polynomial_primitive_is_exact():
    F = Antiderivative(parse("x^2 - 1"))
    assert F.exact
    assert F.polynomial == Polynomial([0, -1, 0, Fraction(1, 3)])
    assert abs(F(2.0) - 2.0 / 3.0) < 1e-15


def test_gaussian_primitive_matches_closed_form():
    F = Antiderivative(parse("(x^2-1)*exp(-x^2)"))
    assert not F.exact
    assert abs(F(1.0) - (-0.5573)) < 1e-4
    for x in (1.0, -3.7, 0.26, 7.3, -12.0):
        assert abs(F(x) - gaussian_primitive(x)) < 1e-10, x
    assert F(0.0) == 0.0


def test_zero_primitive():
    F = Antiderivative(parse("0"))
    assert F(5.0) == 0.0 and F(-2.0) == 0.0


def test_primitive_of_derivative_recovers_function():
    rng = np.random.default_rng(5)
    texts = [
        "x^3*exp(-x^2)",
        "x/(1+x^2)",
        "(x^2-1)*exp(-x^2)",
        "exp(x/(1+x^2))",
        "x^2/(50*(x^2+1))",
        "exp(-x^2/2)*(x - 1/3)",
    ]
    for text in texts:
        e = parse(text)
        F = Antiderivative(differentiate(e))
        for x in rng.uniform(-5, 5, 8):
            assert abs(F(x) - (e.evaluate(x) - e.evaluate(0.0))) < 1e-8, (text, x)


def test_callable_integrand_and_concurrent_reads():
    F = Antiderivative(lambda s: math.cos(s), label="cos")
    xs = np.linspace(-9, 9, 37)
    results = {}

    def worker(i):
        results[i] = F.evaluate_array(xs)

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for i in range(4):
        assert np.max(np.abs(results[i] - np.sin(xs))) < 1e-10


def test_tail_of_gaussian_coefficient():
    t = expression_tail(parse("(x^2-1)*exp(-x^2)"), +1)
    assert t.sign == 1 and t.exp_direction == -1
    assert t.tail_integrable and t.tends_to_zero
    assert t.primitive().bounded


def test_tail_of_rational_damping():
    t = expression_tail(parse("-x/(1+x^4)"), +1)
    assert t.sign == -1 and t.power == -3 and t.tail_integrable
    t = expression_tail(parse("-x/(1+x^4)"), -1)
    assert t.sign == 1
    # -g/f2 with g = x
    r = expression_tail(parse("-x/(-x/(1+x^4))"), +1)
    assert r.sign == 1 and r.power == 4
    assert r.sqrt().power == 2


def test_primitive_tails_pick_orientation():
    t = expression_tail(parse("x^2 - 1"), +1).primitive()
    assert t.sign == 1 and t.power == 3 and abs(t.coefficient - 1 / 3) < 1e-15
    t = expression_tail(parse("x^2 - 1"), -1).primitive()
    assert t.sign == -1 and t.power == 3
    t = expression_tail(parse("1/(1+x^2)"), +1).primitive()
    assert t.bounded
    t = expression_tail(parse("x/(1+x^2)"), +1).primitive()
    assert t.log and t.is_divergent and t.sign == 1
    t = expression_tail(parse("x*exp(x^2)"), -1).primitive()
    assert t.sign == 1 and t.power == 0 and abs(t.coefficient - 0.5) < 1e-15


def test_dominance_and_sum_behaviour():
    exp_tail = expression_tail(parse("exp(x)"), +1)
    poly_tail = expression_tail(parse("-x^5"), +1)
    assert dominance(exp_tail, poly_tail) == 1
    assert sum_behaviour([exp_tail, poly_tail]) == TailBehaviour.PLUS_INFINITY
    F1 = expression_tail(parse("x^2 - 1"), +1).primitive()
    root = expression_tail(parse("1 + x^4"), +1).sqrt()
    neg_root = type(root)(side=root.side, sign=-1, coefficient=root.coefficient, power=root.power)
    assert sum_behaviour([F1, neg_root]) == TailBehaviour.PLUS_INFINITY
    bounded = expression_tail(parse("1/(1+x^2)"), +1).primitive()
    assert sum_behaviour([bounded, expression_tail(parse("exp(-x)"), +1)]) == TailBehaviour.BOUNDED
    a = expression_tail(parse("x^2"), +1)
    b = expression_tail(parse("-x^2"), +1)
    assert sum_behaviour([a, b]) == TailBehaviour.UNKNOWN


def test_exp_sum_class_membership():
    assert to_exp_sum(parse("exp(1/x)")) is None
    es = to_exp_sum(parse("(x^2-1)*exp(-x^2) + x*exp(-x^2)"))
    assert es is not None and es.single_term is not None
    assert to_exp_sum(parse("exp(x) - exp(x)")).is_zero


def main():
    tests = [
        test_polynomial_primitive_is_exact,
        test_gaussian_primitive_matches_closed_form,
        test_zero_primitive,
        test_primitive_of_derivative_recovers_function,
        test_callable_integrand_and_concurrent_reads,
        test_tail_of_gaussian_coefficient,
        test_tail_of_rational_damping,
        test_primitive_tails_pick_orientation,
        test_dominance_and_sum_behaviour,
        test_exp_sum_class_membership,
    ]

    for test_fn in tests:
        test_fn()
        print(f"[PASS] {test_fn.__name__}")

    print(f"All tests passed: {len(tests)}/{len(tests)}")


if __name__ == "__main__":
    main()
