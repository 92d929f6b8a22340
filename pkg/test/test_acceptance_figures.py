"""Figure-level reproductions: each test runs a whole example end to end."""
import sys
from pathlib import Path

import numpy as np

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from dto.dynamics_dto import IntegrationOptions, Stability
from dto.theorem_dto import Applicability, Verdict
from services.dynamics.cycle_finder import find_cycle, find_cycles, multiplier_from_derivative
from services.dynamics.flux import lienard_circle_flux
from services.dynamics.hopf_scan import hopf_scan
from services.dynamics.return_map import return_map_grid, section_crossings, sign_changes
from services.dynamics.star_shape import star_shaped
from services.system.equation import EquationFamily, EquationSpec
from services.theorems.existence_poly import check_existence_poly_spec
from services.theorems.nonexistence import check_nonexistence

NO_CYCLE = EquationSpec.from_texts(["x", "x^2+1", "-x^2"], name="no_cycle")
EXOTIC = EquationSpec.from_texts(["x/((x/3)^6+1)", "x^2-1", "(x^4-4*x^2+1)/((x/3)^6+1)"], name="exotic")
MASSERA_CUBIC = EquationSpec.from_texts(["x", "(x^2-1)*exp(-x^2)", "0", "x^2/(50*(x^2+1))"], name="massera_cubic")
CLASSICAL = EquationSpec.from_texts(["x", "(x^2-1)*exp(-x^2)"], name="classical")
HOPF = EquationFamily(texts=("x", "a*x^2-b", "x^2+1", "x^3"), parameter_names=("a", "b"), name="hopf")


def test_exotic_cycle_theorem_and_location():
    report = check_existence_poly_spec(EXOTIC)
    assert report.overall == Applicability.APPLIES
    assert all(c.verdict == Verdict.HOLDS for c in report.conditions)

    cycles = find_cycles(EXOTIC, np.linspace(0.05, 5.0, 100), max_workers=4)
    attracting = [c for c in cycles if c.multiplier < 1.0]
    assert attracting
    assert all(c.closure_error < 1e-6 for c in attracting)


def test_massera_cubic_unique_attracting_star_shaped_cycle():
    samples = return_map_grid(MASSERA_CUBIC, np.linspace(0.01, 5.0, 50), max_workers=4)
    assert all(s.delta is not None for s in samples)
    brackets = sign_changes(samples)
    assert len(brackets) == 1

    cycle = find_cycle(MASSERA_CUBIC, brackets[0])
    assert cycle.multiplier < 1.0
    assert cycle.stability == Stability.ATTRACTING
    derivative = multiplier_from_derivative(MASSERA_CUBIC, cycle)
    assert abs(derivative - cycle.multiplier) <= 0.05 * cycle.multiplier
    assert star_shaped(MASSERA_CUBIC, cycle, samples=2048).star_shaped

    ys = section_crossings(MASSERA_CUBIC, (0.0, 0.01), 10, IntegrationOptions(tmax=400.0))
    assert len(ys) == 10
    assert np.all(np.diff(ys) > 0)
    assert ys[-1] < cycle.y_star


def test_classical_massera_has_no_cycle():
    flux = lienard_circle_flux(CLASSICAL.coefficient(1))
    assert np.min(flux(np.linspace(-5.0, 5.0, 10_000))) >= -1e-12

    samples = return_map_grid(CLASSICAL, np.linspace(0.1, 5.0, 20), max_workers=4)
    assert all(s.delta is not None and s.delta > 0 for s in samples)
    assert sign_changes(samples) == []


def test_no_cycle_nonexistence_corroborated():
    assert check_nonexistence(NO_CYCLE).overall == Applicability.APPLIES

    ys = np.arange(1, 11) * 0.5
    samples = return_map_grid(NO_CYCLE, ys, max_workers=4)
    returned = [s for s in samples if s.delta is not None]
    # energies below sup G~ (about 0.59) are trapped, so these always come back
    assert {0.5, 1.0} <= {s.y0 for s in returned}
    assert all(s.delta < -1e-4 for s in returned)
    assert sign_changes(samples) == []


def test_hopf_scan_amplitudes_grow_with_b():
    b_values = [0.0, 0.01, 0.03, 0.05]
    rows = hopf_scan(HOPF, b_values, a=1, max_workers=4)
    assert [r.b for r in rows] == b_values
    assert all(r.error is None for r in rows)

    origin = rows[0]
    assert origin.verdict == "no-cycle"
    assert origin.inner_trend == "decreasing"

    cycles = rows[1:]
    assert all(r.verdict == "cycle" for r in cycles)
    amplitudes = [r.amplitude for r in cycles]
    assert amplitudes[0] < amplitudes[1] < amplitudes[2]
    assert all(r.multiplier < 1.0 for r in cycles)
    assert all(r.outer_termination.startswith("BlowUp") for r in rows)


def test_hopf_scan_larger_b_escapes_before_closing():
    # at a = 1 the branch reaches the edge of the continuable region before b = 0.1
    rows = hopf_scan(HOPF, [0.1, 0.2], a=1, max_workers=2)
    for r in rows:
        assert r.error is None
        assert r.verdict == "no-cycle"
        assert r.inner_trend == "increasing"
        assert r.escape_from is not None and 0.2 < r.escape_from < 1.0
        assert r.escape_termination


def main():
    tests = [
        test_exotic_cycle_theorem_and_location,
        test_massera_cubic_unique_attracting_star_shaped_cycle,
        test_classical_massera_has_no_cycle,
        test_no_cycle_nonexistence_corroborated,
        test_hopf_scan_amplitudes_grow_with_b,
        test_hopf_scan_larger_b_escapes_before_closing,
    ]

    for test_fn in tests:
        test_fn()
        print(f"[PASS] {test_fn.__name__}")

    print(f"All tests passed: {len(tests)}/{len(tests)}")


if __name__ == "__main__":
    main()
