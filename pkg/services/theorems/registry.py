from __future__ import annotations

import logging
from typing import Callable, Dict, List, Sequence

from dto.theorem_dto import Applicability, ConditionResult, TheoremReport
from services.system.equation import EquationSpec
from services.theorems.common import TheoremInputError
from services.theorems.existence_general import check_existence_general
from services.theorems.existence_poly import check_existence_poly_spec
from services.theorems.massera import check_massera
from services.theorems.nonexistence import check_nonexistence
from utils.thread_pool import parallel_map

logger = logging.getLogger(__name__)

CHECKERS: Dict[str, Callable[[EquationSpec], TheoremReport]] = {
    "t1": check_nonexistence,
    "t2": check_existence_general,
    "t3": check_existence_poly_spec,
    "t4": check_massera,
}

# exit code of several reports: the most favourable verdict wins
_PREFERENCE = [Applicability.APPLIES, Applicability.INDETERMINATE, Applicability.DOES_NOT_APPLY]


def run_checks(
    spec: EquationSpec,
    selectors: Sequence[str],
    *,
    strict: bool = False,
    max_workers: int = 1,
) -> List[TheoremReport]:
    """
    Reports in selector order. A checker rejecting the equation's shape raises
    TheoremInputError when `strict`, otherwise yields a DoesNotApply report.
    """
    unknown = [s for s in selectors if s not in CHECKERS]
    if unknown:
        raise ValueError(f"unknown theorem selector(s) {unknown}")

    def run(selector: str) -> TheoremReport:
        try:
            return CHECKERS[selector](spec)
        except TheoremInputError as e:
            if strict:
                raise
            logger.info("%s skipped: %s", selector, e)
            return TheoremReport.from_conditions(selector.upper(), [ConditionResult.fails("form", str(e))])

    return parallel_map(list(selectors), run_item=run, max_workers=max_workers)


def combined_exit_code(reports: Sequence[TheoremReport]) -> int:
    if not reports:
        raise ValueError("no reports")
    best = min(reports, key=lambda r: _PREFERENCE.index(r.overall))
    return best.exit_code
