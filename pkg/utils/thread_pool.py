from __future__ import annotations

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Optional, Sequence, TypeVar, cast

from config import settings

logger = logging.getLogger(__name__)

TItem = TypeVar("TItem")
TOut = TypeVar("TOut")


def resolve_pool_size(*, max_workers: Optional[int], task_count: int) -> int:
    if task_count <= 0:
        return 0
    workers = settings.threads if max_workers is None else max_workers
    return min(task_count, max(1, int(workers)))


def parallel_map(
    items: Sequence[TItem],
    *,
    run_item: Callable[[TItem], TOut],
    max_workers: Optional[int] = None,
    on_error: Optional[Callable[[int, TItem, Exception], TOut]] = None,
    label: str = "",
) -> List[TOut]:
    """
    Apply `run_item` to every item on a thread pool; results come back in input
    order whatever the completion order, so scans stay deterministic.

    `on_error(index, item, exc)` turns a per-item exception into a result (a
    tagged row); without it the first exception propagates. With a `label`,
    progress is logged (per item at DEBUG, a summary at INFO).
    """
    count = len(items)
    if count == 0:
        return []

    pool_size = resolve_pool_size(max_workers=max_workers, task_count=count)
    results: List[Optional[TOut]] = [None] * count
    failures = 0
    failures_lock = threading.Lock()
    t0 = time.perf_counter()

    def _run(index: int, item: TItem) -> TOut:
        nonlocal failures
        try:
            return run_item(item)
        except Exception as e:
            if on_error is None:
                raise
            with failures_lock:
                failures += 1
            return on_error(index, item, e)

    def _done(index: int, finished: int) -> None:
        if label:
            logger.debug("%s: item %d done (%d/%d)", label, index, finished, count)

    if pool_size <= 1:
        for index, item in enumerate(items):
            results[index] = _run(index, item)
            _done(index, index + 1)
    else:
        with ThreadPoolExecutor(max_workers=pool_size) as ex:
            futures = {ex.submit(_run, index, item): index for index, item in enumerate(items)}
            for finished, fut in enumerate(as_completed(futures), start=1):
                index = futures[fut]
                results[index] = fut.result()
                _done(index, finished)

    if label:
        logger.info(
            "%s: %d item(s) on %d worker(s) in %.2fs, %d tagged failure(s)",
            label, count, pool_size, time.perf_counter() - t0, failures,
        )
    return cast(List[TOut], results)
