import sys
import time
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from config import settings
from utils.thread_pool import parallel_map, resolve_pool_size


def test_results_keep_input_order():
    items = [5, 1, 4, 2, 3]

    def slow_square(v: int) -> int:
        # later items finish first
        time.sleep(0.01 * v)
        return v * v

    for workers in (1, 2, 5):
        assert parallel_map(items, run_item=slow_square, max_workers=workers, label="squares") == [25, 1, 16, 4, 9]


def test_on_error_tags_failures_in_place():
    def run(v: int) -> str:
        if v % 2:
            raise ValueError(f"odd {v}")
        return f"ok {v}"

    def failed(index: int, item: int, e: Exception) -> str:
        return f"failed {index}: {e}"

    out = parallel_map([0, 1, 2, 3], run_item=run, max_workers=3, on_error=failed)
    assert out == ["ok 0", "failed 1: odd 1", "ok 2", "failed 3: odd 3"]


def test_without_on_error_exception_propagates():
    def run(v: int) -> int:
        if v == 2:
            raise RuntimeError("boom")
        return v

    try:
        parallel_map([1, 2, 3], run_item=run, max_workers=2)
    except RuntimeError as e:
        assert "boom" in str(e)
    else:
        raise AssertionError("exception swallowed")


def test_pool_size():
    assert parallel_map([], run_item=lambda v: v) == []
    assert resolve_pool_size(max_workers=8, task_count=3) == 3
    assert resolve_pool_size(max_workers=0, task_count=3) == 1
    assert resolve_pool_size(max_workers=None, task_count=100) == settings.threads
    assert resolve_pool_size(max_workers=4, task_count=0) == 0


def main():
    tests = [
        test_results_keep_input_order,
        test_on_error_tags_failures_in_place,
        test_without_on_error_exception_propagates,
        test_pool_size,
    ]

    for test_fn in tests:
        test_fn()
        print(f"[PASS] {test_fn.__name__}")

    print(f"All tests passed: {len(tests)}/{len(tests)}")


if __name__ == "__main__":
    main()
