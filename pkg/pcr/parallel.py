from typing import Callable, Iterable, List, TypeVar

from joblib import Parallel, delayed

from pcr.config import resolve_threads

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], n_jobs: "int | None" = None) -> List[R]:
    """
    Map ``fn`` over ``items`` preserving order.

    Every unit of work owns its random streams, so the output does not
    depend on ``n_jobs``.
    """
    n_jobs = resolve_threads(n_jobs)
    items = list(items)
    if n_jobs == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    return Parallel(n_jobs=n_jobs)(delayed(fn)(item) for item in items)


def chunked(n: int, n_chunks: int) -> List[range]:
    """Split ``range(n)`` into at most ``n_chunks`` contiguous ranges."""
    n_chunks = max(1, min(n_chunks, n))
    bounds = [round(i * n / n_chunks) for i in range(n_chunks + 1)]
    return [range(bounds[i], bounds[i + 1]) for i in range(n_chunks) if bounds[i] < bounds[i + 1]]
