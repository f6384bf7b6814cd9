"""Order-preserving parallel map capped by ``HARNACKLAB_THREADS``."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("HARNACKLAB_THREADS", "1")))
    except ValueError:
        return 1


def pmap(func, items) -> list:
    """``[func(i) for i in items]``, threaded when more than one thread is allowed.

    Results come back in input order, so output never depends on scheduling.
    """
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [func(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
