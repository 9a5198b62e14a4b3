"""Order-preserving thread parallelism.

Work items are evaluated concurrently but results always come back in input
order, so any reduction done by the caller is independent of the thread count.
"""

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "BLOCKSPEC_THREADS"


def thread_count():
    raw = os.environ.get(ENV_THREADS)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


def ordered_map(fn, items, threads=None):
    items = list(items)
    n = thread_count() if threads is None else max(1, int(threads))
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
