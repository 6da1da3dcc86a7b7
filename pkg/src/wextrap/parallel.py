"""Worker-thread helper.

All heavy loops in this package are pure and write disjoint output slices,
so threading never changes results; WEXTRAP_THREADS only caps how many
workers run them.  The default of 1 keeps everything sequential.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("WEXTRAP_THREADS", "1")))
    except ValueError:
        return 1


def run_chunks(worker: Callable[[int, int], None], total: int) -> None:
    """Invoke worker(start, stop) over a partition of range(total).

    With a cap of 1 the single call worker(0, total) runs inline; otherwise
    the partition is handed to a thread pool.  Workers must only write to
    disjoint regions determined by their range.
    """
    cap = thread_cap()
    if cap <= 1 or total <= 1:
        worker(0, total)
        return
    step = (total + cap - 1) // cap
    bounds = [(s, min(s + step, total)) for s in range(0, total, step)]
    with ThreadPoolExecutor(max_workers=cap) as pool:
        list(pool.map(lambda se: worker(*se), bounds))
