"""Order-preserving process-pool map used by the matrix and vector builders.

Results come back in task order whatever the schedule, so callers that
write each result into a fixed slot stay deterministic for any ``jobs``.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

_shared = None


def default_jobs() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def _init(shared):
    global _shared
    _shared = shared


def _call(args):
    fn, task = args
    return fn(_shared, task)


def parallel_map(fn, tasks, shared=None, jobs=1):
    """Return ``[fn(shared, t) for t in tasks]``, optionally on ``jobs`` processes.

    ``fn`` must be a module-level function. ``shared`` is shipped to each
    worker once, not per task.
    """
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(shared, t) for t in tasks]
    workers = min(jobs, len(tasks))
    chunksize = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers, initializer=_init, initargs=(shared,)) as pool:
        return list(pool.map(_call, [(fn, t) for t in tasks], chunksize=chunksize))
