import os
import warnings
from contextlib import contextmanager

import numba

THREADS_ENV = "DYNLEIDEN_THREADS"

# the system TBB is often too old for numba; go straight to OpenMP unless
# the user picked a layer explicitly
if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ and "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


def resolve_threads(threads: int | None) -> int:
    """Thread count to use: explicit value, else $DYNLEIDEN_THREADS, else 1.

    Clamped to numba's pool size (``NUMBA_NUM_THREADS``, fixed at import).
    """
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1"))
    threads = max(1, int(threads))
    limit = numba.config.NUMBA_NUM_THREADS
    if threads > limit:
        warnings.warn(
            f"requested {threads} threads but numba's pool holds {limit}; "
            "set NUMBA_NUM_THREADS before import to raise it",
            RuntimeWarning,
            stacklevel=3,
        )
        threads = limit
    return threads


@contextmanager
def parallel_scope(threads: int, chunk: int):
    numba.set_num_threads(threads)
    with numba.parallel_chunksize(max(1, int(chunk))):
        yield
