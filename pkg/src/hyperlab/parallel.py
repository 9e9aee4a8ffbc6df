"""Ordered fan-out over independent work items.

``HYPERLAB_THREADS`` caps the worker count (0 or unset means one worker per
CPU).  Results come back in input order, so reports do not depend on it.
"""

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ValidationError

ENV_VAR = "HYPERLAB_THREADS"


def thread_count(env=None):
    env = os.environ if env is None else env
    raw = env.get(ENV_VAR, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{ENV_VAR} must be a non-negative integer, got {raw!r}") from None
    if n < 0:
        raise ValidationError(f"{ENV_VAR} must be a non-negative integer, got {raw!r}")
    return n or (os.cpu_count() or 1)


def ordered_map(fn, items, workers=None):
    items = list(items)
    workers = thread_count() if workers is None else workers
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
