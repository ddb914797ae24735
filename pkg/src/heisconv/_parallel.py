"""Order-preserving parallel map used by sweeps and grid operators."""

from concurrent.futures import ThreadPoolExecutor


def pool_map(func, items, workers=1):
    """``list(map(func, items))``, optionally on a thread pool.

    Results come back in input order, so reductions over them are
    independent of the worker count.
    """
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, items))


def make_pool_map(workers=1):
    return lambda func, items: pool_map(func, items, workers)
