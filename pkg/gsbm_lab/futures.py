import logging
from concurrent.futures import ThreadPoolExecutor

from gsbm_lab import conf

logger = logging.getLogger(__name__)


def pmap(fn, items):
    """
    Map ``fn`` over ``items``, results in input order.

    Runs on a thread pool capped by the ``threads`` setting. Order of the
    returned list never depends on the thread count, so reductions over it
    are bit-stable.
    """
    items = list(items)
    workers = min(conf.get_threads(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]

    settings = conf.snapshot()

    def call(item):
        with conf.installed(settings):
            return fn(item)

    logger.debug('pmap %s over %d items on %d threads', getattr(fn, '__name__', fn), len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(call, items))

