from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

from app.config.config import settings
from app.config.logging import logger

T = TypeVar("T")
R = TypeVar("R")


def run_ordered(
    fn: Callable[[T], R], items: Iterable[T], jobs: int | None = None
) -> list[R]:
    """
    Map ``fn`` over ``items`` and return results in item order.

    ``fn`` must be picklable (module-level function or functools.partial of
    one) when more than one job is requested.
    """
    items = list(items)
    jobs = settings.DEFAULT_JOBS if jobs is None else jobs
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    logger.debug("fan_out_started", jobs=jobs, items=len(items))
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(fn, items))
