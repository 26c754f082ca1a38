import asyncio
import logging
import math
from typing import Any, Callable, Dict, Iterable, List, Sequence, Union

logger = logging.getLogger(__name__)


async def _gather_limited(func: Callable, items: Sequence, workers: int) -> List:
    semaphore = asyncio.Semaphore(workers)

    async def run_one(item):
        async with semaphore:
            return await asyncio.to_thread(func, item)

    # gather giữ nguyên thứ tự đầu vào
    return await asyncio.gather(*(run_one(item) for item in items))


def gather_in_threads(func: Callable[[Any], Any], items: Iterable, workers: int = 1) -> List:
    """Map ``func`` over ``items``, optionally on a bounded thread pool.

    Results come back in input order whatever the worker count.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug(f'Sweeping {len(items)} points on {workers} threads')
    return asyncio.run(_gather_limited(func, items, workers))


def expand_grid(grid: Union[Sequence[float], Dict[str, float]]) -> List[float]:
    """A list as-is, or an inclusive ``{start, stop, step}`` range"""
    if isinstance(grid, dict):
        start, stop, step = float(grid['start']), float(grid['stop']), float(grid['step'])
        if step <= 0 or stop < start:
            raise ValueError(f'invalid grid {grid}: need step > 0 and stop >= start')
        n = int(math.floor((stop - start) / step + 1e-9))
        return [round(start + i * step, 12) for i in range(n + 1)]
    return [float(v) for v in grid]


def derive_seed(seed: int, index: int) -> int:
    """Per-user / per-sweep seed from the run seed"""
    return int(seed) ^ int(index)
