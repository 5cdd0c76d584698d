"""Set of utils functions and classes."""

import logging
import math
import os
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Any, Callable, Iterable, List, TypeVar

import numpy as np
from dotenv import load_dotenv, find_dotenv

logger = logging.getLogger(__name__)

load_dotenv(find_dotenv())

LOGGER_FORMAT = "%(asctime)s [%(levelname)8s] [%(name)10s]: %(message)s"

T = TypeVar("T")
R = TypeVar("R")

_pool_worker = threading.local()


class XlabError(Exception):
    """Generic xlab exception."""

    pass


def setup_logging(log_file: str = None, console_level: int = logging.ERROR) -> logging.Handler:
    """
    Configure the root logger with a file handler and a console handler.

    The file receives everything from INFO up, the console (stderr) only `console_level` and above.

    :param log_file: Path to the log file. If None, `XLAB_LOG` env variable or `xlab.log` is used
    :param console_level: Level of the console handler
    :return: console handler, so the caller can change its level
    """
    log_file = log_file or os.environ.get("XLAB_LOG", "xlab.log")
    file_handler = logging.FileHandler(log_file, encoding="utf-8")
    console_handler = logging.StreamHandler(sys.stderr)
    logging.basicConfig(format=LOGGER_FORMAT, level=logging.INFO, handlers=[file_handler, console_handler], force=True)
    console_handler.setLevel(console_level)
    return console_handler


def thread_count() -> int:
    """
    Return the number of worker threads allowed.

    `XLAB_THREADS` env variable caps the parallelism, hardware concurrency is the default.

    :return: number of threads, at least 1
    """
    value = os.environ.get("XLAB_THREADS", "")
    try:
        threads = int(value) if value.strip() else (os.cpu_count() or 1)
    except ValueError:
        logger.warning(f"XLAB_THREADS={value!r} is not an integer, hardware concurrency used")
        threads = os.cpu_count() or 1
    return max(1, threads)


def ordered_map(func: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """
    Apply func to every item using a thread pool and return the results in input order.

    Callers reduce the returned list in index order, so the outcome does not depend on the thread count.
    Only one pool level runs at a time: a call made from inside a pool worker runs serially in that worker.

    :param func: function of one argument
    :param items: arguments
    :return: list of results, same order as items
    """
    items = list(items)
    threads = 1 if getattr(_pool_worker, "active", False) else min(thread_count(), len(items))
    if threads <= 1:
        return [func(item) for item in items]

    def call(item: T) -> R:
        _pool_worker.active = True
        try:
            return func(item)
        finally:
            _pool_worker.active = False

    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(call, items))


def log_grid(lo: float, hi: float, points: int) -> np.ndarray:
    """
    Log-spaced grid with both ends included.

    :param lo: first point, > 0
    :param hi: last point, > lo
    :param points: number of points, >= 2
    :return: strictly increasing array
    """
    if not (0 < lo < hi) or points < 2:
        raise ValueError(f"invalid log grid: lo={lo}, hi={hi}, points={points}")
    return np.geomspace(lo, hi, points)


def decade_grid(lo: float, hi: float, per_decade: int) -> np.ndarray:
    """
    Log-spaced grid with at least `per_decade` points per decade.

    :param lo: first point, > 0
    :param hi: last point, > lo
    :param per_decade: points per decade
    :return: strictly increasing array
    """
    decades = math.log10(hi / lo)
    return log_grid(lo, hi, max(2, int(math.ceil(decades * per_decade)) + 1))


@lru_cache(maxsize=1024)
def str_shortening(data: Any, limit=256) -> str:
    """
    Return a short version of data truncated if data length > limits.

    :param data:
    :param limit:
    :return:
    """
    data = str(data).replace("\n", "\\n")
    if len(data) > limit:
        return (
            data[0 : int(limit / 2)]
            + f"... ({len(data) - limit} truncated) ..."
            + data[len(data) - int(limit / 2) :]
        )
    return data
