import concurrent.futures

from szt.typing import (
    Callable,
    List,
    Tuple,
    TypeVar,
)

T = TypeVar('T')

DEFAULT_CHUNK_SIZE = 4096
"""
Default number of work items per chunk.

The chunk size, not the thread count, determines how work is split, so that results do not depend on the number of
threads.
"""


def chunk_bounds(count: int, chunk_size: int = DEFAULT_CHUNK_SIZE) -> List[Tuple[int, int]]:
    """
    Split ``range(count)`` into consecutive ``(start, stop)`` pairs of at most `chunk_size` items.
    """
    assert chunk_size >= 1, 'Chunk size must be positive'
    return [(start, min(start + chunk_size, count)) for start in range(0, count, chunk_size)]


def map_chunks(
        func: Callable[[int, int, int], T],
        count: int,
        chunk_size: int = DEFAULT_CHUNK_SIZE,
        threads: int = 1,
    ) -> List[T]:
    """
    Evaluate ``func(chunk_index, start, stop)`` for each chunk of ``range(count)``.

    The chunks are evaluated by a pool of `threads` workers (or serially, if `threads` is 1 or less), and the results
    are returned in chunk order. As long as `func` derives its randomness from the chunk index, and the results are
    reduced in the returned order, the outcome is identical for all thread counts.

    .. runblock:: pycon

        >>> from szt.parallel import map_chunks
        >>> map_chunks(lambda idx, start, stop: sum(range(start, stop)), 10, chunk_size = 4, threads = 2)
    """
    bounds = chunk_bounds(count, chunk_size)
    if threads <= 1 or len(bounds) <= 1:
        return [func(idx, start, stop) for idx, (start, stop) in enumerate(bounds)]
    with concurrent.futures.ThreadPoolExecutor(max_workers = threads) as executor:
        futures = [executor.submit(func, idx, start, stop) for idx, (start, stop) in enumerate(bounds)]
        return [future.result() for future in futures]
