"""Deterministic least-prime scans over an arithmetic progression 1 mod M."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Collection, Iterator, List, Optional, Sequence

from .arith import is_prime
from .errors import SearchLimitExceeded

logger = logging.getLogger(__name__)

CHUNK_SIZE = 512


def _candidates(modulus: int, after: int, limit: int) -> Iterator[int]:
    k = max(after // modulus, 0)
    while True:
        q = 1 + k * modulus
        if q > limit:
            return
        if q > after:
            yield q
        k += 1


def _chunks(modulus: int, after: int, limit: int, avoid: Collection[int]) -> Iterator[List[int]]:
    chunk: List[int] = []
    for q in _candidates(modulus, after, limit):
        if q in avoid or not is_prime(q):
            continue
        chunk.append(q)
        if len(chunk) == CHUNK_SIZE:
            yield chunk
            chunk = []
    if chunk:
        yield chunk


def least_prime(
    modulus: int,
    predicate: Optional[Callable[[int], bool]] = None,
    *,
    limit: int,
    after: int = 1,
    avoid: Collection[int] = (),
    jobs: int = 1,
    conditions: Sequence[str] = (),
) -> int:
    """Least prime q > after with q = 1 mod modulus, q not in avoid and predicate(q).

    Candidates are tested in chunks; with jobs > 1 a chunk is fanned out to a thread pool
    and the first passing candidate in scan order is returned, so the answer does not
    depend on the worker count.

    The workers are threads and share the interpreter lock: pure-Python predicates run one
    at a time, so `jobs` is a worker count, not a speedup. Predicates may be closures,
    which rules out a process pool.
    """
    if modulus < 1:
        raise ValueError(f"modulus must be positive, got {modulus}")
    avoid = set(avoid)
    test = predicate or (lambda q: True)

    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for chunk in _chunks(modulus, after, limit, avoid):
            verdicts = list(pool.map(test, chunk)) if pool else [test(q) for q in chunk]
            for q, ok in zip(chunk, verdicts):
                if ok:
                    logger.debug(f"Least prime 1 mod {modulus} above {after}: {q}")
                    return q
    finally:
        if pool:
            pool.shutdown(wait=True)

    described = [f"q = 1 mod {modulus}", *conditions]
    raise SearchLimitExceeded(limit, described)
