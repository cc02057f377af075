# Authors: selfnormlab contributors
#
# License: 3-clause BSD
"""
Reproducible random streams.

All randomness in the package flows from a single integer seed through a tree of streams. A stream is identified by
its path of integer keys, for example `(2, 17)` for "experiment block 2, replicate chunk 17". The pair
`(seed, streams)` fully determines the draws, whatever the order in which streams are consumed.
"""
from concurrent.futures import ThreadPoolExecutor

try:  # python 3.5+
    from typing import Callable, Optional, Sequence, Tuple
except ImportError:
    pass

import numpy as np
from valid8 import validate


DEFAULT_CHUNK_SIZE = 1000
"""Default number of replicates drawn per stream in `replicate`"""


class RandomSource:
    """
    A splittable source of randomness based on a counter-based generator (`numpy.random.Philox`).

    >>> a = RandomSource(12).split(3)
    >>> b = RandomSource(12).split(3)
    >>> bool(a.generator.random() == b.generator.random())
    True
    """
    __slots__ = ('seed', 'streams', '_generator')

    def __init__(self,
                 seed,       # type: int
                 streams=()  # type: Sequence[int]
                 ):
        """

        :param seed: the top-level non-negative integer seed
        :param streams: the path of stream keys below the seed
        """
        validate('seed', seed, instance_of=int, min_value=0)
        self.seed = seed
        self.streams = tuple(int(s) for s in streams)
        self._generator = None

    def __repr__(self):
        return "RandomSource(seed=%r, streams=%r)" % (self.seed, self.streams)

    def split(self,
              stream  # type: int
              ):
        # type: (...) -> RandomSource
        """
        Returns the child source for stream `stream`. Splitting never consumes draws from this source.

        :param stream: a non-negative stream key
        :return:
        """
        validate('stream', stream, min_value=0)
        return RandomSource(self.seed, self.streams + (stream,))

    @property
    def generator(self):
        # type: (...) -> np.random.Generator
        """The numpy generator of this stream, created on first use"""
        if self._generator is None:
            seq = np.random.SeedSequence(self.seed, spawn_key=self.streams)
            self._generator = np.random.Generator(np.random.Philox(seq))
        return self._generator

    @property
    def provenance(self):
        # type: (...) -> Tuple[int, Tuple[int, ...]]
        return self.seed, self.streams


def as_random_source(rng  # type: object
                     ):
    # type: (...) -> RandomSource
    """
    Converts an int seed into a `RandomSource`; returns `RandomSource` instances unchanged.

    :param rng:
    :return:
    """
    if isinstance(rng, RandomSource):
        return rng
    return RandomSource(rng)


def replicate(draw,                           # type: Callable[[int, RandomSource], np.ndarray]
              M,                              # type: int
              rng,                            # type: RandomSource
              chunk_size=DEFAULT_CHUNK_SIZE,  # type: int
              jobs=1,                         # type: Optional[int]
              ):
    # type: (...) -> np.ndarray
    """
    Draws `M` replicates of a statistic with `draw(count, rng)`, in chunks of `chunk_size` replicates. Chunk `k` always
    uses stream `rng.split(k)` so the concatenated result (first axis = replicates) does not depend on `jobs`.

    :param draw: a function returning an array of `count` replicates along its first axis
    :param M: total number of replicates
    :param rng: the parent source
    :param chunk_size: replicates per chunk
    :param jobs: number of worker threads. `None` lets the executor decide.
    :return:
    """
    validate('M', M, min_value=1)
    validate('chunk_size', chunk_size, min_value=1)

    counts = [min(chunk_size, M - start) for start in range(0, M, chunk_size)]

    def _run(k):
        return np.asarray(draw(counts[k], rng.split(k)))

    if jobs == 1 or len(counts) == 1:
        parts = [_run(k) for k in range(len(counts))]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run, range(len(counts))))

    return np.concatenate(parts, axis=0)
