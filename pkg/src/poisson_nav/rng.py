"""Reproducible random streams for path simulation.

One logical stream per (seed, path_index) pair, backed by the counter-based
Philox generator.  Streams for different path indices are statistically
independent and a given pair reproduces its draws bit-exactly no matter in
which order paths are executed or how work is split across workers.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 4096


def stream(seed: int, path_index: int = 0) -> np.random.Generator:
    """Return the generator for one path of one experiment."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(path_index,))
    return np.random.Generator(np.random.Philox(ss))


class DrawBuffer:
    """Block-buffered scalar draws from a Generator.

    Pulling variates one at a time through the numpy call layer is slow;
    the samplers instead consume floats from prefetched blocks.  The
    consumption order is deterministic, so paths stay bit-reproducible.
    """

    __slots__ = ("gen", "_exp", "_ie", "_uni", "_iu")

    def __init__(self, gen: np.random.Generator):
        self.gen = gen
        self._exp = ()
        self._ie = 0
        self._uni = ()
        self._iu = 0

    def exp(self) -> float:
        """Next Exp(1) variate."""
        i = self._ie
        if i == len(self._exp):
            self._exp = self.gen.standard_exponential(_BLOCK).tolist()
            i = 0
        self._ie = i + 1
        return self._exp[i]

    def unif(self) -> float:
        """Next Uniform[0,1) variate."""
        i = self._iu
        if i == len(self._uni):
            self._uni = self.gen.random(_BLOCK).tolist()
            i = 0
        self._iu = i + 1
        return self._uni[i]


def as_buffer(rng) -> DrawBuffer:
    """Wrap a Generator in a DrawBuffer; pass DrawBuffers through."""
    if isinstance(rng, DrawBuffer):
        return rng
    return DrawBuffer(rng)
