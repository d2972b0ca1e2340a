"""Counter-based random numbers (Philox4x32-10).

Every draw is a pure function of ``(seed, sweep, index, purpose)``, so a run
can be replayed exactly and any single update can be recomputed in
isolation.  The block function follows the Random123 reference definition.
"""
from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "philox4x32",
    "uniform_pair",
    "CounterRNG",
    "PURPOSE_SPIN",
    "PURPOSE_SALT_Q",
    "PURPOSE_SALT_PLUS",
    "PURPOSE_SALT_MINUS",
    "PURPOSE_SWAP",
    "PURPOSE_SWAP_ACCEPT",
    "PURPOSE_INIT",
]

PURPOSE_SPIN = 0
PURPOSE_SALT_Q = 1
PURPOSE_SALT_PLUS = 2
PURPOSE_SALT_MINUS = 3
PURPOSE_SWAP = 4
PURPOSE_SWAP_ACCEPT = 5
PURPOSE_INIT = 7

_MASK = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_S32 = np.uint64(32)
_S5 = np.uint64(5)
_S6 = np.uint64(6)
_TWO26 = 67108864.0
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Ten Philox rounds on a 4x32-bit counter with a 2x32-bit key."""
    c0 = np.uint64(c0) & _MASK
    c1 = np.uint64(c1) & _MASK
    c2 = np.uint64(c2) & _MASK
    c3 = np.uint64(c3) & _MASK
    k0 = np.uint64(k0) & _MASK
    k1 = np.uint64(k1) & _MASK
    for r in range(10):
        if r > 0:
            k0 = (k0 + _W0) & _MASK
            k1 = (k1 + _W1) & _MASK
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> _S32
        lo0 = p0 & _MASK
        hi1 = p1 >> _S32
        lo1 = p1 & _MASK
        c0, c1, c2, c3 = (hi1 ^ c1 ^ k0) & _MASK, lo1, (hi0 ^ c3 ^ k1) & _MASK, lo0
    return c0, c1, c2, c3


@njit(cache=True)
def uniform_pair(seed, sweep, index, purpose):
    """Two doubles in ``(0, 1)`` with 53 random bits each."""
    s = np.uint64(seed)
    w = np.uint64(sweep)
    x0, x1, x2, x3 = philox4x32(np.uint64(index), w & _MASK, w >> _S32, np.uint64(purpose), s & _MASK, s >> _S32)
    u = ((x0 >> _S5) * _TWO26 + (x1 >> _S6) + 0.5) * _INV53
    v = ((x2 >> _S5) * _TWO26 + (x3 >> _S6) + 0.5) * _INV53
    return u, v


class CounterRNG:
    """Seeded handle on the Philox stream.

    The object carries no position; callers name the draw they want.
    """

    def __init__(self, seed: int):
        if not 0 <= int(seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        self.seed = int(seed)

    def uniform(self, sweep: int, index: int, purpose: int = 0) -> float:
        return uniform_pair(self.seed, sweep, index, purpose)[0]

    def uniforms(self, sweep: int, n: int, purpose: int = 0) -> np.ndarray:
        return np.array([uniform_pair(self.seed, sweep, i, purpose)[0] for i in range(n)])

    def __repr__(self) -> str:
        return f"CounterRNG(seed={self.seed})"
