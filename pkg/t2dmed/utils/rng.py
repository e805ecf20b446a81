"""
Versioned pseudo-random number generator and seed derivation.

All stochastic consumers (splits, folds, bootstrap samples, network
initialization, batch shuffles, the cohort generator) draw from
XorShift64Star instances whose seeds come from derive_seed(), so a single
master seed fixes every output bit on every platform.
"""
import hashlib
from typing import List, TypeVar, Union

import numpy as np

T = TypeVar('T')

_MASK64 = (1 << 64) - 1

# xorshift64* (Marsaglia shifts 12/25/27, Vigna multiplier)
XORSHIFT_SHIFTS = (12, 25, 27)
XORSHIFT_MULTIPLIER = 0x2545F4914F6CDD1D

# splitmix64 constants used to expand seeds into non-zero states
SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
SPLITMIX_MUL1 = 0xBF58476D1CE4E5B9
SPLITMIX_MUL2 = 0x94D049BB133111EB


def splitmix64(value: int) -> int:
    """One splitmix64 step: returns the mixed 64-bit output for ``value``."""
    z = (value + SPLITMIX_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * SPLITMIX_MUL1) & _MASK64
    z = ((z ^ (z >> 27)) * SPLITMIX_MUL2) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, *path: Union[str, int]) -> int:
    """
    Derive a child seed from a master seed and a label path.

    The chain hashes ``"<master>/<label>/<label>..."`` with SHA-256 and takes
    the first eight bytes big-endian, e.g. ``derive_seed(7, 'tree', 3)``
    seeds tree 3 of a forest.

    Args:
        master_seed: Experiment-wide seed
        path: Consumer labels, outermost first

    Returns:
        64-bit unsigned child seed
    """
    key = '/'.join([str(int(master_seed))] + [str(p) for p in path])
    digest = hashlib.sha256(key.encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big')


class XorShift64Star:
    """64-bit xorshift* generator, version ``xorshift64star-v1``."""

    VERSION = 'xorshift64star-v1'

    def __init__(self, seed: int):
        state = splitmix64(int(seed) & _MASK64)
        # xorshift has a single absorbing state at zero
        self._state = state if state != 0 else SPLITMIX_GAMMA

    def next_u64(self) -> int:
        x = self._state
        a, b, c = XORSHIFT_SHIFTS
        x ^= x >> a
        x ^= (x << b) & _MASK64
        x ^= x >> c
        self._state = x
        return (x * XORSHIFT_MULTIPLIER) & _MASK64

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def randbelow(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow requires n > 0")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def bernoulli(self, p: float) -> bool:
        return self.random() < p

    def shuffle(self, items: List[T]) -> None:
        """Fisher-Yates shuffle in place, last position first."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> np.ndarray:
        order = list(range(n))
        self.shuffle(order)
        return np.asarray(order, dtype=np.int64)

    def uniform_array(self, low: float, high: float, shape) -> np.ndarray:
        """Row-major array of uniform draws."""
        size = int(np.prod(shape))
        values = np.fromiter((self.uniform(low, high) for _ in range(size)), dtype=np.float64, count=size)
        return values.reshape(shape)


def make_rng(master_seed: int, *path: Union[str, int]) -> XorShift64Star:
    """Generator for the consumer identified by ``path`` under ``master_seed``."""
    return XorShift64Star(derive_seed(master_seed, *path))
