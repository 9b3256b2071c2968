"""Counter-based random numbers keyed by (seed, trial, street, slot).

Every random quantity a simulation uses is a pure function of its key, so
results never depend on how trials are split across workers.  The mixer is
SplitMix64's finalizer applied in a chain: the street key absorbs the seed,
the trial index and the street index in turn, and each draw within a street
mixes in its slot number.
"""

import numpy as np
from numba import njit

GENERATOR_NAME = "splitmix64-chain/v1"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_S32 = np.uint64(32)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True)
def mix64(z):
    z = np.uint64(z) + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def street_key(seed, trial, street):
    h = mix64(np.uint64(seed))
    h = mix64(h ^ np.uint64(trial))
    return mix64(h ^ np.uint64(street))


@njit(cache=True, nogil=True)
def draw(key, slot):
    return mix64(key ^ (np.uint64(slot) * _M2))


@njit(cache=True, nogil=True)
def to_unit(h):
    """Uniform double in [0, 1) from the top 53 bits."""
    return np.float64(h >> _S11) * _INV53


@njit(cache=True, nogil=True)
def below(h, m):
    """Integer in [0, m) from the top 32 bits (multiply-shift, m < 2**32)."""
    return np.int64(((h >> _S32) * np.uint64(m)) >> _S32)


@njit(cache=True)
def _raw(seed, trial, street, count):
    key = street_key(seed, trial, street)
    out = np.empty(count, dtype=np.uint64)
    for s in range(count):
        out[s] = draw(key, s)
    return out


def raw_draws(seed: int, trial: int, street: int, count: int) -> np.ndarray:
    """The first ``count`` 64-bit draws of one street, as uint64."""
    return _raw(np.uint64(seed), np.uint64(trial), np.uint64(street), count)


def uniforms(seed: int, trial: int, street: int, count: int) -> np.ndarray:
    """The first ``count`` unit draws of one street; for inspection and tests."""
    return (raw_draws(seed, trial, street, count) >> np.uint64(11)).astype(np.float64) * _INV53
