"""Deterministic random substreams.

Every randomized step in an analysis draws from its own substream, keyed by
the global seed plus a path such as ``("importance", feature, k1, k2, round)``.
Keys are folded into a single 64-bit word with splitmix64, and the word seeds
an independent PCG64 generator.  Results are therefore identical regardless
of execution order, worker count, or which tests were pruned.
"""

import hashlib

import numpy as np

_MASK = (1 << 64) - 1


def _splitmix64(state: int, value: int) -> int:
    x = (state + 0x9E3779B97F4A7C15 + value) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def word(text: str) -> int:
    """Stable 64-bit word for a string path element."""
    return int.from_bytes(hashlib.blake2s(text.encode("utf-8")).digest()[:8], "little")


def stream_key(seed: int, *path) -> int:
    """Fold ``seed`` and path elements (ints or strings) into one 64-bit key."""
    state = seed & _MASK
    for element in path:
        if isinstance(element, str):
            element = word(element)
        elif not isinstance(element, (int, np.integer)):
            raise TypeError(f"substream path elements must be int or str, got {type(element)!r}")
        state = _splitmix64(state, int(element) & _MASK)
    return _splitmix64(state, 0)


def substream(seed: int, *path) -> np.random.Generator:
    """Independent generator for the substream identified by ``path``."""
    return np.random.Generator(np.random.PCG64(stream_key(seed, *path)))
