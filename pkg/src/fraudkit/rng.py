"""Deterministic seed derivation.

One global seed reproduces an entire run: every stage (split, sampler,
model init, dropout, ...) derives its own seed from the global seed and
a stage label via FNV-1a hashing followed by a splitmix64 finalizer.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x):
    """One output of the splitmix64 generator seeded at x."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _fnv1a64(text):
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def derive_seed(seed, label):
    """Derive a stage seed from a global seed and a stage label."""
    return splitmix64((int(seed) & _MASK64) ^ _fnv1a64(label))


def generator(seed):
    """numpy Generator for a (possibly derived) 64-bit seed."""
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))
