"""Seedable 128-bit key hashing and double-hashed index sequences.

Keys are opaque byte strings. Integers are encoded as 8-byte little-endian
words (two's complement for negatives), so an integer key and its encoded
bytes hash identically. Integer arrays take a vectorized numpy path that
computes the same function as the scalar path.
"""
from __future__ import annotations

from typing import Iterable, Union

import numpy as np

Key = Union[int, bytes]

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_ALT = 0x632BE59BD9B4E019
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def encode_key(key: Key) -> bytes:
    if isinstance(key, (bytes, bytearray, memoryview)):
        return bytes(key)
    if isinstance(key, (int, np.integer)):
        return (int(key) & MASK64).to_bytes(8, "little")
    raise TypeError(f"unsupported key type {type(key).__name__}")


def _mix(z: int) -> int:
    # splitmix64 finalizer
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def hash_pair(key: Key, seed: int = 0) -> tuple[int, int]:
    """Return ``(h1, h2)``, two 64-bit hashes of ``key``; ``h2`` is always odd."""
    data = encode_key(key)
    seed &= MASK64
    a = _mix(seed ^ _GOLDEN)
    b = _mix((seed + _ALT) & MASK64)
    n = len(data)
    if n % 8:
        data = data + b"\x00" * (8 - n % 8)
    for i in range(0, len(data), 8):
        w = int.from_bytes(data[i:i + 8], "little")
        a = _mix(a ^ w)
        b = _mix((b + w) & MASK64)
    a = _mix(a ^ n)
    b = _mix(b ^ ((n * _GOLDEN) & MASK64))
    return a, _mix(a ^ b) | 1


def _int_array(keys) -> np.ndarray | None:
    if isinstance(keys, np.ndarray):
        if keys.dtype.kind in "iu":
            return keys.astype(np.uint64, copy=False)
        return None
    return None


def hash_pairs(keys: Iterable[Key] | np.ndarray, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`hash_pair` over many keys; returns two uint64 arrays."""
    words = _int_array(keys)
    if words is None:
        pairs = [hash_pair(k, seed) for k in keys]
        if not pairs:
            empty = np.zeros(0, dtype=np.uint64)
            return empty, empty.copy()
        arr = np.array(pairs, dtype=np.uint64)
        return arr[:, 0].copy(), arr[:, 1].copy()
    seed &= MASK64
    a0 = _mix(seed ^ _GOLDEN)
    b0 = _mix((seed + _ALT) & MASK64)
    a = _mix_array(np.uint64(a0) ^ words)
    b = _mix_array(np.uint64(b0) + words)
    a = _mix_array(a ^ np.uint64(8))
    b = _mix_array(b ^ np.uint64((8 * _GOLDEN) & MASK64))
    return a, _mix_array(a ^ b) | np.uint64(1)


def index_sequence(h1: int, h2: int, k: int, m: int) -> list[int]:
    """Indices ``(h1 + i*h2) mod m`` for ``i = 0..k-1``."""
    if m < 1:
        raise ValueError("table size m must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    a, b = h1 % m, h2 % m
    return [(a + i * b) % m for i in range(k)]


def index_matrix(h1: np.ndarray, h2: np.ndarray, k: int, m: int) -> np.ndarray:
    """Row-wise :func:`index_sequence`; shape ``(len(h1), k)``, dtype int64."""
    if m < 1:
        raise ValueError("table size m must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    mm = np.uint64(m)
    a = h1 % mm
    b = h2 % mm
    out = np.empty((len(h1), k), dtype=np.uint64)
    out[:, 0] = a
    for i in range(1, k):
        a = (a + b) % mm
        out[:, i] = a
    return out.astype(np.int64)


def derive_seed(seed: int, *tags: int) -> int:
    """Deterministically derive an independent-looking 64-bit seed."""
    z = _mix((seed & MASK64) ^ _GOLDEN)
    for t in tags:
        z = _mix((z + _GOLDEN + (t & MASK64)) & MASK64)
    return z


def as_key_array(keys):
    """Return ``keys`` as an int64 array when they are all integers, else as a list."""
    if isinstance(keys, np.ndarray):
        return keys
    keys = list(keys)
    if keys and all(isinstance(k, (int, np.integer)) and not isinstance(k, bool) for k in keys):
        try:
            return np.array(keys, dtype=np.int64)
        except OverflowError:
            return np.array([int(k) & MASK64 for k in keys], dtype=np.uint64)
    return keys


def mixed_index(h1: int, h2: int, j: int, m: int) -> int:
    """Index ``j`` drawn by remixing ``h1 + j*h2``; no shared structure across ``j``."""
    return _mix((h1 + j * h2) & MASK64) % m


def mixed_index_matrix(h1: np.ndarray, h2: np.ndarray, k: int, m: int) -> np.ndarray:
    """Vectorized :func:`mixed_index` for ``j = 0..k-1``; shape ``(len(h1), k)``."""
    out = np.empty((len(h1), k), dtype=np.int64)
    for j in range(k):
        out[:, j] = (_mix_array(h1 + np.uint64(j) * h2) % np.uint64(m)).astype(np.int64)
    return out
