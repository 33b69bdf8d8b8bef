"""Standard Bloom filter over a packed bit array."""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .hashing import Key, hash_pair, hash_pairs, index_matrix, index_sequence

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)

BLOOM_MAGIC = b"BLMF"
BLOOM_VERSION = 1
_HEADER = struct.Struct("<4sBQIQQ")  # magic, version, m_bits, k, seed, n_inserted


class BitArray:
    """Fixed-length bit vector; bit ``i`` lives in byte ``i >> 3`` at position ``i & 7``."""

    def __init__(self, length: int, data: bytes | None = None) -> None:
        if length < 0:
            raise ValueError("length must be nonnegative")
        self.length = length
        nbytes = (length + 7) // 8
        if data is None:
            self._bytes = np.zeros(nbytes, dtype=np.uint8)
        else:
            if len(data) != nbytes:
                raise ValueError(f"expected {nbytes} bytes, got {len(data)}")
            self._bytes = np.frombuffer(bytes(data), dtype=np.uint8).copy()

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> bool:
        return bool(self._bytes[i >> 3] >> (i & 7) & 1)

    def set(self, i: int) -> None:
        self._bytes[i >> 3] |= np.uint8(1 << (i & 7))

    def set_many(self, idx: np.ndarray) -> None:
        idx = np.asarray(idx, dtype=np.int64).ravel()
        masks = np.left_shift(1, idx & 7).astype(np.uint8)
        np.bitwise_or.at(self._bytes, idx >> 3, masks)

    def test_many(self, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        return ((self._bytes[idx >> 3] >> (idx & 7).astype(np.uint8)) & 1).astype(bool)

    def count(self) -> int:
        return int(_POPCOUNT[self._bytes].sum())

    def to_bytes(self) -> bytes:
        return self._bytes.tobytes()

    def copy(self) -> "BitArray":
        return BitArray(self.length, self.to_bytes())

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BitArray)
            and self.length == other.length
            and np.array_equal(self._bytes, other._bytes)
        )


@dataclass(frozen=True)
class BloomParams:
    m_bits: int
    k: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m_bits < 1:
            raise ValueError(f"m_bits must be >= 1, got {self.m_bits}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


def analytic_fpp(k: int, bits_per_key: float) -> float:
    """Textbook approximation ``(1 - e^{-k n/m})^k``."""
    return (1.0 - math.exp(-k / bits_per_key)) ** k


def optimal_hash_count(bits_per_key: float) -> int:
    """Integer k minimizing the analytic FPP among floor/ceil of ``bits_per_key * ln 2``."""
    if not bits_per_key > 0:
        raise ValueError(f"bits_per_key must be positive, got {bits_per_key}")
    x = bits_per_key * math.log(2)
    lo = max(1, math.floor(x))
    hi = max(1, math.ceil(x))
    if analytic_fpp(hi, bits_per_key) < analytic_fpp(lo, bits_per_key):
        return hi
    return lo


class BloomFilter:
    """Bloom filter with ``k`` double-hashed probes into ``m_bits`` bits.

    Membership works with single keys (``key in bf``) or in bulk with
    :meth:`contains_many`, which is vectorized for integer numpy arrays.
    """

    def __init__(self, m_bits: int, k: int, seed: int = 0) -> None:
        self.params = BloomParams(m_bits, k, seed)
        self.bits = BitArray(m_bits)
        self.n_inserted = 0

    @classmethod
    def build(cls, keys: Iterable[Key] | np.ndarray, m_bits: int, k: int, seed: int = 0) -> "BloomFilter":
        bf = cls(m_bits, k, seed)
        bf.update(keys)
        return bf

    @classmethod
    def for_keys(cls, keys, bits_per_key: float, seed: int = 0) -> "BloomFilter":
        """Size the filter at ``floor(bits_per_key * n)`` bits with the optimal integer k."""
        n = len(keys)
        m_bits = max(1, int(math.floor(bits_per_key * n)))
        return cls.build(keys, m_bits, optimal_hash_count(bits_per_key), seed)

    @property
    def m_bits(self) -> int:
        return self.params.m_bits

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def seed(self) -> int:
        return self.params.seed

    def _indices(self, key: Key) -> list[int]:
        h1, h2 = hash_pair(key, self.seed)
        return index_sequence(h1, h2, self.k, self.m_bits)

    def add(self, key: Key) -> None:
        for i in self._indices(key):
            self.bits.set(i)
        self.n_inserted += 1

    def update(self, keys: Iterable[Key] | np.ndarray) -> None:
        h1, h2 = hash_pairs(keys, self.seed)
        if len(h1):
            self.bits.set_many(index_matrix(h1, h2, self.k, self.m_bits))
        self.n_inserted += len(h1)

    def __contains__(self, key: Key) -> bool:
        bits = self.bits
        return all(bits[i] for i in self._indices(key))

    contains = __contains__

    def contains_many(self, keys: Iterable[Key] | np.ndarray) -> np.ndarray:
        h1, h2 = hash_pairs(keys, self.seed)
        if not len(h1):
            return np.zeros(0, dtype=bool)
        return self.bits.test_many(index_matrix(h1, h2, self.k, self.m_bits)).all(axis=1)

    def fill_fraction(self) -> float:
        return self.bits.count() / self.m_bits

    def fpp(self) -> float:
        """Instance-exact false positive probability ``rho^k``."""
        return self.fill_fraction() ** self.k

    def size_bits(self) -> int:
        return self.m_bits

    def to_bytes(self) -> bytes:
        header = _HEADER.pack(BLOOM_MAGIC, BLOOM_VERSION, self.m_bits, self.k, self.seed, self.n_inserted)
        return header + self.bits.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "BloomFilter":
        bf, _ = cls._read(data, 0)
        return bf

    @classmethod
    def _read(cls, data: bytes, offset: int) -> tuple["BloomFilter", int]:
        magic, version, m_bits, k, seed, n = _HEADER.unpack_from(data, offset)
        if magic != BLOOM_MAGIC:
            raise ValueError("not a serialized Bloom filter")
        if version != BLOOM_VERSION:
            raise ValueError(f"unsupported Bloom filter version {version}")
        offset += _HEADER.size
        nbytes = (m_bits + 7) // 8
        bf = cls(m_bits, k, seed)
        bf.bits = BitArray(m_bits, data[offset:offset + nbytes])
        bf.n_inserted = n
        return bf, offset + nbytes

    def __repr__(self) -> str:
        return f"BloomFilter(m_bits={self.m_bits}, k={self.k}, n_inserted={self.n_inserted})"
