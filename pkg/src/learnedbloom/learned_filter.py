"""Learned Bloom filters and sandwiched learned Bloom filters.

Both structures count how many keys they hand to the oracle
(``oracle_probes``) so that the sandwich short-circuit is observable.
"""
from __future__ import annotations

import math
import struct

import numpy as np

from .bloom import BloomFilter, optimal_hash_count
from .hashing import Key, derive_seed
from .oracle import ScoreOracle, read_oracle

INITIAL_SEED_TAG = 1
BACKUP_SEED_TAG = 2

_LBF_MAGIC = b"LBF1"
_SLBF_MAGIC = b"SLBF"
_HEADER = struct.Struct("<4sBdQB")  # magic, version, tau, seed, filter-presence flags
_VERSION = 1
# cap on k when a backup is created lazily for a single inserted key
_LAZY_K_CAP = 16


def _select(keys, mask: np.ndarray):
    if isinstance(keys, np.ndarray):
        return keys[mask]
    return [k for k, m in zip(keys, mask) if m]


def _build_backup(fn_keys, m_bits: int, seed: int) -> BloomFilter | None:
    n = len(fn_keys)
    if n == 0:
        return None
    if m_bits < 1:
        raise ValueError(f"{n} keys score below tau but the backup budget is 0 bits")
    return BloomFilter.build(fn_keys, m_bits, optimal_hash_count(m_bits / n), seed)


class LearnedBloomFilter:
    """Oracle plus threshold, with a backup Bloom filter for the sub-threshold keys."""

    def __init__(self, oracle: ScoreOracle, tau: float, backup: BloomFilter | None,
                 backup_bits: int = 0, seed: int = 0) -> None:
        self.oracle = oracle
        self.tau = float(tau)
        self.backup = backup
        self.backup_bits = backup.m_bits if backup is not None else backup_bits
        self.seed = seed
        self.oracle_probes = 0

    def _score(self, keys) -> np.ndarray:
        self.oracle_probes += len(keys)
        return self.oracle.scores(keys)

    def __contains__(self, key: Key) -> bool:
        return bool(self.contains_many([key])[0])

    def contains_many(self, keys) -> np.ndarray:
        res = self._score(keys) >= self.tau
        if self.backup is not None and not res.all():
            below = ~res
            res[below] = self.backup.contains_many(_select(keys, below))
        return res

    def insert(self, key: Key) -> None:
        if key in self:
            return
        if self.backup is None:
            if self.backup_bits < 1:
                raise ValueError("no backup budget to insert into")
            k = min(optimal_hash_count(self.backup_bits), _LAZY_K_CAP)
            self.backup = BloomFilter(self.backup_bits, k, derive_seed(self.seed, BACKUP_SEED_TAG))
        self.backup.add(key)

    def filter_bits(self) -> int:
        return self.backup.m_bits if self.backup is not None else 0

    def total_bits(self) -> int:
        """Oracle size plus raw filter bits (headers excluded)."""
        return self.oracle.size_bits() + self.filter_bits()

    def to_bytes(self) -> bytes:
        flags = 2 if self.backup is not None else 0
        out = _HEADER.pack(_LBF_MAGIC, _VERSION, self.tau, self.seed, flags) + self.oracle.to_bytes()
        if self.backup is not None:
            out += self.backup.to_bytes()
        return out

    @classmethod
    def from_bytes(cls, data: bytes) -> "LearnedBloomFilter":
        magic, version, tau, seed, flags = _HEADER.unpack_from(data, 0)
        if magic != _LBF_MAGIC or version != _VERSION:
            raise ValueError("not a serialized learned Bloom filter")
        oracle, off = read_oracle(data, _HEADER.size)
        backup = BloomFilter._read(data, off)[0] if flags & 2 else None
        return cls(oracle, tau, backup, seed=seed)


class SandwichedLearnedBloomFilter(LearnedBloomFilter):
    """Initial Bloom filter over all keys in front of a learned Bloom filter."""

    def __init__(self, initial: BloomFilter | None, oracle: ScoreOracle, tau: float,
                 backup: BloomFilter | None, backup_bits: int = 0, seed: int = 0) -> None:
        super().__init__(oracle, tau, backup, backup_bits, seed)
        self.initial = initial

    def contains_many(self, keys) -> np.ndarray:
        if self.initial is None:
            return super().contains_many(keys)
        res = self.initial.contains_many(keys)
        if res.any():
            res[res] = super().contains_many(_select(keys, res))
        return res

    def insert(self, key: Key) -> None:
        if self.initial is not None:
            self.initial.add(key)
        super().insert(key)

    def filter_bits(self) -> int:
        return super().filter_bits() + (self.initial.m_bits if self.initial is not None else 0)

    def to_bytes(self) -> bytes:
        flags = (1 if self.initial is not None else 0) | (2 if self.backup is not None else 0)
        out = _HEADER.pack(_SLBF_MAGIC, _VERSION, self.tau, self.seed, flags) + self.oracle.to_bytes()
        if self.initial is not None:
            out += self.initial.to_bytes()
        if self.backup is not None:
            out += self.backup.to_bytes()
        return out

    @classmethod
    def from_bytes(cls, data: bytes) -> "SandwichedLearnedBloomFilter":
        magic, version, tau, seed, flags = _HEADER.unpack_from(data, 0)
        if magic != _SLBF_MAGIC or version != _VERSION:
            raise ValueError("not a serialized sandwiched learned Bloom filter")
        oracle, off = read_oracle(data, _HEADER.size)
        initial = backup = None
        if flags & 1:
            initial, off = BloomFilter._read(data, off)
        if flags & 2:
            backup, off = BloomFilter._read(data, off)
        return cls(initial, oracle, tau, backup, seed=seed)


def build_learned(oracle: ScoreOracle, tau: float, keys, backup_bits: int, seed: int = 0) -> LearnedBloomFilter:
    """Backup holds exactly the keys scoring below ``tau``; omitted when there are none."""
    backup_bits = int(backup_bits)
    fn_keys = _select(keys, oracle.scores(keys) < tau)
    backup = _build_backup(fn_keys, backup_bits, derive_seed(seed, BACKUP_SEED_TAG))
    return LearnedBloomFilter(oracle, tau, backup, backup_bits, seed)


def build_sandwich(oracle: ScoreOracle, tau: float, keys, b1_bits_per_key: float,
                   b2_bits_per_key: float, seed: int = 0) -> SandwichedLearnedBloomFilter:
    """Budgets are bits per key of ``keys``; sizes are floored to whole bits."""
    if b1_bits_per_key < 0 or b2_bits_per_key < 0:
        raise ValueError("bit budgets must be nonnegative")
    n = len(keys)
    initial = None
    if b1_bits_per_key > 0 and n:
        m1 = max(1, math.floor(b1_bits_per_key * n))
        initial = BloomFilter.build(keys, m1, optimal_hash_count(m1 / n), derive_seed(seed, INITIAL_SEED_TAG))
    m2 = math.floor(b2_bits_per_key * n)
    fn_keys = _select(keys, oracle.scores(keys) < tau)
    backup = _build_backup(fn_keys, m2, derive_seed(seed, BACKUP_SEED_TAG))
    return SandwichedLearnedBloomFilter(initial, oracle, tau, backup, m2, seed)
