"""Bloomier filters (static key -> value maps) and the learned Bloomier pipeline.

A key is hashed to one cell in each of ``num_hashes`` equal blocks, and its
answer is the XOR of those cells. A result whose top ``r`` bits are zero
is a value; anything else is null. Construction peels the 3-uniform
hypergraph and assigns cells in reverse peel order.
"""
from __future__ import annotations

import dataclasses
import math
import struct
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .analysis import FilterModel, _model
from .bloom import BloomFilter, optimal_hash_count
from .hashing import Key, as_key_array, derive_seed, encode_key, hash_pair, hash_pairs, mixed_index, mixed_index_matrix
from .oracle import NULL, ValueOracle

C_FIXED_SCALE = 1 << 16
DEFAULT_C = 1.23
PEEL_RETRY_LIMIT = 100
# fixed extra cells, as in xor filters: at c=1.23 finite-size peeling fails ~22% of seeds without it
CELL_SLACK = 32
FN_FILTER_SEED_TAG = 3
_FILL_TAG = 0xF111

_MAGIC = b"BLMR"
_VERSION = 1
_HEADER = struct.Struct("<4sBIBBBQQ")  # magic, version, c fixed-point, u, r, num_hashes, seed, z


class ConstructionFailed(RuntimeError):
    """Peeling failed for every derived seed; retry with a larger ``c``."""


@dataclass(frozen=True)
class BloomierParams:
    c: float = DEFAULT_C
    u: int = 16
    r: int = 8
    num_hashes: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        # c is stored as 16.16 fixed point so cell counts survive serialization
        object.__setattr__(self, "c", round(self.c * C_FIXED_SCALE) / C_FIXED_SCALE)
        if not self.c > 1:
            raise ValueError(f"c must exceed 1, got {self.c}")
        if not 1 <= self.u <= 62:
            raise ValueError(f"u must be in [1, 62], got {self.u}")
        if self.r < 0 or self.u + self.r > 64:
            raise ValueError(f"need r >= 0 and u + r <= 64, got u={self.u}, r={self.r}")
        if self.num_hashes < 2:
            raise ValueError("num_hashes must be >= 2")

    @property
    def width(self) -> int:
        return self.u + self.r

    @property
    def c_fixed(self) -> int:
        return round(self.c * C_FIXED_SCALE)

    def block_size(self, z: int) -> int:
        total = -(-self.c_fixed * max(z, 1) // C_FIXED_SCALE) + CELL_SLACK
        return -(-total // self.num_hashes)


def _cell_matrix(keys, params: BloomierParams, block: int) -> np.ndarray:
    h1, h2 = hash_pairs(keys, params.seed)
    # plain double hashing allows only block**2 distinct triples, which collide at this scale
    idx = mixed_index_matrix(h1, h2, params.num_hashes, block)
    return idx + np.arange(params.num_hashes, dtype=np.int64) * block


def _peel(cells: np.ndarray, n_cells: int) -> list[tuple[int, int]] | None:
    z, h = cells.shape
    flat = cells.ravel()
    count = np.bincount(flat, minlength=n_cells).tolist()
    owner = np.zeros(n_cells, dtype=np.int64)
    np.bitwise_xor.at(owner, flat, np.repeat(np.arange(z, dtype=np.int64), h))
    owner = owner.tolist()
    rows = cells.tolist()
    stack = [i for i, c in enumerate(count) if c == 1]
    order = []
    while stack:
        c = stack.pop()
        if count[c] != 1:
            continue
        key = owner[c]
        order.append((key, c))
        for cc in rows[key]:
            count[cc] -= 1
            owner[cc] ^= key
            if count[cc] == 1:
                stack.append(cc)
    return order if len(order) == z else None


class BloomierFilter:
    def __init__(self, params: BloomierParams, cells: np.ndarray, z: int, attempts: int = 1) -> None:
        self.params = params
        self.cells = cells
        self.z = z
        self.attempts = attempts
        self._block = params.block_size(z)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def size_bits(self) -> int:
        return self.n_cells * self.params.width

    def lookup(self, key: Key) -> int | None:
        h1, h2 = hash_pair(key, self.params.seed)
        word = 0
        for j in range(self.params.num_hashes):
            word ^= int(self.cells[j * self._block + mixed_index(h1, h2, j, self._block)])
        if word >> self.params.u:
            return None
        return word

    def lookup_many(self, keys) -> np.ndarray:
        """Values as int64 with ``NULL`` (-1) for null."""
        keys = as_key_array(keys)
        if len(keys) == 0:
            return np.zeros(0, dtype=np.int64)
        words = np.bitwise_xor.reduce(self.cells[_cell_matrix(keys, self.params, self._block)], axis=1)
        valid = (words >> np.uint64(self.params.u)) == 0
        return np.where(valid, words.astype(np.int64), NULL)

    def to_bytes(self) -> bytes:
        p = self.params
        header = _HEADER.pack(_MAGIC, _VERSION, p.c_fixed, p.u, p.r, p.num_hashes, p.seed, self.z)
        w = p.width
        bits = ((self.cells[:, None] >> np.arange(w, dtype=np.uint64)) & np.uint64(1)).astype(np.uint8)
        return header + np.packbits(bits.ravel(), bitorder="little").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "BloomierFilter":
        magic, version, c_fixed, u, r, h, seed, z = _HEADER.unpack_from(data, 0)
        if magic != _MAGIC or version != _VERSION:
            raise ValueError("not a serialized Bloomier filter")
        params = BloomierParams(c_fixed / C_FIXED_SCALE, u, r, h, seed)
        n = params.block_size(z) * h
        w = params.width
        raw = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size)
        bits = np.unpackbits(raw, bitorder="little")[: n * w].reshape(n, w).astype(np.uint64)
        cells = (bits << np.arange(w, dtype=np.uint64)).sum(axis=1, dtype=np.uint64)
        return cls(params, cells, z)

    def __repr__(self) -> str:
        p = self.params
        return f"BloomierFilter(z={self.z}, cells={self.n_cells}, u={p.u}, r={p.r})"


def build_bloomier(pairs: Mapping[Key, int], params: BloomierParams | None = None,
                   retry_limit: int = PEEL_RETRY_LIMIT) -> BloomierFilter:
    """Build a filter returning ``pairs[x]`` for each stored key.

    Attempt ``i`` hashes with ``derive_seed(params.seed, i)`` (attempt 0 uses
    ``params.seed``); the winning seed is recorded in the returned params.
    """
    params = params or BloomierParams()
    if not pairs:
        raise ValueError("pairs must be nonempty")
    keys = as_key_array(list(pairs))
    values = np.array([int(v) for v in pairs.values()], dtype=np.int64)
    if values.min() < 0 or values.max() >= (1 << params.u):
        raise ValueError(f"values must fit in u={params.u} bits")
    if len({encode_key(k) for k in pairs}) != len(pairs):
        raise ValueError("keys must have distinct encodings")
    z = len(values)
    block = params.block_size(z)
    n_cells = block * params.num_hashes
    vals = values.tolist()
    for attempt in range(retry_limit):
        trial = params if attempt == 0 else dataclasses.replace(params, seed=derive_seed(params.seed, attempt))
        cells = _cell_matrix(keys, trial, block)
        order = _peel(cells, n_cells)
        if order is None:
            continue
        rng = np.random.default_rng(derive_seed(trial.seed, _FILL_TAG))
        hi = (1 << trial.width) - 1
        table = rng.integers(0, hi, size=n_cells, dtype=np.uint64, endpoint=True).tolist()
        rows = cells.tolist()
        for key, own in reversed(order):
            word = vals[key]
            for cc in rows[key]:
                if cc != own:
                    word ^= table[cc]
            table[own] = word
        return BloomierFilter(trial, np.array(table, dtype=np.uint64), z, attempt + 1)
    raise ConstructionFailed(f"peeling failed for {retry_limit} seeds (z={z}, c={params.c}); raise c")


class LearnedBloomierFilter:
    """Value oracle, a Bloom filter flagging its mistakes, and a backup Bloomier filter."""

    def __init__(self, oracle: ValueOracle, fn_filter: BloomFilter | None, backup: BloomierFilter | None,
                 n_false_negatives: int = 0) -> None:
        self.oracle = oracle
        self.fn_filter = fn_filter
        self.backup = backup
        self.n_false_negatives = n_false_negatives

    @property
    def backup_keys(self) -> int:
        return self.backup.z if self.backup is not None else 0

    def lookup(self, key: Key) -> int | None:
        if self.fn_filter is not None and key in self.fn_filter:
            return self.backup.lookup(key)
        return self.oracle.predict(key)

    def lookup_many(self, keys) -> np.ndarray:
        keys = as_key_array(keys)
        out = self.oracle.predict_many(keys).copy()
        if self.fn_filter is not None:
            hit = self.fn_filter.contains_many(keys)
            if hit.any():
                sel = keys[hit] if isinstance(keys, np.ndarray) else [k for k, h in zip(keys, hit) if h]
                out[hit] = self.backup.lookup_many(sel)
        return out

    def size_bits(self) -> int:
        """Oracle, Bloom filter and backup cells, excluding headers."""
        return (self.oracle.size_bits()
                + (self.fn_filter.m_bits if self.fn_filter is not None else 0)
                + (self.backup.size_bits() if self.backup is not None else 0))


def build_learned_bloomier(oracle: ValueOracle, pairs: Mapping[Key, int], b: float,
                           backup_params: BloomierParams | None = None) -> LearnedBloomierFilter:
    """The Bloom filter gets ``floor(b * #false negatives)`` bits; the backup holds every key it hits."""
    backup_params = backup_params or BloomierParams(u=oracle.u)
    if not pairs:
        raise ValueError("pairs must be nonempty")
    keys = as_key_array(list(pairs))
    values = np.array([int(v) for v in pairs.values()], dtype=np.int64)
    wrong = oracle.predict_many(keys) != values
    n_fn = int(wrong.sum())
    if n_fn == 0:
        return LearnedBloomierFilter(oracle, None, None, 0)
    if not b > 0:
        raise ValueError("b must be positive when the oracle has false negatives")
    fn_keys = keys[wrong] if isinstance(keys, np.ndarray) else [k for k, w in zip(keys, wrong) if w]
    seed = derive_seed(backup_params.seed, FN_FILTER_SEED_TAG)
    fn_filter = BloomFilter.build(fn_keys, max(1, math.floor(b * n_fn)), optimal_hash_count(b), seed)
    hit = fn_filter.contains_many(keys)
    sub = {k: v for k, v, h in zip(pairs, pairs.values(), hit) if h}
    return LearnedBloomierFilter(oracle, fn_filter, build_bloomier(sub, backup_params), n_fn)


def plain_bloomier_space(m: int, c: float, u: int, r: float) -> float:
    return c * m * (u + r)


def learned_bloomier_space_model(zeta: float, m: int, fn: float, b: float, c: float, u: int,
                                 r_prime: float, model: FilterModel | float | None = None) -> float:
    """Oracle + Bloom filter + backup cells for the expected ``m(F_n + (1-F_n) alpha^b)`` backup keys.

    With ``fn == 0`` there is nothing to flag, so both filters are absent.
    """
    if zeta < 0 or m < 0 or b < 0 or r_prime < 0 or u < 1 or not c > 1:
        raise ValueError("invalid Bloomier space-model parameters")
    if not 0 <= fn <= 1:
        raise ValueError(f"fn must lie in [0, 1], got {fn}")
    if fn == 0:
        return float(zeta)
    a_b = _model(model).alpha ** b
    return zeta + b * m * fn + c * m * (fn + (1 - fn) * a_b) * (u + r_prime)


def learned_bloomier_fpr_model(fp: float, b: float, r_prime: float,
                               model: FilterModel | float | None = None) -> float:
    if not 0 <= fp <= 1 or b < 0 or r_prime < 0:
        raise ValueError("invalid Bloomier FPR-model parameters")
    a_b = _model(model).alpha ** b
    return fp * (1 - a_b) + a_b * 2.0 ** (-r_prime)
