"""Learned-function stand-ins and the measurements that reduce them to (F_p, F_n, zeta).

A score oracle maps a key to a score in [0, 1]; a value oracle maps a key to
a u-bit value or null. Both have a byte serialization whose length defines
their size in bits, which is what a deployed structure would pay for them.
"""
from __future__ import annotations

import struct
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .hashing import Key, encode_key, hash_pair, hash_pairs

NULL = -1  # null value in vectorized value-oracle output

ORACLE_MAGIC = b"ORCL"
ORACLE_VERSION = 1
_TAG_INTERVAL = 1
_TAG_BUCKET = 2
_TAG_VALUE = 3
_TAG_EXACT = 4
_HEADER = struct.Struct("<4sBB")


def _key_to_int(key: Key) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key)
    data = encode_key(key)
    if len(data) != 8:
        raise ValueError("interval oracles only score 8-byte integer keys")
    return int.from_bytes(data, "little", signed=True)


def _int_keys(keys) -> np.ndarray:
    if isinstance(keys, np.ndarray) and keys.dtype.kind in "iu":
        return keys.astype(np.int64, copy=False)
    return np.array([_key_to_int(k) for k in keys], dtype=np.int64)


class ScoreOracle:
    """Base class: subclasses implement ``scores`` and ``to_bytes``."""

    def score(self, key: Key) -> float:
        if isinstance(key, np.ndarray):
            raise TypeError("use scores() for arrays")
        return float(self.scores([key])[0])

    def scores(self, keys) -> np.ndarray:
        raise NotImplementedError

    def to_bytes(self) -> bytes:
        raise NotImplementedError

    def size_bits(self) -> int:
        return 8 * len(self.to_bytes())


class IntervalOracle(ScoreOracle):
    """Scores ``in_score`` inside any of the closed integer ranges, ``out_score`` elsewhere."""

    def __init__(self, intervals: Sequence[tuple[int, int]], in_score: float = 1.0, out_score: float = 0.0) -> None:
        ivs = sorted((int(lo), int(hi)) for lo, hi in intervals)
        for lo, hi in ivs:
            if lo > hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")
        for (_, h0), (l1, _) in zip(ivs, ivs[1:]):
            if l1 <= h0:
                raise ValueError("intervals must be disjoint")
        if not 0.0 <= out_score < in_score <= 1.0:
            raise ValueError("need 0 <= out_score < in_score <= 1")
        self.intervals = ivs
        self.in_score = float(in_score)
        self.out_score = float(out_score)
        self._lo = np.array([lo for lo, _ in ivs], dtype=np.int64)
        self._hi = np.array([hi for _, hi in ivs], dtype=np.int64)

    def inside(self, keys) -> np.ndarray:
        x = _int_keys(keys)
        if not len(self._lo):
            return np.zeros(len(x), dtype=bool)
        i = np.searchsorted(self._lo, x, side="right") - 1
        ok = i >= 0
        res = np.zeros(len(x), dtype=bool)
        res[ok] = x[ok] <= self._hi[i[ok]]
        return res

    def scores(self, keys) -> np.ndarray:
        return np.where(self.inside(keys), self.in_score, self.out_score)

    def to_bytes(self) -> bytes:
        out = [_HEADER.pack(ORACLE_MAGIC, ORACLE_VERSION, _TAG_INTERVAL),
               struct.pack("<ddI", self.in_score, self.out_score, len(self.intervals))]
        out += [struct.pack("<qq", lo, hi) for lo, hi in self.intervals]
        return b"".join(out)

    def __repr__(self) -> str:
        return f"IntervalOracle({len(self.intervals)} intervals, in={self.in_score}, out={self.out_score})"


class BucketHistogramOracle(ScoreOracle):
    """Assigns each key the smoothed positive fraction of its hash bucket.

    Scores are held as float32 so that the serialized table is exactly what
    gets scored.
    """

    def __init__(self, bucket_scores: Sequence[float] | np.ndarray, seed: int = 0) -> None:
        s = np.asarray(bucket_scores, dtype=np.float32)
        if s.ndim != 1 or len(s) < 1:
            raise ValueError("need at least one bucket")
        if np.any((s < 0) | (s > 1)):
            raise ValueError("bucket scores must lie in [0, 1]")
        self.bucket_scores = s
        self.seed = seed

    @property
    def num_buckets(self) -> int:
        return len(self.bucket_scores)

    def buckets(self, keys) -> np.ndarray:
        h1, _ = hash_pairs(keys, self.seed)
        return (h1 % np.uint64(self.num_buckets)).astype(np.int64)

    def scores(self, keys) -> np.ndarray:
        return self.bucket_scores[self.buckets(keys)].astype(np.float64)

    def to_bytes(self) -> bytes:
        return (_HEADER.pack(ORACLE_MAGIC, ORACLE_VERSION, _TAG_BUCKET)
                + struct.pack("<QI", self.seed, self.num_buckets)
                + self.bucket_scores.astype("<f4").tobytes())

    def __repr__(self) -> str:
        return f"BucketHistogramOracle(num_buckets={self.num_buckets})"


def train_bucket_oracle(positives, negatives, num_buckets: int, seed: int = 0) -> BucketHistogramOracle:
    """Laplace-smoothed per-bucket positive fraction: ``(1 + pos) / (2 + pos + neg)``."""
    if len(positives) == 0:
        raise ValueError("positives must be nonempty")
    if num_buckets < 1:
        raise ValueError("num_buckets must be >= 1")
    probe = BucketHistogramOracle(np.zeros(num_buckets), seed)
    pos = np.bincount(probe.buckets(positives), minlength=num_buckets)
    neg = np.bincount(probe.buckets(negatives), minlength=num_buckets) if len(negatives) else 0
    return BucketHistogramOracle((1.0 + pos) / (2.0 + pos + neg), seed)


class ValueOracle:
    """Hash-bucket table predicting a u-bit value, or null for unclaimed buckets."""

    def __init__(self, table: Sequence[int] | np.ndarray, u: int, seed: int = 0) -> None:
        t = np.asarray(table, dtype=np.int64)
        if t.ndim != 1 or len(t) < 1:
            raise ValueError("need at least one bucket")
        if not 1 <= u <= 62:
            raise ValueError("u must be in [1, 62]")
        if np.any((t < NULL) | (t >= (1 << u))):
            raise ValueError("table values must be null or fit in u bits")
        self.table = t
        self.u = u
        self.seed = seed

    @property
    def num_buckets(self) -> int:
        return len(self.table)

    def buckets(self, keys) -> np.ndarray:
        h1, _ = hash_pairs(keys, self.seed)
        return (h1 % np.uint64(self.num_buckets)).astype(np.int64)

    def predict(self, key: Key) -> int | None:
        h1, _ = hash_pair(key, self.seed)
        v = int(self.table[h1 % self.num_buckets])
        return None if v == NULL else v

    def predict_many(self, keys) -> np.ndarray:
        """Predictions as int64, ``NULL`` (-1) for null."""
        return self.table[self.buckets(keys)]

    def to_bytes(self) -> bytes:
        return (_HEADER.pack(ORACLE_MAGIC, ORACLE_VERSION, _TAG_VALUE)
                + struct.pack("<QBI", self.seed, self.u, self.num_buckets)
                + self.table.astype("<i8").tobytes())

    def size_bits(self) -> int:
        return 8 * len(self.to_bytes())


class ExactValueOracle(ValueOracle):
    """Memorizes every pair: a perfect (and expensive) oracle."""

    def __init__(self, pairs: Mapping[Key, int], u: int) -> None:
        keys = np.array([_key_to_int(k) for k in pairs], dtype=np.int64)
        vals = np.array([int(v) for v in pairs.values()], dtype=np.int64)
        order = np.argsort(keys, kind="stable")
        self._keys, self._vals = keys[order], vals[order]
        if np.any((vals < 0) | (vals >= (1 << u))):
            raise ValueError("values must fit in u bits")
        self.u = u
        self.seed = 0

    @property
    def num_buckets(self) -> int:
        return len(self._keys)

    def predict(self, key: Key) -> int | None:
        v = int(self.predict_many([key])[0])
        return None if v == NULL else v

    def predict_many(self, keys) -> np.ndarray:
        x = _int_keys(keys)
        out = np.full(len(x), NULL, dtype=np.int64)
        if len(self._keys):
            i = np.minimum(np.searchsorted(self._keys, x), len(self._keys) - 1)
            hit = self._keys[i] == x
            out[hit] = self._vals[i[hit]]
        return out

    def to_bytes(self) -> bytes:
        return (_HEADER.pack(ORACLE_MAGIC, ORACLE_VERSION, _TAG_EXACT)
                + struct.pack("<BI", self.u, len(self._keys))
                + self._keys.astype("<i8").tobytes() + self._vals.astype("<i8").tobytes())


def train_value_oracle(pairs: Mapping[Key, int], u: int, num_buckets: int, seed: int = 0,
                       negatives: Iterable[Key] = ()) -> ValueOracle:
    """Majority value per bucket; ties go to the lowest value.

    Each negative key casts a vote for null. Null wins a bucket only with a
    strict majority over every value; empty buckets are null.
    """
    if num_buckets < 1:
        raise ValueError("num_buckets must be >= 1")
    probe = ValueOracle(np.full(num_buckets, NULL), u, seed)
    keys = list(pairs)
    votes: dict[int, Counter] = {}
    for b, k in zip(probe.buckets(keys), keys):
        votes.setdefault(int(b), Counter())[int(pairs[k])] += 1
    null_votes = Counter(int(b) for b in probe.buckets(list(negatives))) if negatives else Counter()
    table = np.full(num_buckets, NULL, dtype=np.int64)
    for b, c in votes.items():
        best = min(c.items(), key=lambda kv: (-kv[1], kv[0]))
        if best[1] >= null_votes.get(b, 0):
            table[b] = best[0]
    return ValueOracle(table, u, seed)


def load_oracle(data: bytes) -> ScoreOracle | ValueOracle:
    oracle, _ = read_oracle(data, 0)
    return oracle


def read_oracle(data: bytes, offset: int):
    """Parse one serialized oracle at ``offset``; returns ``(oracle, end_offset)``."""
    magic, version, tag = _HEADER.unpack_from(data, offset)
    if magic != ORACLE_MAGIC:
        raise ValueError("not a serialized oracle")
    if version != ORACLE_VERSION:
        raise ValueError(f"unsupported oracle version {version}")
    offset += _HEADER.size
    if tag == _TAG_INTERVAL:
        ins, outs, n = struct.unpack_from("<ddI", data, offset)
        offset += 20
        ivs = [struct.unpack_from("<qq", data, offset + 16 * i) for i in range(n)]
        return IntervalOracle(ivs, ins, outs), offset + 16 * n
    if tag == _TAG_BUCKET:
        seed, n = struct.unpack_from("<QI", data, offset)
        offset += 12
        scores = np.frombuffer(data, dtype="<f4", count=n, offset=offset)
        return BucketHistogramOracle(scores, seed), offset + 4 * n
    if tag == _TAG_VALUE:
        seed, u, n = struct.unpack_from("<QBI", data, offset)
        offset += 13
        table = np.frombuffer(data, dtype="<i8", count=n, offset=offset)
        return ValueOracle(table, u, seed), offset + 8 * n
    if tag == _TAG_EXACT:
        u, n = struct.unpack_from("<BI", data, offset)
        offset += 5
        keys = np.frombuffer(data, dtype="<i8", count=n, offset=offset)
        vals = np.frombuffer(data, dtype="<i8", count=n, offset=offset + 8 * n)
        return ExactValueOracle(dict(zip(keys.tolist(), vals.tolist())), u), offset + 16 * n
    raise ValueError(f"unknown oracle tag {tag}")


@dataclass(frozen=True)
class OracleProfile:
    tau: float
    fp: float
    fn: float
    zeta_bits: int
    n_negatives: int = 0

    @property
    def fp_stderr(self) -> float:
        if not self.n_negatives:
            return float("nan")
        return (self.fp * (1 - self.fp) / self.n_negatives) ** 0.5


def _check_disjoint(positives, negatives) -> None:
    if (isinstance(positives, np.ndarray) and isinstance(negatives, np.ndarray)
            and positives.dtype.kind in "iu" and negatives.dtype.kind in "iu"):
        overlap = bool(np.isin(negatives, positives).any())
    else:
        pset = {encode_key(k) for k in positives}
        overlap = any(encode_key(k) in pset for k in negatives)
    if overlap:
        raise ValueError("negative sample overlaps the positive keys")


def _profile_scores(pos_scores: np.ndarray, neg_scores: np.ndarray, tau: float, zeta: int) -> OracleProfile:
    fn = float(np.count_nonzero(pos_scores < tau)) / len(pos_scores) if len(pos_scores) else 0.0
    fp = float(np.count_nonzero(neg_scores >= tau)) / len(neg_scores)
    return OracleProfile(tau, fp, fn, zeta, len(neg_scores))


def profile(oracle: ScoreOracle, tau: float, positives, negative_sample) -> OracleProfile:
    """Exact F_n over ``positives``; empirical F_p over ``negative_sample``."""
    if len(negative_sample) == 0:
        raise ValueError("negative_sample must be nonempty")
    _check_disjoint(positives, negative_sample)
    return _profile_scores(oracle.scores(positives), oracle.scores(negative_sample), tau, oracle.size_bits())


def sweep_thresholds(oracle: ScoreOracle, positives, negative_sample, taus: Sequence[float]) -> list[OracleProfile]:
    if not len(taus):
        raise ValueError("taus must be nonempty")
    if len(negative_sample) == 0:
        raise ValueError("negative_sample must be nonempty")
    _check_disjoint(positives, negative_sample)
    ps, ns = oracle.scores(positives), oracle.scores(negative_sample)
    zeta = oracle.size_bits()
    return [_profile_scores(ps, ns, float(t), zeta) for t in taus]
