"""Scenario runners behind the CLI.

Each runner takes an :class:`ExperimentConfig` and returns ``(comments,
rows)``: free-text notes and a list of dicts in the column order of the
matching ``*_COLUMNS`` schema. All randomness comes from substreams of the
master seed, so output is a pure function of the config.
"""
from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import analysis
from .analysis import FilterModel, standard_error
from .bloom import BloomFilter
from .bloomier import (BloomierParams, build_bloomier, build_learned_bloomier, learned_bloomier_fpr_model,
                       learned_bloomier_space_model, plain_bloomier_space)
from .learned_filter import SandwichedLearnedBloomFilter, build_learned, build_sandwich
from .oracle import NULL, ExactValueOracle, IntervalOracle, ValueOracle, profile, sweep_thresholds, \
    train_bucket_oracle, train_value_oracle

SCHEMA_VERSION = 1

SIMULATE_COLUMNS = [
    "scenario", "trial", "structure", "query_lo", "query_hi", "n_queries", "false_positives",
    "empirical_fpr", "stderr", "model_fpr", "instance_fpr", "oracle_fp", "oracle_fn",
    "b1", "b2", "filter_bits", "oracle_bits",
]
SWEEP_COLUMNS = [
    "scenario", "trial", "tau", "fp", "fp_stderr", "fn", "model_fpr", "oracle_bits", "total_bits",
]
BLOOMIER_COLUMNS = [
    "scenario", "trial", "structure", "r", "n_keys", "n_queries", "false_positives", "empirical_fpr",
    "stderr", "model_fpr", "instance_fpr", "oracle_fp", "oracle_fn", "backup_keys", "model_backup_keys",
    "size_bits", "model_size_bits", "oracle_bits", "attempts",
]
MODEL_COLUMNS = ["quantity", "value", "display", "note"]

SCENARIOS = ("range-example", "paper-section-4", "paper-section-5", "bloomier-supplement")

RANGE_NOTE = ("narrative values for this example: about 0.0004 over the whole universe and "
                    "0.0022 over [0,100000); direct counting gives roughly 0.001 and 0.0056")


class ConfigError(ValueError):
    """Invalid experiment configuration, naming the offending field."""


@dataclass
class ExperimentConfig:
    scenario: str = "paper-section-5"
    seed: int = 0
    trials: int = 1
    n_keys: int = 10_000
    universe: int = 10**9
    oracle: str = "interval"
    target_fp: float = 0.01
    target_fn: float = 0.5
    tau: float = 0.5
    taus: list = field(default_factory=lambda: [round(0.1 * i, 10) for i in range(11)])
    num_buckets: int = 4096
    b: float = 10.0
    b1: float | None = None
    b2: float | None = None
    zeta_per_key: float = 3.0
    backup_bits_per_key: float = 16.0
    alpha: float = analysis.STANDARD_ALPHA
    n_queries: int = 1_000_000
    query_ranges: list = field(default_factory=list)
    u: int = 16
    r_values: list = field(default_factory=lambda: [4, 8, 12])
    r_prime: int = 8
    c: float = 1.23
    value_oracle: str = "bucket"
    format: str = "csv"
    jobs: int = 1

    def validate(self) -> "ExperimentConfig":
        def need(cond: bool, name: str, msg: str) -> None:
            if not cond:
                raise ConfigError(f"field '{name}': {msg} (got {getattr(self, name)!r})")

        need(self.scenario in SCENARIOS, "scenario", f"must be one of {', '.join(SCENARIOS)}")
        for name in ("trials", "n_keys", "universe", "num_buckets", "n_queries", "u", "jobs"):
            need(isinstance(getattr(self, name), int) and getattr(self, name) >= 1, name, "must be a positive integer")
        need(isinstance(self.seed, int) and self.seed >= 0, "seed", "must be a nonnegative integer")
        need(self.n_keys < self.universe, "n_keys", "must be smaller than universe")
        need(0 < self.target_fp < 1, "target_fp", "must lie in (0, 1)")
        need(0 <= self.target_fn <= 1, "target_fn", "must lie in [0, 1]")
        need(0 < self.alpha < 1, "alpha", "must lie in (0, 1)")
        need(self.b >= 0, "b", "must be nonnegative")
        need(self.b1 is None or self.b1 >= 0, "b1", "must be nonnegative")
        need(self.b2 is None or self.b2 >= 0, "b2", "must be nonnegative")
        need(self.b1 is None or self.b2 is None or math.isclose(self.b1 + self.b2, self.b, abs_tol=1e-9),
             "b1", "b1 + b2 must equal b")
        need((self.b1 or 0) <= self.b and (self.b2 or 0) <= self.b, "b", "must cover b1 and b2")
        need(self.oracle in ("interval", "bucket"), "oracle", "must be 'interval' or 'bucket'")
        need(self.value_oracle in ("bucket", "perfect", "null"), "value_oracle", "must be bucket, perfect or null")
        need(self.format in ("csv", "json"), "format", "must be 'csv' or 'json'")
        need(len(self.taus) > 0 and all(t >= 0 for t in self.taus), "taus", "must be a nonempty list of thresholds >= 0")
        need(all(len(q) == 2 and 0 <= q[0] < q[1] for q in self.query_ranges), "query_ranges",
             "must be a list of [lo, hi) pairs")
        need(all(0 <= r and self.u + r <= 64 for r in self.r_values), "r_values", "need 0 <= r and u + r <= 64")
        need(0 <= self.r_prime and self.u + self.r_prime <= 64, "r_prime", "need 0 <= r_prime and u + r_prime <= 64")
        need(self.c > 1, "c", "must exceed 1")
        return self


PRESETS: dict[str, dict[str, Any]] = {
    "range-example": dict(n_keys=1000, universe=10**6, tau=0.4, backup_bits_per_key=16.0,
                          query_ranges=[[0, 10**6], [0, 10**5]]),
    "paper-section-4": dict(b=8.0, zeta_per_key=3.0),
    "paper-section-5": dict(b=10.0, b2=6.0),
    "bloomier-supplement": dict(universe=10**12, num_buckets=13_333, b=8.0, r_prime=8, u=16),
}


def _coerce(name: str, value: Any, default: Any) -> Any:
    if default is None or value is None:
        return value if value is None or isinstance(value, (int, float)) else _bad(name, value)
    if isinstance(default, bool):
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            _bad(name, value)
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _bad(name, value)
        return float(value)
    if isinstance(default, list):
        if not isinstance(value, list):
            _bad(name, value)
        return value
    if isinstance(default, str) and not isinstance(value, str):
        _bad(name, value)
    return value


def _bad(name: str, value: Any):
    raise ConfigError(f"field '{name}': wrong type {type(value).__name__}")


def make_config(scenario: str, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Preset for ``scenario`` with ``overrides`` applied, validated."""
    base = ExperimentConfig(scenario=scenario)
    values = dict(PRESETS.get(scenario, {}))
    overrides = dict(overrides or {})
    if "b1" in overrides and "b2" not in overrides:
        values.pop("b2", None)
    values.update(overrides)
    known = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    for name, value in values.items():
        if name not in known:
            raise ConfigError(f"field '{name}': unknown field")
        setattr(base, name, _coerce(name, value, getattr(base, name)))
    return base.validate()


def load_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1: top level must be a JSON object")
    return data


def substream(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tags))


def sample_distinct(rng: np.random.Generator, lo: int, hi: int, n: int) -> np.ndarray:
    if hi - lo < n:
        raise ValueError(f"cannot draw {n} distinct values from [{lo}, {hi})")
    return np.sort(rng.choice(hi - lo, size=n, replace=False) + lo).astype(np.int64)


def sample_negatives(rng: np.random.Generator, lo: int, hi: int, n: int, exclude: np.ndarray) -> np.ndarray:
    """``n`` iid uniform draws from ``[lo, hi)`` conditioned on avoiding ``exclude``."""
    exclude = np.sort(exclude)
    out = np.empty(0, dtype=np.int64)
    while len(out) < n:
        draw = rng.integers(lo, hi, size=n - len(out), dtype=np.int64)
        i = np.minimum(np.searchsorted(exclude, draw), len(exclude) - 1)
        out = np.concatenate([out, draw[exclude[i] != draw] if len(exclude) else draw])
    return out


def range_keys(rng: np.random.Generator, n: int, universe: int, lo: int = 1000, hi: int = 2000) -> np.ndarray:
    """Half the keys inside ``[lo, hi]``, half elsewhere in ``[0, universe)``."""
    n_in = n // 2
    inside = sample_distinct(rng, lo, hi + 1, n_in)
    span = universe - (hi - lo + 1)
    outside = sample_distinct(rng, 0, span, n - n_in)
    outside = np.where(outside >= lo, outside + (hi - lo + 1), outside)
    return np.sort(np.concatenate([inside, outside]))


def hot_region_scenario(rng: np.random.Generator, n: int, universe: int, fp: float, fn: float):
    """Keys and an interval oracle with F_n = round(fn*n)/n exactly and F_p close to ``fp``.

    The oracle flags ``[0, fp*universe)``; ``(1-fn)`` of the keys are drawn
    from that region and the rest from outside it.
    """
    hot = max(1, round(fp * universe))
    n_out = round(fn * n)
    keys = np.concatenate([sample_distinct(rng, 0, hot, n - n_out), sample_distinct(rng, hot, universe, n_out)])
    return np.sort(keys), IntervalOracle([(0, hot - 1)], 1.0, 0.0)


def _fp_row(scenario: str, trial: int, structure: str, decisions: np.ndarray, lo: int, hi: int, **extra) -> dict:
    n = len(decisions)
    fps = int(decisions.sum())
    rate = fps / n
    row = dict(scenario=scenario, trial=trial, structure=structure, query_lo=lo, query_hi=hi, n_queries=n,
               false_positives=fps, empirical_fpr=rate, stderr=standard_error(rate, n))
    row.update(extra)
    return {c: row.get(c, "") for c in SIMULATE_COLUMNS}


def _range_trial(cfg: ExperimentConfig, trial: int) -> list[dict]:
    keys = range_keys(substream(cfg.seed, trial, 0), cfg.n_keys, cfg.universe)
    oracle = IntervalOracle([(1000, 2000)], 0.5, 0.0)
    n_backup = int((oracle.scores(keys) < cfg.tau).sum())
    backup_bits = math.floor(cfg.backup_bits_per_key * n_backup)
    lbf = build_learned(oracle, cfg.tau, keys, backup_bits, seed=trial)
    bk = lbf.backup
    model_backup = cfg.alpha ** cfg.backup_bits_per_key
    inst_backup = bk.fpp() if bk is not None else 0.0
    ranges = cfg.query_ranges or [[0, cfg.universe]]
    rows = []
    key_set = set(keys.tolist())
    for qi, (lo, hi) in enumerate(ranges):
        q = sample_negatives(substream(cfg.seed, trial, 1, qi), lo, hi, cfg.n_queries, keys)
        # exact oracle FP probability under uniform queries on [lo, hi) minus K
        a, b = max(lo, 1000), min(hi, 2001)
        hot_nonkeys = max(0, b - a) - sum(1 for k in key_set if a <= k < b)
        nonkeys = (hi - lo) - sum(1 for k in key_set if lo <= k < hi)
        p_oracle = hot_nonkeys / nonkeys
        rows.append(_fp_row(cfg.scenario, trial, "learned", lbf.contains_many(q), lo, hi,
                            model_fpr=p_oracle + (1 - p_oracle) * model_backup,
                            instance_fpr=p_oracle + (1 - p_oracle) * inst_backup,
                            oracle_fp=p_oracle, oracle_fn=n_backup / len(keys), b1=0,
                            b2=backup_bits / len(keys), filter_bits=lbf.filter_bits(),
                            oracle_bits=oracle.size_bits()))
    return rows


def sandwich_instance_fpr(initial: BloomFilter | None, backup: BloomFilter | None, oracle_fp: float) -> float:
    """``rho1^k1 * (F_p + (1 - F_p) rho2^k2)`` from the built filters."""
    pass_initial = initial.fpp() if initial is not None else 1.0
    pass_backup = backup.fpp() if backup is not None else 0.0
    return pass_initial * (oracle_fp + (1 - oracle_fp) * pass_backup)


def conditioned_oracle_fp(slbf: SandwichedLearnedBloomFilter, queries: np.ndarray) -> float:
    """Oracle FP rate over the queries that get past the initial filter."""
    passed = queries if slbf.initial is None else queries[slbf.initial.contains_many(queries)]
    if len(passed) == 0:
        return 0.0
    return float(np.mean(slbf.oracle.scores(passed) >= slbf.tau))


def _synthetic_trial(cfg: ExperimentConfig, trial: int) -> list[dict]:
    model = FilterModel(cfg.alpha)
    keys, oracle = hot_region_scenario(substream(cfg.seed, trial, 0), cfg.n_keys, cfg.universe,
                                       cfg.target_fp, cfg.target_fn)
    test = sample_negatives(substream(cfg.seed, trial, 2), 0, cfg.universe, cfg.n_queries, keys)
    prof = profile(oracle, cfg.tau, keys, test)
    queries = sample_negatives(substream(cfg.seed, trial, 1), 0, cfg.universe, cfg.n_queries, keys)
    common = dict(oracle_fp=prof.fp, oracle_fn=prof.fn, oracle_bits=oracle.size_bits())
    rows = []
    lo, hi = 0, cfg.universe

    def sandwich_row(name: str, b1: float, b2: float) -> dict:
        slbf = build_sandwich(oracle, cfg.tau, keys, b1, b2, seed=trial)
        return _fp_row(cfg.scenario, trial, name, slbf.contains_many(queries), lo, hi,
                       model_fpr=analysis.sandwich_fpr_model(prof.fp, prof.fn, b1, b2, model),
                       instance_fpr=sandwich_instance_fpr(slbf.initial, slbf.backup,
                                                          conditioned_oracle_fp(slbf, queries)),
                       b1=b1, b2=b2, filter_bits=slbf.filter_bits(), **common)

    if cfg.scenario == "paper-section-4":
        plain = BloomFilter.for_keys(keys, cfg.b, seed=trial)
        rows.append(_fp_row(cfg.scenario, trial, "plain", plain.contains_many(queries), lo, hi,
                            model_fpr=analysis.bloom_model_fpp(cfg.b, model), instance_fpr=plain.fpp(),
                            b1=cfg.b, b2=0, filter_bits=plain.m_bits, oracle_fp="", oracle_fn="", oracle_bits=0))
        backup_b = max(0.0, cfg.b - cfg.zeta_per_key)
        rows.append(sandwich_row("learned", 0.0, backup_b))
    else:
        b1 = cfg.b1 if cfg.b1 is not None else (cfg.b - cfg.b2 if cfg.b2 is not None else 0.0)
        b2 = cfg.b - b1
        rows.append(sandwich_row("learned", 0.0, cfg.b))
        rows.append(sandwich_row("sandwich", b1, b2))
        if 0 < prof.fp < 1 and 0 < prof.fn < 1:
            split = analysis.allocate_budget(cfg.b, prof.fp, prof.fn, model)
            rows.append(sandwich_row("sandwich-optimal", split.b1, split.b2))
    return rows


def _map_trials(cfg: ExperimentConfig, fn: Callable[[ExperimentConfig, int], list[dict]]) -> list[dict]:
    trials = range(cfg.trials)
    if cfg.jobs > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(fn, [cfg] * cfg.trials, trials))
    else:
        results = [fn(cfg, t) for t in trials]
    return [row for rows in results for row in rows]


def run_simulate(cfg: ExperimentConfig) -> tuple[list[str], list[dict]]:
    comments = [f"scenario={cfg.scenario} seed={cfg.seed} trials={cfg.trials}"]
    if cfg.scenario == "range-example":
        comments.append(RANGE_NOTE)
        comments.append("the 8000-bit backup is small enough that double hashing's correlated probes push its "
                        "measured FPP roughly 1/m above rho^k, so empirical_fpr runs slightly above instance_fpr")
        return comments, _map_trials(cfg, _range_trial)
    if cfg.scenario in ("paper-section-4", "paper-section-5"):
        comments.append("model_fpr uses measured oracle rates in the continuous alpha^j model; "
                        "instance_fpr uses each filter's fill fraction and integer k, with the oracle FP rate "
                        "measured on the queries that pass the initial filter")
        if cfg.scenario == "paper-section-5":
            comments.append("the worked example's b2=6 is not the formula optimum; see sandwich-optimal")
        return comments, _map_trials(cfg, _synthetic_trial)
    raise ConfigError(f"field 'scenario': simulate does not run {cfg.scenario!r}")


def _sweep_trial(cfg: ExperimentConfig, trial: int) -> list[dict]:
    model = FilterModel(cfg.alpha)
    if cfg.scenario == "range-example":
        keys = range_keys(substream(cfg.seed, trial, 0), cfg.n_keys, cfg.universe)
        interval = IntervalOracle([(1000, 2000)], 0.5, 0.0)
    else:
        keys, interval = hot_region_scenario(substream(cfg.seed, trial, 0), cfg.n_keys, cfg.universe,
                                             cfg.target_fp, cfg.target_fn)
    if cfg.oracle == "bucket":
        train_neg = sample_negatives(substream(cfg.seed, trial, 3), 0, cfg.universe, 10 * len(keys), keys)
        oracle = train_bucket_oracle(keys, train_neg, cfg.num_buckets, seed=trial)
    else:
        oracle = interval
    test = sample_negatives(substream(cfg.seed, trial, 2), 0, cfg.universe, cfg.n_queries, keys)
    rows = []
    for p in sweep_thresholds(oracle, keys, test, cfg.taus):
        rows.append(dict(scenario=cfg.scenario, trial=trial, tau=p.tau, fp=p.fp, fp_stderr=p.fp_stderr, fn=p.fn,
                         model_fpr=analysis.learned_fpr_model(p.fp, p.fn, cfg.b, model),
                         oracle_bits=p.zeta_bits, total_bits=p.zeta_bits + math.floor(cfg.b * len(keys))))
    return rows


def run_sweep(cfg: ExperimentConfig) -> tuple[list[str], list[dict]]:
    comments = [f"scenario={cfg.scenario} oracle={cfg.oracle} seed={cfg.seed} backup b={cfg.b} bits/key"]
    return comments, _map_trials(cfg, _sweep_trial)


def _value_oracle(cfg: ExperimentConfig, pairs: dict, trial: int) -> ValueOracle:
    if cfg.value_oracle == "perfect":
        return ExactValueOracle(pairs, cfg.u)
    if cfg.value_oracle == "null":
        return ValueOracle([NULL], cfg.u)
    return train_value_oracle(pairs, cfg.u, cfg.num_buckets, seed=trial)


def _bloomier_row(cfg, trial, structure, r, n_keys, decisions, **extra) -> dict:
    n = len(decisions)
    fps = int(decisions.sum())
    row = dict(scenario=cfg.scenario, trial=trial, structure=structure, r=r, n_keys=n_keys, n_queries=n,
               false_positives=fps, empirical_fpr=fps / n, stderr=standard_error(fps / n, n))
    row.update(extra)
    return {c: row.get(c, "") for c in BLOOMIER_COLUMNS}


def _bloomier_trial(cfg: ExperimentConfig, trial: int) -> list[dict]:
    rng = substream(cfg.seed, trial, 0)
    keys = sample_distinct(rng, 0, cfg.universe, cfg.n_keys)
    values = rng.integers(0, 1 << cfg.u, size=len(keys)).tolist()
    pairs = dict(zip(keys.tolist(), values))
    queries = sample_negatives(substream(cfg.seed, trial, 1), 0, cfg.universe, cfg.n_queries, keys)
    m = len(keys)
    rows = []
    for r in cfg.r_values:
        f = build_bloomier(pairs, BloomierParams(cfg.c, cfg.u, r, seed=trial))
        rows.append(_bloomier_row(cfg, trial, "plain", r, m, f.lookup_many(queries) != NULL,
                                  model_fpr=2.0 ** -r, instance_fpr=2.0 ** -r, backup_keys=m, model_backup_keys=m,
                                  size_bits=f.size_bits(), model_size_bits=plain_bloomier_space(m, cfg.c, cfg.u, r),
                                  attempts=f.attempts))

    oracle = _value_oracle(cfg, pairs, trial)
    test = sample_negatives(substream(cfg.seed, trial, 2), 0, cfg.universe, cfg.n_queries, keys)
    fp_hat = float((oracle.predict_many(test) != NULL).mean())
    lbf = build_learned_bloomier(oracle, pairs, cfg.b, BloomierParams(cfg.c, cfg.u, cfg.r_prime, seed=trial))
    fn_hat = lbf.n_false_negatives / m
    bf = lbf.fn_filter
    hit = bf.fpp() if bf is not None else 0.0
    model = FilterModel(cfg.alpha)
    a_b = cfg.alpha ** cfg.b if bf is not None else 0.0
    zeta = oracle.size_bits()
    model_fpr = learned_bloomier_fpr_model(fp_hat, cfg.b, cfg.r_prime, model) if bf is not None else fp_hat
    model_space = learned_bloomier_space_model(zeta, m, fn_hat, cfg.b, cfg.c, cfg.u, cfg.r_prime, model)
    rows.append(_bloomier_row(
        cfg, trial, "learned", cfg.r_prime, m, lbf.lookup_many(queries) != NULL,
        model_fpr=model_fpr, instance_fpr=fp_hat * (1 - hit) + hit * 2.0 ** -cfg.r_prime,
        oracle_fp=fp_hat, oracle_fn=fn_hat, backup_keys=lbf.backup_keys,
        model_backup_keys=m * (fn_hat + (1 - fn_hat) * a_b) if fn_hat else 0.0,
        size_bits=lbf.size_bits(), model_size_bits=model_space, oracle_bits=zeta,
        attempts=lbf.backup.attempts if lbf.backup is not None else 0))
    # plain Bloomier sized for the learned structure's model FPR
    r_eq = -math.log2(model_fpr) if model_fpr > 0 else float("inf")
    row = {c: "" for c in BLOOMIER_COLUMNS}
    row.update(scenario=cfg.scenario, trial=trial, structure="plain-equal-fpr", r=r_eq, n_keys=m,
               model_fpr=model_fpr, model_size_bits=plain_bloomier_space(m, cfg.c, cfg.u, r_eq))
    rows.append(row)
    return rows


def run_bloomier(cfg: ExperimentConfig) -> tuple[list[str], list[dict]]:
    comments = [f"scenario={cfg.scenario} value_oracle={cfg.value_oracle} seed={cfg.seed}",
                "instance_fpr uses measured oracle FP rate and the Bloom filter's rho^k"]
    rows = _map_trials(cfg, _bloomier_trial)
    for t in range(cfg.trials):
        learned = next(r for r in rows if r["trial"] == t and r["structure"] == "learned")
        plain = next(r for r in rows if r["trial"] == t and r["structure"] == "plain-equal-fpr")
        winner = "learned" if learned["model_size_bits"] < plain["model_size_bits"] else "plain"
        comments.append(f"trial {t}: space at equal model FPR, learned={learned['model_size_bits']:.6g} bits, "
                        f"plain={plain['model_size_bits']:.6g} bits, winner={winner}")
    return comments, rows


def run_model(fp: float, fn: float, alpha: float, b: float, b1: float | None = None,
              b2: float | None = None) -> tuple[list[str], list[dict]]:
    model = FilterModel(alpha)
    rows: list[dict] = []
    comments: list[str] = []

    def add(q: str, v: float | None, note: str = "") -> None:
        rows.append(dict(quantity=q, value="" if v is None else v,
                         display="undefined" if v is None else f"{v:.6g}", note=note))

    add("plain_bloom_fpp", analysis.bloom_model_fpp(b, model), f"alpha^b at b={b}")
    add("learned_fpr", analysis.learned_fpr_model(fp, fn, b, model), f"all {b} bits/key in the backup")
    try:
        b2_star = analysis.optimal_backup_bits(fp, fn, model)
    except analysis.UndefinedOptimumError:
        b2_star = None
    if b2_star is None:
        add("b2_star", None, "undefined unless 0 < fp < 1 and 0 < fn < 1")
        if fp == 0 and fn == 1:
            comments.append("degenerate oracle: the learned filter is a plain Bloom filter")
            add("degenerate_plain", analysis.bloom_model_fpp(b, model), "learned_fpr equals plain_bloom_fpp")
    else:
        split = analysis.allocate_budget(b, fp, fn, model)
        add("b2_star", b2_star, "optimal backup bits/key, independent of b")
        add("split_b1", split.b1, "initial filter bits/key")
        add("split_b2", split.b2, "backup filter bits/key" + (" (whole budget)" if split.b1 == 0 else ""))
        add("sandwich_fpr_optimal", analysis.sandwich_fpr_model(fp, fn, split.b1, split.b2, model))
        add("sandwich_gain_threshold", analysis.sandwich_gain_threshold(fp, fn, model),
            "max oracle bits/key for a sandwich gain (b >= b2*)")
    try:
        add("plain_gain_threshold", analysis.plain_gain_threshold(fp, fn, b, model),
            "max oracle bits/key for a learned-filter gain")
    except ValueError:
        add("plain_gain_threshold", None, "undefined")
    if b1 is not None or b2 is not None:
        gb2 = b2 if b2 is not None else b - b1
        gb1 = b1 if b1 is not None else b - gb2
        add("sandwich_fpr_given", analysis.sandwich_fpr_model(fp, fn, gb1, gb2, model), f"b1={gb1}, b2={gb2}")
    if (fp, fn, alpha) == (0.01, 0.5, 0.6185) and b >= 6:
        add("sandwich_fpr_b2_6", analysis.sandwich_fpr_model(fp, fn, b - 6, 6, model),
            "worked example evaluated at b2=6")
        comments.append(f"erratum: the worked example quotes b2* ~ 6, but the closed form gives {b2_star:.4f}; "
                        "the quoted FPRs correspond to b2=6, and the true optimum is strictly lower")
    return comments, rows
