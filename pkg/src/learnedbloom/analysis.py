"""Closed-form false-positive models for plain, learned and sandwiched filters.

Everything here works in continuous bits per key under the model where a
Bloom filter spending ``j`` bits per stored key has false positive rate
``alpha**j``. The integer-k filters in :mod:`learnedbloom.bloom` only
approximate that model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

STANDARD_ALPHA = 0.6185


@dataclass(frozen=True)
class FilterModel:
    alpha: float = STANDARD_ALPHA

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class BudgetSplit:
    b: float
    b1: float
    b2: float

    def __post_init__(self) -> None:
        if self.b1 < 0 or self.b2 < 0:
            raise ValueError("budget parts must be nonnegative")
        if not math.isclose(self.b1 + self.b2, self.b, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError("b1 + b2 must equal b")


class UndefinedOptimumError(ValueError):
    """The optimal backup size does not exist for degenerate oracle rates."""


def _model(model: FilterModel | float | None) -> FilterModel:
    if model is None:
        return FilterModel()
    if isinstance(model, FilterModel):
        return model
    return FilterModel(float(model))


def log_alpha(x: float, model: FilterModel | float | None = None) -> float:
    if not x > 0:
        raise ValueError(f"log_alpha needs a positive argument, got {x}")
    return math.log(x) / math.log(_model(model).alpha)


def _check_rates(fp: float, fn: float) -> None:
    if not 0.0 <= fp <= 1.0:
        raise ValueError(f"fp must lie in [0, 1], got {fp}")
    if not 0.0 <= fn <= 1.0:
        raise ValueError(f"fn must lie in [0, 1], got {fn}")


def _check_bits(*bits: float) -> None:
    for b in bits:
        if not b >= 0:
            raise ValueError(f"bit budgets must be nonnegative, got {b}")


def bloom_model_fpp(bits_per_key: float, model: FilterModel | float | None = None) -> float:
    _check_bits(bits_per_key)
    return _model(model).alpha ** bits_per_key


def learned_fpr_model(fp: float, fn: float, b: float, model: FilterModel | float | None = None) -> float:
    """``fp + (1 - fp) * alpha**(b / fn)``; exactly ``fp`` when ``fn == 0``."""
    _check_rates(fp, fn)
    _check_bits(b)
    if fn == 0:
        return fp
    return fp + (1 - fp) * _model(model).alpha ** (b / fn)


def sandwich_fpr_model(fp: float, fn: float, b1: float, b2: float,
                       model: FilterModel | float | None = None) -> float:
    _check_bits(b1)
    m = _model(model)
    return m.alpha ** b1 * learned_fpr_model(fp, fn, b2, m)


def _check_open(fp: float, fn: float) -> None:
    _check_rates(fp, fn)
    if fp in (0.0, 1.0) or fn in (0.0, 1.0):
        raise UndefinedOptimumError(f"optimum undefined for fp={fp}, fn={fn}; need both strictly in (0, 1)")


def optimal_backup_bits(fp: float, fn: float, model: FilterModel | float | None = None) -> float:
    """Unconstrained minimizer of the sandwich FPR over the backup budget.

    It is independent of the total budget. The value may be negative, which
    means every bit belongs in the initial filter.
    """
    _check_open(fp, fn)
    return fn * log_alpha(fp / ((1 - fp) * (1 / fn - 1)), model)


def allocate_budget(b: float, fp: float, fn: float, model: FilterModel | float | None = None) -> BudgetSplit:
    """Backup gets ``clamp(b2*, 0, b)``; the rest goes to the initial filter."""
    _check_bits(b)
    b2 = min(b, max(0.0, optimal_backup_bits(fp, fn, model)))
    return BudgetSplit(b, b - b2, b2)


def plain_gain_threshold(fp: float, fn: float, b: float, model: FilterModel | float | None = None) -> float:
    """Largest oracle cost in bits/key at which a learned filter still matches a plain one."""
    return log_alpha(learned_fpr_model(fp, fn, b, model), model) - b


def sandwich_gain_threshold(fp: float, fn: float, model: FilterModel | float | None = None) -> float:
    """Oracle-cost bound for an optimally split sandwich; valid once ``b >= b2*``."""
    _check_open(fp, fn)
    return log_alpha(fp / (1 - fn), model) - optimal_backup_bits(fp, fn, model)


def empirical_fpr(decisions: Sequence[bool]) -> float:
    arr = np.asarray(decisions, dtype=bool)
    if arr.size == 0:
        raise ValueError("need at least one decision")
    return float(arr.mean())


def standard_error(rate: float, n: int) -> float:
    """Binomial standard error of a proportion estimated from ``n`` trials."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt(max(rate * (1 - rate), 0.0) / n)


def concentration_bound(t_size: int, q_size: int, epsilon: float) -> float:
    """Chernoff bound on P(|X - Y| >= epsilon) for empirical FPRs on sets of the given sizes."""
    if t_size < 1 or q_size < 1:
        raise ValueError("set sizes must be >= 1")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    e2 = epsilon * epsilon
    return min(1.0, 2 * math.exp(-e2 * t_size / 2) + 2 * math.exp(-e2 * q_size / 2))


def expected_fill_fraction(m_bits: int, k: int, n: int) -> float:
    return 1.0 - (1.0 - 1.0 / m_bits) ** (k * n)
