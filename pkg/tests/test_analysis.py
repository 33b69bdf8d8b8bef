import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from learnedbloom import analysis as A
from learnedbloom.analysis import FilterModel

ALPHA = 0.6185
rates = st.floats(0.001, 0.9)


def grid_best_b2(fp, fn, b, alpha, step=0.01):
    """Brute-force minimizer of the sandwich model over b2 in [0, b]."""
    grid = np.minimum(np.arange(0, int(b / step) + 1) * step, b)
    vals = [A.sandwich_fpr_model(fp, fn, b - g, g, alpha) for g in grid]
    i = int(np.argmin(vals))
    return grid[i], vals[i], min(vals)


def bisect(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = (lo + hi) / 2
        if (f(mid) > 0) == (flo > 0):
            lo, flo = mid, f(mid)
        else:
            hi = mid
    return (lo + hi) / 2


def test_filter_model_validation():
    for bad in (0.0, 1.0, 1.5, -0.1):
        with pytest.raises(ValueError):
            FilterModel(bad)


def test_log_alpha_domain():
    with pytest.raises(ValueError):
        A.log_alpha(0.0, ALPHA)
    with pytest.raises(ValueError):
        A.log_alpha(-1.0, ALPHA)
    assert A.log_alpha(ALPHA**3, ALPHA) == pytest.approx(3)


def test_bloom_model_fpp():
    assert A.bloom_model_fpp(8, ALPHA) == pytest.approx(0.0214, abs=5e-4)
    assert A.bloom_model_fpp(0, ALPHA) == 1
    assert A.bloom_model_fpp(10, ALPHA) == pytest.approx(0.00819, abs=1e-5)


def test_learned_fpr_model_examples():
    assert A.learned_fpr_model(0.01, 0.5, 5, ALPHA) == pytest.approx(0.0181, abs=5e-4)
    assert A.learned_fpr_model(0.01, 0.5, 10, ALPHA) == pytest.approx(0.010066, abs=1e-6)
    # the worked example's 0.010045 is a digit swap of this value
    assert A.learned_fpr_model(0.01, 0.5, 8, ALPHA) == pytest.approx(0.010454, abs=1e-6)
    assert A.learned_fpr_model(0, 1, 7, ALPHA) == pytest.approx(ALPHA**7)
    assert A.learned_fpr_model(0.3, 0, 7, ALPHA) == 0.3


@pytest.mark.parametrize("args", [(-0.1, 0.5, 1), (0.1, 1.5, 1), (0.1, 0.5, -1)])
def test_learned_fpr_model_rejects_bad_ranges(args):
    with pytest.raises(ValueError):
        A.learned_fpr_model(*args, ALPHA)


def test_sandwich_model_examples():
    assert A.sandwich_fpr_model(0.01, 0.5, 4, 6, ALPHA) == pytest.approx(0.001917, abs=1e-5)
    assert A.sandwich_fpr_model(0.01, 0.5, 2, 6, ALPHA) == pytest.approx(0.005012, abs=1e-4)
    assert A.sandwich_fpr_model(0.01, 0.5, 0, 6, ALPHA) == A.learned_fpr_model(0.01, 0.5, 6, ALPHA)


def test_optimal_backup_bits_example_and_erratum():
    b2 = A.optimal_backup_bits(0.01, 0.5, ALPHA)
    assert b2 == pytest.approx(4.78, abs=0.01)
    assert b2 == pytest.approx(A.log_alpha(1 / 99, ALPHA) / 2)
    for b in (8, 10):
        best, _, _ = grid_best_b2(0.01, 0.5, b, ALPHA)
        assert abs(best - b2) <= 0.01
        assert A.sandwich_fpr_model(0.01, 0.5, b - b2, b2, ALPHA) < A.sandwich_fpr_model(0.01, 0.5, b - 6, 6, ALPHA)


def test_optimal_backup_bits_zero_when_bracket_is_one():
    # fp = (1 - fp)(1/fn - 1) with fn = 0.5 forces fp = 0.5
    assert A.optimal_backup_bits(0.5, 0.5, ALPHA) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("fp,fn", [(0, 0.5), (1, 0.5), (0.1, 0), (0.1, 1)])
def test_optimal_backup_bits_undefined(fp, fn):
    with pytest.raises(A.UndefinedOptimumError):
        A.optimal_backup_bits(fp, fn, ALPHA)


def test_allocate_budget_examples():
    s = A.allocate_budget(8, 0.01, 0.5, ALPHA)
    assert s.b2 == pytest.approx(4.782, abs=1e-3) and s.b1 == pytest.approx(3.218, abs=1e-3)
    s = A.allocate_budget(2, 0.01, 0.5, ALPHA)
    assert (s.b1, s.b2) == (0, 2)


def test_budget_split_invariants():
    with pytest.raises(ValueError):
        A.BudgetSplit(5, 3, 3)
    with pytest.raises(ValueError):
        A.BudgetSplit(5, -1, 6)


@settings(max_examples=100, deadline=None)
@given(rates, rates, st.floats(0.5, 0.9), st.floats(0, 20))
def test_allocation_beats_every_grid_split(fp, fn, alpha, b):
    split = A.allocate_budget(b, fp, fn, alpha)
    got = A.sandwich_fpr_model(fp, fn, split.b1, split.b2, alpha)
    _, _, grid_min = grid_best_b2(fp, fn, b, alpha)
    assert got <= grid_min * (1 + 1e-12)


@settings(max_examples=100)
@given(rates, rates, st.floats(0.3, 0.95))
def test_first_order_condition(fp, fn, alpha):
    b2 = A.optimal_backup_bits(fp, fn, alpha)
    target = fp / ((1 - fp) * (1 / fn - 1))
    assert alpha ** (b2 / fn) == pytest.approx(target, rel=1e-10)
    # the leak through the backup filter settles at fp / (1/fn - 1)
    assert (1 - fp) * alpha ** (b2 / fn) == pytest.approx(fp / (1 / fn - 1), rel=1e-10)


@settings(max_examples=50)
@given(rates, rates, st.floats(0.3, 0.95))
def test_derivative_vanishes_at_optimum(fp, fn, alpha):
    b2 = A.optimal_backup_bits(fp, fn, alpha)
    assume(b2 > 1e-3)
    b = b2 + 5
    f = lambda b1: A.sandwich_fpr_model(fp, fn, b1, b - b1, alpha)
    h = 1e-4 * fn  # the backup term curves on a scale of fn bits
    b1 = b - b2
    central = (f(b1 + h) - f(b1 - h)) / (2 * h)
    scale = abs(f(b1 - 1) - f(b1)) + 1e-300
    assert abs(central) < 1e-5 * scale + 1e-12


@given(rates, rates)
def test_optimum_independent_of_budget(fp, fn):
    b2 = A.optimal_backup_bits(fp, fn, ALPHA)
    assume(b2 > 0)
    splits = [A.allocate_budget(b, fp, fn, ALPHA) for b in (b2 + 1, b2 + 5, b2 + 30)]
    assert all(s.b2 == b2 for s in splits)


def test_plain_gain_threshold_examples():
    t = A.plain_gain_threshold(0.01, 0.5, 8, ALPHA)
    assert t == pytest.approx(1.49, abs=0.005)
    target = A.learned_fpr_model(0.01, 0.5, 8, ALPHA)
    root = bisect(lambda z: ALPHA ** (8 + z) - target, -5, 20)
    assert t == pytest.approx(root, abs=1e-9)
    assert A.plain_gain_threshold(0, 1, 8, ALPHA) == pytest.approx(0, abs=1e-12)


@settings(max_examples=100)
@given(rates, rates, st.floats(0.3, 0.95), st.floats(0, 30))
def test_plain_gain_threshold_identity(fp, fn, alpha, b):
    t = A.plain_gain_threshold(fp, fn, b, alpha)
    assert alpha ** (b + t) == pytest.approx(A.learned_fpr_model(fp, fn, b, alpha), rel=1e-12)


def test_sandwich_gain_threshold_example():
    assert A.sandwich_gain_threshold(0.01, 0.5, ALPHA) == pytest.approx(3.36, abs=0.02)


@settings(max_examples=100)
@given(rates, rates, st.floats(0.3, 0.95))
def test_sandwich_gain_threshold_identity(fp, fn, alpha):
    b2 = A.optimal_backup_bits(fp, fn, alpha)
    b = 10.0
    assume(0 <= b2 <= b)
    t = A.sandwich_gain_threshold(fp, fn, alpha)
    model = A.sandwich_fpr_model(fp, fn, b - b2, b2, alpha)
    assert alpha ** (b + t) == pytest.approx(model, rel=1e-9)


def test_empirical_fpr():
    assert A.empirical_fpr([False] * 5) == 0
    assert A.empirical_fpr([True] * 5) == 1
    assert A.empirical_fpr([True] * 17 + [False] * 83) == pytest.approx(0.17)
    with pytest.raises(ValueError):
        A.empirical_fpr([])


def test_concentration_bound():
    assert A.concentration_bound(10**5, 10**5, 0.02) == pytest.approx(4 * math.exp(-20), rel=1e-12)
    assert A.concentration_bound(10**5, 10**5, 5.0) < 1e-30
    assert A.concentration_bound(1, 1, 1e-6) == 1.0
    for args in ((0, 1, 0.1), (1, 0, 0.1), (1, 1, 0)):
        with pytest.raises(ValueError):
            A.concentration_bound(*args)
