"""Learned Bloom filters, sandwiched learned Bloom filters and Bloomier filters.

Real filters, closed-form space/FPR models for them, and a seeded harness
comparing the two.
"""
from .analysis import (FilterModel, allocate_budget, bloom_model_fpp, concentration_bound, learned_fpr_model,
                       optimal_backup_bits, plain_gain_threshold, sandwich_fpr_model, sandwich_gain_threshold)
from .bloom import BloomFilter, optimal_hash_count
from .bloomier import BloomierFilter, BloomierParams, build_bloomier, build_learned_bloomier
from .learned_filter import LearnedBloomFilter, SandwichedLearnedBloomFilter, build_learned, build_sandwich
from .oracle import IntervalOracle, BucketHistogramOracle, ValueOracle, profile, sweep_thresholds

__version__ = "0.1.0"
