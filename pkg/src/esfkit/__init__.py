"""Exact distributions and simulators for neutral allelic partitions."""
from .coalescent import run_ima_replicate, simulate_ima, simulate_tree, t_mrcas_statistics
from .combinatorics import longest_cycle_exact_tail, random_mapping_component_sizes, random_permutation_cycle_type
from .esf import (
    AllelicPartition,
    ExactProbability,
    check_consistency_recursion,
    check_noninterference,
    conditional_partition_given_k,
    esf_distribution,
    esf_probability,
    expected_k,
    k_distribution,
    partitions,
    rising_factorial,
    stirling1,
)
from .eve import eve_extinction_bounds, expected_eve_count, solve_eve_recurrence
from .finite import kesten_lambda, moran_stationary_samples, moran_theta
from .gem import (
    AgeOrderedSample,
    StickWeights,
    age_ordered_sample_probability,
    mean_jth_oldest,
    oldest_sample_count_distribution,
    sample_gem,
)
from .neutrality import NeutralityReport, conditional_null_sample, neutrality_test, sample_homozygosity
from .order_stats import OutOfRegionError, estimate_mean_order_statistic, largest_exceeds_half_probability

__all__ = [
    "AgeOrderedSample",
    "AllelicPartition",
    "ExactProbability",
    "NeutralityReport",
    "OutOfRegionError",
    "StickWeights",
    "age_ordered_sample_probability",
    "check_consistency_recursion",
    "check_noninterference",
    "conditional_null_sample",
    "conditional_partition_given_k",
    "esf_distribution",
    "esf_probability",
    "estimate_mean_order_statistic",
    "eve_extinction_bounds",
    "expected_eve_count",
    "expected_k",
    "k_distribution",
    "kesten_lambda",
    "largest_exceeds_half_probability",
    "longest_cycle_exact_tail",
    "mean_jth_oldest",
    "moran_stationary_samples",
    "moran_theta",
    "neutrality_test",
    "oldest_sample_count_distribution",
    "partitions",
    "random_mapping_component_sizes",
    "random_permutation_cycle_type",
    "rising_factorial",
    "run_ima_replicate",
    "sample_gem",
    "sample_homozygosity",
    "simulate_ima",
    "simulate_tree",
    "solve_eve_recurrence",
    "stirling1",
    "t_mrcas_statistics",
]
