"""Differentially private bootstrap confidence intervals.

Private variants of the non-parametric bag of little bootstraps: a
percentile route (nested-set index selected by a median-above-threshold
scan) and a normal-approximation route (bootstrap variance aggregated by a
private median), together with the private point estimators they wrap and a
reproduction harness for coverage/width experiments.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .above_threshold import AboveThrNoise, above_thr, above_thr_many, draw_abovethr_noise
from .blb import (
    BlbConfig,
    ConfidenceInterval,
    IntervalFamily,
    blb_quant,
    blb_var,
    boot_var,
    nonprivate_bootstrap_ci,
    normal_ci,
    percentile_ci,
)
from .datasets import gen_truncated_gaussian, load_adult_csv, truncated_gaussian_moments
from .estimators import (
    ConvergenceError,
    EstimatorSpec,
    ObjPertConfig,
    VarianceEstimate,
    inv_sens_median_mech,
    laplace_mean_mech,
    laplace_variance_mech,
    logreg_fit,
    mean_plugin,
    median_plugin,
    obj_pert_logreg,
)
from .harness import ExperimentConfig, TrialRecord, evaluate_coverage, run_experiment
from .noise import (
    LaplaceSpec,
    gaussian_vector_sample,
    laplace_sample,
    laplace_sum_tail,
    laplace_tail,
)
from .private_median import MedianConfig, priv_median, priv_median_draws, smoothed_length
from .rng import RngStream
from .samples import Partition, Sample, ord_st, partition_disjoint, quantile, resample_with_replacement

__version__ = "0.1.0"

__all__ = [
    "AboveThrNoise",
    "BlbConfig",
    "ConfidenceInterval",
    "ConvergenceError",
    "EstimatorSpec",
    "ExperimentConfig",
    "IntervalFamily",
    "KERNEL_BACKEND",
    "LaplaceSpec",
    "MedianConfig",
    "ObjPertConfig",
    "Partition",
    "RngStream",
    "Sample",
    "TrialRecord",
    "VarianceEstimate",
    "above_thr",
    "above_thr_many",
    "blb_quant",
    "blb_var",
    "boot_var",
    "draw_abovethr_noise",
    "evaluate_coverage",
    "gaussian_vector_sample",
    "gen_truncated_gaussian",
    "inv_sens_median_mech",
    "laplace_mean_mech",
    "laplace_sample",
    "laplace_sum_tail",
    "laplace_tail",
    "laplace_variance_mech",
    "load_adult_csv",
    "logreg_fit",
    "mean_plugin",
    "median_plugin",
    "nonprivate_bootstrap_ci",
    "normal_ci",
    "obj_pert_logreg",
    "ord_st",
    "partition_disjoint",
    "percentile_ci",
    "priv_median",
    "priv_median_draws",
    "quantile",
    "resample_with_replacement",
    "run_experiment",
    "smoothed_length",
    "truncated_gaussian_moments",
]
