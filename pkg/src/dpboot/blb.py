"""Bag-of-little-bootstraps interval machinery.

Two private routes to a confidence set around a private point estimate:

* blb_quant scans a nested family of symmetric sets I_t = [-h t, h t] for the
  first one whose bootstrap coverage estimate clears 1 - alpha, aggregating
  the per-subsample estimates with the median-above-threshold scan. The index
  it returns turns into the percentile interval center +- h t / sqrt(n).

* blb_var bootstraps the mean squared error of the sqrt(n)-scaled estimator
  error on each subsample and aggregates with the private median, feeding a
  normal-approximation interval.

Both partition the data into s = floor(n/m) disjoint subsamples so one record
touches exactly one per-subsample statistic; privacy then rides on the
aggregator alone. The non-private full-sample bootstrap baseline lives here
too.

Rather than re-resampling for every t as the nested scan is written, each
subsample draws its resamples once and gets every p_hat(t) by sorting the
absolute centered statistics and thresholding, which is distributionally
identical for symmetric nested sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable

import numpy as np

from .above_threshold import above_thr, draw_abovethr_noise
from .private_median import MedianConfig, priv_median
from .rng import RngStream
from .samples import Partition, Sample, partition_disjoint, quantile, resample_with_replacement

# rng lanes within one interval-mechanism call
_LANE_PARTITION = 0
_LANE_SUBSAMPLE = 1
_LANE_AGGREGATE = 2


@dataclass(frozen=True)
class IntervalFamily:
    """Nested symmetric sets I_t = [-h t, h t], t = 1..T, on the sqrt(n) scale."""

    h: float
    T: int

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("resolution h must be positive")
        if self.T < 1:
            raise ValueError("T must be at least 1")

    def half_widths(self) -> np.ndarray:
        return self.h * np.arange(1, self.T + 1)


@dataclass(frozen=True)
class BlbConfig:
    """Hyperparameters shared by the BLB interval mechanisms.

    s = floor(K log n / eps) subsamples (unless subsamples_override pins it),
    resolution h = c / sqrt(n), smoothing rho defaulting to 1/n and variance
    cap defaulting to n^2.
    """

    epsilon: float
    alpha: float = 0.05
    K: float = 10.0
    c: float = 1.0
    rho: float | None = None
    sigma_max_sq: float | None = None
    n_mc_override: int | None = None
    subsamples_override: int | None = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must be in (0, 1)")

    def subsample_count(self, n: int) -> int:
        if self.subsamples_override is not None:
            return self.subsamples_override
        if math.isinf(self.epsilon):
            return max(1, int(self.K))
        return max(1, int(self.K * math.log(max(n, 2)) / self.epsilon))

    def monte_carlo_count(self, n: int, s: int) -> int:
        if self.n_mc_override is not None:
            return self.n_mc_override
        return int(min(10000, max(100, n**1.5 / (s * math.log(max(n, 2))))))

    def rho_at(self, n: int) -> float:
        return 1.0 / n if self.rho is None else self.rho

    def sigma_max_sq_at(self, n: int) -> float:
        return float(n) ** 2 if self.sigma_max_sq is None else self.sigma_max_sq


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float
    center: float
    method: str
    index_or_var: float | int | None = None
    failed: bool = False

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def offsets(self) -> tuple[float, float]:
        """Endpoint offsets from the center (used by the coverage shortcut)."""
        return self.lo - self.center, self.hi - self.center


def failed_interval(center: float, method: str) -> ConfidenceInterval:
    return ConfidenceInterval(math.nan, math.nan, center, method, None, failed=True)


def _canonical(sub: Sample) -> Sample:
    """Sort scalar subsamples so resampled statistics depend on the multiset only."""
    if sub.is_regression:
        return sub
    return Sample.scalar(np.sort(sub.values))


def _resampled_stats(priv_fn, batch_priv_fn, sub, n_out, n_mc, rng):
    sub = _canonical(sub)
    if batch_priv_fn is not None:
        return np.asarray(batch_priv_fn(sub, n_out, n_mc, rng), float)
    out = np.empty(n_mc)
    for j in range(n_mc):
        rj = rng.child(j)
        out[j] = priv_fn(resample_with_replacement(sub, n_out, rj), rj)
    return out


def boot_var(
    theta_fn: Callable,
    priv_fn: Callable,
    subsample: Sample,
    n: int,
    n_mc: int,
    rng: RngStream,
    batch_priv_fn: Callable | None = None,
) -> float:
    """Bootstrap MSE of the sqrt(n)-scaled private estimator on one subsample.

    Resamples size n with replacement from the subsample, centers the private
    estimates at the saved plug-in value, and averages n * ||error||^2.
    """
    if n_mc < 1:
        raise ValueError("n_mc must be at least 1")
    subsample = _canonical(subsample)
    theta_hat = np.asarray(theta_fn(subsample), float)
    stats = _resampled_stats(priv_fn, batch_priv_fn, subsample, n, n_mc, rng)
    diff = np.atleast_2d((stats - theta_hat).T).T  # (n_mc, d) for vector thetas
    return float(n * np.mean(np.sum(diff * diff, axis=1)))


def _partition_for(sample: Sample, cfg: BlbConfig, rng: RngStream) -> tuple[Partition, int, int]:
    n = sample.n
    s = cfg.subsample_count(n)
    m = n // s
    if m < 1:
        raise ValueError(f"too many subsamples: s={s} exceeds n={n}")
    part = partition_disjoint(sample, m, rng.child(_LANE_PARTITION))
    return part, s, m


def blb_var(
    theta_fn: Callable,
    priv_fn: Callable,
    sample: Sample,
    cfg: BlbConfig,
    rng: RngStream,
    batch_priv_fn: Callable | None = None,
    boot_var_fn: Callable | None = None,
) -> float:
    """eps-DP variance estimate: private median of per-subsample BootVar values.

    boot_var_fn(subsample, n, rng) may replace the bootstrap stage (used by
    the accuracy-contract tests); values are clipped into [0, sigma_max^2]
    before aggregation, matching the private median's bounded range.
    """
    n = sample.n
    part, s, _ = _partition_for(sample, cfg, rng)
    n_mc = cfg.monte_carlo_count(n, s)
    v = np.empty(s)
    for i, sub in enumerate(part.subsamples):
        sub_rng = rng.child(_LANE_SUBSAMPLE, i)
        if boot_var_fn is not None:
            v[i] = boot_var_fn(sub, n, sub_rng)
        else:
            v[i] = boot_var(theta_fn, priv_fn, sub, n, n_mc, sub_rng, batch_priv_fn)
    cap = cfg.sigma_max_sq_at(n)
    v = np.clip(v, 0.0, cap)
    med_cfg = MedianConfig(cfg.epsilon, cfg.rho_at(n), 0.0, cap)
    return priv_median(v, med_cfg, rng.child(_LANE_AGGREGATE))


def coverage_curve(theta_hat: float, stats, n: int, half_widths) -> np.ndarray:
    """p_hat(t): fraction of sqrt(n)(theta_hat - stats) inside each [-h t, h t].

    Nondecreasing in t by construction since the sets are nested.
    """
    d = np.sort(np.abs(math.sqrt(n) * (theta_hat - np.asarray(stats, float))))
    return np.searchsorted(d, half_widths, side="right") / d.size


def blb_quant(
    theta_fn: Callable,
    priv_fn: Callable,
    sample: Sample,
    fam: IntervalFamily,
    cfg: BlbConfig,
    rng: RngStream,
    batch_priv_fn: Callable | None = None,
):
    """eps-DP index of the first set I_t with estimated coverage >= 1 - alpha.

    Returns the 1-based index t_hat, or None when even I_T never clears the
    noisy threshold; callers decide the miss policy.
    """
    n = sample.n
    part, s, _ = _partition_for(sample, cfg, rng)
    n_mc = cfg.monte_carlo_count(n, s)
    half = fam.half_widths()
    p_hat = np.empty((s, fam.T))
    for i, sub in enumerate(part.subsamples):
        sub = _canonical(sub)
        sub_rng = rng.child(_LANE_SUBSAMPLE, i)
        theta_hat = float(np.asarray(theta_fn(sub), float))
        stats = _resampled_stats(priv_fn, batch_priv_fn, sub, n, n_mc, sub_rng)
        p_hat[i] = coverage_curve(theta_hat, stats, n, half)
    noise = draw_abovethr_noise(s, fam.T, cfg.epsilon, rng.child(_LANE_AGGREGATE))
    return above_thr(p_hat.T, 1.0 - cfg.alpha, noise)


def percentile_ci(theta_tilde: float, fam: IntervalFamily, t_hat, n: int) -> ConfidenceInterval:
    """Center the selected set: theta_tilde + I_t_hat / sqrt(n)."""
    if t_hat is None:
        return failed_interval(theta_tilde, "percentile")
    if not (1 <= t_hat <= fam.T):
        raise ValueError(f"t_hat must be in [1, {fam.T}], got {t_hat}")
    half = fam.h * t_hat / math.sqrt(n)
    return ConfidenceInterval(
        theta_tilde - half, theta_tilde + half, theta_tilde, "percentile", int(t_hat)
    )


def normal_ci(theta_tilde: float, sigma2: float, n: int, alpha: float) -> ConfidenceInterval:
    """theta_tilde +- z_{1-alpha/2} sqrt(sigma2 / n)."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    z = NormalDist().inv_cdf(1.0 - alpha / 2.0)
    half = z * math.sqrt(sigma2 / n)
    return ConfidenceInterval(
        theta_tilde - half, theta_tilde + half, theta_tilde, "normal", sigma2
    )


def nonprivate_bootstrap_ci(
    sample: Sample,
    theta_fn: Callable,
    priv_fn: Callable,
    alpha: float,
    n_mc: int,
    rng: RngStream,
    batch_priv_fn: Callable | None = None,
    center: float | None = None,
) -> ConfidenceInterval:
    """Full-sample bootstrap baseline (non-private aggregation).

    Bootstraps U* = sqrt(n) (theta(P_n) - priv(P*_n)) and returns
    center + [quant_{alpha/2}(U*), quant_{1-alpha/2}(U*)] / sqrt(n), with the
    private point estimate as the center (drawn here when not supplied).
    """
    if n_mc < 100:
        raise ValueError("n_mc must be at least 100")
    n = sample.n
    theta_hat = float(np.asarray(theta_fn(sample), float))
    if center is None:
        center = float(priv_fn(sample, rng.child(0)))
    stats = _resampled_stats(priv_fn, batch_priv_fn, sample, n, n_mc, rng.child(1))
    u = math.sqrt(n) * (theta_hat - stats)
    lo_off = quantile(u, alpha / 2.0) / math.sqrt(n)
    hi_off = quantile(u, 1.0 - alpha / 2.0) / math.sqrt(n)
    return ConfidenceInterval(center + lo_off, center + hi_off, center, "nonprivate", None)
