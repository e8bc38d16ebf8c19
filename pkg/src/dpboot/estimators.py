"""Plug-in estimators and their private counterparts.

Scalar tasks: mean with additive Laplace noise (scale 2b/(n eps) under
replace-one adjacency for data clipped to [-b, b]), variance with Laplace
noise at twice the 4b^2/n global sensitivity, and the inverse-sensitivity
median. Regression: ridge-regularized logistic regression by damped Newton,
privatized by objective perturbation (Gaussian linear tilt plus calibrated
ridge term).

The *_resampler factories build the batched resampled-statistic evaluators
the BLB routines use; each reproduces, draw for draw, what the scalar
mechanism would produce on child stream j of the given stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import expit

from . import _kernels
from .private_median import MedianConfig, priv_median
from .rng import RngStream, laplace_from_uniform
from .samples import Sample, resample_with_replacement


class ConvergenceError(RuntimeError):
    """Newton failed to reach the gradient tolerance."""

    def __init__(self, grad_norm: float, iterations: int):
        super().__init__(
            f"no convergence after {iterations} iterations (gradient norm {grad_norm:.3e})"
        )
        self.grad_norm = grad_norm
        self.iterations = iterations


class VarianceEstimate(NamedTuple):
    value: float
    clamped: bool


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimand a task targets and its data clipping bound."""

    kind: str  # mean | median | logreg-coordinate
    clip_bound: float = 1.0
    coordinate: int = 0

    def __post_init__(self):
        if self.kind in ("mean", "median") and self.clip_bound <= 0:
            raise ValueError("clip_bound must be positive for scalar tasks")


def mean_plugin(sample: Sample) -> float:
    return float(np.mean(sample.values))


def median_plugin(sample: Sample) -> float:
    """Lower-of-two-middles sample median (frozen convention)."""
    v = np.sort(sample.values)
    return float(v[(v.size - 1) // 2])


def laplace_mean_mech(sample: Sample, b: float, epsilon: float, rng: RngStream) -> float:
    """Clipped mean plus Laplace(0, 2b/(n epsilon)) noise; eps-DP."""
    if b <= 0:
        raise ValueError("b must be positive")
    v = np.clip(sample.values, -b, b)
    scale = 0.0 if math.isinf(epsilon) else 2.0 * b / (v.size * epsilon)
    return float(np.mean(v)) + rng.laplace(0.0, scale)


def laplace_variance_mech(sample: Sample, b: float, epsilon: float, rng: RngStream) -> VarianceEstimate:
    """Sample variance plus Laplace(0, 8 b^2 / (n epsilon)); negative output clamps to 0."""
    if b <= 0:
        raise ValueError("b must be positive")
    v = np.clip(sample.values, -b, b)
    var = float(np.mean(v * v) - np.mean(v) ** 2)
    scale = 0.0 if math.isinf(epsilon) else 8.0 * b * b / (v.size * epsilon)
    noisy = var + rng.laplace(0.0, scale)
    if noisy < 0.0:
        return VarianceEstimate(0.0, True)
    return VarianceEstimate(noisy, False)


def inv_sens_median_mech(sample: Sample, cfg: MedianConfig, rng: RngStream) -> float:
    return priv_median(sample.values, cfg, rng)


# ---------------------------------------------------------------------------
# Logistic regression


def _logreg_parts(theta, X, y, lam, w):
    z = X @ theta
    obj = float(np.mean(np.logaddexp(0.0, z) - y * z)) + 0.5 * lam * float(theta @ theta)
    obj += float(w @ theta)
    p = expit(z)
    grad = X.T @ (p - y) / len(y) + lam * theta + w
    return obj, grad, p


def logreg_fit(
    sample: Sample,
    lam: float = 0.0,
    w=None,
    tol: float = 1e-10,
    max_iter: int = 100,
) -> np.ndarray:
    """Minimize mean logistic loss + (lam/2)||theta||^2 + <w, theta> by Newton.

    Damped Newton with Armijo backtracking (c = 1e-4); returns once the
    gradient norm is at or below tol, else raises ConvergenceError carrying
    the last gradient norm.
    """
    if not sample.is_regression:
        raise ValueError("logreg_fit needs a regression sample")
    if lam < 0 or tol <= 0:
        raise ValueError("lam must be nonnegative and tol positive")
    X, y = sample.features, sample.labels
    n, d = X.shape
    w = np.zeros(d) if w is None else np.asarray(w, float)
    theta = np.zeros(d)
    obj, grad, p = _logreg_parts(theta, X, y, lam, w)
    for _ in range(max_iter):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= tol:
            return theta
        weights = p * (1.0 - p)
        hess = (X.T * weights) @ X / n + lam * np.eye(d)
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            step = np.linalg.solve(hess + 1e-12 * np.eye(d), -grad)
        slope = float(grad @ step)
        eta = 1.0
        for _ in range(60):
            cand = theta + eta * step
            cand_obj, cand_grad, cand_p = _logreg_parts(cand, X, y, lam, w)
            if cand_obj <= obj + 1e-4 * eta * slope:
                break
            eta *= 0.5
        theta, obj, grad, p = cand, cand_obj, cand_grad, cand_p
    gnorm = float(np.linalg.norm(grad))
    if gnorm <= tol:
        return theta
    raise ConvergenceError(gnorm, max_iter)


@dataclass(frozen=True)
class ObjPertConfig:
    """Objective-perturbation calibration for an (epsilon, delta) budget.

    lip0/lip1 are the loss and gradient Lipschitz constants (for logistic
    loss on features of l2 radius r: lip0 = r, lip1 = r^2/4), hessian_rank
    is 1 for any GLM loss, and calib_const is the unspecified numerical
    constant in the calibration, exposed rather than hidden.
    """

    epsilon: float
    delta: float
    lip0: float
    lip1: float
    dim: int
    hessian_rank: int = 1
    calib_const: float = 2.0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must be in (0, 1)")
        if self.dim < 1:
            raise ValueError("dim must be at least 1")

    def sigma2(self, n: int) -> float:
        """Tilt variance: C lip0^2 (d + log(1/delta)) / (n eps)^2."""
        if math.isinf(self.epsilon):
            return 0.0
        num = self.calib_const * self.lip0**2 * (self.dim + math.log(1.0 / self.delta))
        return num / (n * self.epsilon) ** 2

    def lam(self, n: int) -> float:
        """Ridge weight: C min(rank, d) lip1 / (n eps)."""
        if math.isinf(self.epsilon):
            return 0.0
        return self.calib_const * min(self.hessian_rank, self.dim) * self.lip1 / (n * self.epsilon)


def obj_pert_logreg(
    sample: Sample, cfg: ObjPertConfig, rng: RngStream, tol: float = 1e-10
) -> np.ndarray:
    """(epsilon, delta)-DP logistic fit: draw W ~ N(0, sigma^2 I), tilt, solve."""
    n, d = sample.features.shape
    if d != cfg.dim:
        raise ValueError(f"config dim {cfg.dim} does not match sample dim {d}")
    sigma = math.sqrt(cfg.sigma2(n))
    w = rng.normals(d, sigma=sigma)
    return logreg_fit(sample, lam=cfg.lam(n), w=w, tol=tol)


# ---------------------------------------------------------------------------
# Batched resampled private statistics for the BLB routines


def laplace_mean_resampler(b: float, epsilon: float) -> Callable:
    """Batch evaluator: private mean of each of n_mc resamples of size n_out."""

    def run(sub: Sample, n_out: int, n_mc: int, rng: RngStream) -> np.ndarray:
        vals = np.clip(sub.values, -b, b)
        means = _kernels.resample_means(vals, n_out, n_mc, rng.seed, rng.stream_id)
        scale = 0.0 if math.isinf(epsilon) else 2.0 * b / (n_out * epsilon)
        u = _kernels.child_uniform_block(rng.seed, rng.stream_id, n_mc, n_out)
        return means + laplace_from_uniform(u, 0.0, scale)

    return run


def plugin_mean_resampler(b: float | None = None) -> Callable:
    """Batch evaluator for the noiseless mean (clipped when b is given)."""

    def run(sub: Sample, n_out: int, n_mc: int, rng: RngStream) -> np.ndarray:
        vals = sub.values if b is None else np.clip(sub.values, -b, b)
        return _kernels.resample_means(vals, n_out, n_mc, rng.seed, rng.stream_id)

    return run


def plugin_median_resampler() -> Callable:
    """Batch evaluator for the noiseless lower-middle median of each resample."""

    def run(sub: Sample, n_out: int, n_mc: int, rng: RngStream) -> np.ndarray:
        return _kernels.resample_medians(sub.values, n_out, n_mc, rng.seed, rng.stream_id)

    return run


def inv_sens_median_resampler(cfg: MedianConfig) -> Callable:
    """Batch evaluator: inverse-sensitivity median of each resample."""

    def run(sub: Sample, n_out: int, n_mc: int, rng: RngStream) -> np.ndarray:
        return _kernels.resample_privmedians(
            sub.values,
            n_out,
            n_mc,
            cfg.epsilon,
            cfg.rho,
            cfg.range_lo,
            cfg.range_hi,
            rng.seed,
            rng.stream_id,
        )

    return run


def loop_resampler(priv_fn: Callable) -> Callable:
    """Generic fallback: one resample_with_replacement + priv_fn call per draw."""

    def run(sub: Sample, n_out: int, n_mc: int, rng: RngStream) -> np.ndarray:
        out = np.empty(n_mc)
        for j in range(n_mc):
            rj = rng.child(j)
            out[j] = priv_fn(resample_with_replacement(sub, n_out, rj), rj)
        return out

    return run
