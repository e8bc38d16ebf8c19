"""Data generation and ingestion for the reproduction harness."""

from __future__ import annotations

import csv
import math
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr, ndtri

from .rng import RngStream
from .samples import Sample

ADULT_COLUMNS = ("age", "school", "hours", "sex", "label")


class TruncatedGaussianMoments(NamedTuple):
    mean: float
    variance: float
    median: float


def truncated_gaussian_moments(mu: float, sigma2: float, lo: float, hi: float) -> TruncatedGaussianMoments:
    """Closed-form mean/variance (Mills ratios) and median of N(mu, sigma2) on [lo, hi]."""
    if not lo < hi:
        raise ValueError("lo must be strictly below hi")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    sigma = math.sqrt(sigma2)
    a = (lo - mu) / sigma
    b = (hi - mu) / sigma
    phi = lambda t: math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    Fa, Fb = float(ndtr(a)), float(ndtr(b))
    z = Fb - Fa
    if z < 1e-12:
        raise ValueError("truncation window carries almost no probability mass")
    mean = mu + sigma * (phi(a) - phi(b)) / z
    var = sigma2 * (1.0 + (a * phi(a) - b * phi(b)) / z - ((phi(a) - phi(b)) / z) ** 2)
    median = mu + sigma * float(ndtri((Fa + Fb) / 2.0))
    return TruncatedGaussianMoments(mean, var, median)


def gen_truncated_gaussian(
    n: int, mu: float, sigma2: float, lo: float, hi: float, rng: RngStream
) -> Sample:
    """n i.i.d. draws by inverse CDF restricted to the truncation window."""
    if not lo < hi:
        raise ValueError("lo must be strictly below hi")
    sigma = math.sqrt(sigma2)
    Fa = float(ndtr((lo - mu) / sigma))
    Fb = float(ndtr((hi - mu) / sigma))
    if Fb - Fa < 1e-12:
        raise ValueError("truncation window carries almost no probability mass")
    u = rng.uniforms(n)
    x = mu + sigma * ndtri(Fa + u * (Fb - Fa))
    return Sample.scalar(np.clip(x, lo, hi))


def load_adult_csv(path: str) -> Sample:
    """Load the normalized income CSV into a regression sample.

    Expects header columns age, school, hours, sex, label with every value in
    [0, 1]; appends an intercept column so features are 5-dimensional. Rows
    with missing or out-of-range fields are rejected, all offending row
    numbers reported.
    """
    rows = []
    bad: list[int] = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise FileNotFoundError(f"cannot open dataset {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        missing = [c for c in ADULT_COLUMNS if reader.fieldnames is None or c not in reader.fieldnames]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        for lineno, rec in enumerate(reader, start=2):
            try:
                vals = [float(rec[c]) for c in ADULT_COLUMNS]
            except (TypeError, ValueError):
                bad.append(lineno)
                continue
            if any(not (0.0 <= v <= 1.0) for v in vals):
                bad.append(lineno)
                continue
            rows.append(vals)
    if bad:
        raise ValueError(f"{path}: rejected rows (out-of-range or malformed): {bad}")
    if not rows:
        raise ValueError(f"{path}: no usable rows")
    data = np.asarray(rows)
    X = np.hstack([data[:, :4], np.ones((len(rows), 1))])
    return Sample.regression(X, data[:, 4])


def gen_synthetic_logreg(n: int, theta_star, rng: RngStream) -> Sample:
    """Synthetic stand-in for the income task: 4 uniform features in [0, 1],
    an intercept column, and Bernoulli labels from the logistic model."""
    theta_star = np.asarray(theta_star, float)
    d = theta_star.size
    u = rng.uniforms(n * (d - 1)).reshape(n, d - 1)
    X = np.hstack([u, np.ones((n, 1))])
    p = 1.0 / (1.0 + np.exp(-(X @ theta_star)))
    y = (rng.uniforms(n) < p).astype(float)
    return Sample.regression(X, y)
