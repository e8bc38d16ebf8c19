"""Samples, order statistics, quantiles, resampling and disjoint partitioning."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RngStream


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Sample:
    """An ordered multiset of observations, scalar or (features, label) records.

    Immutable once constructed; the two record kinds never mix.
    """

    values: np.ndarray | None = None
    features: np.ndarray | None = None
    labels: np.ndarray | None = None

    def __post_init__(self):
        if self.values is not None:
            if self.features is not None or self.labels is not None:
                raise ValueError("scalar and regression records cannot mix in one Sample")
            object.__setattr__(self, "values", _readonly(np.asarray(self.values, float)))
            if self.values.ndim != 1 or self.values.size == 0:
                raise ValueError("scalar sample must be a nonempty 1-d array")
        else:
            if self.features is None or self.labels is None:
                raise ValueError("regression sample needs both features and labels")
            X = np.asarray(self.features, float)
            y = np.asarray(self.labels, float)
            if X.ndim != 2 or X.shape[0] == 0 or y.shape != (X.shape[0],):
                raise ValueError("features must be (n, d) with matching labels (n,)")
            object.__setattr__(self, "features", _readonly(X))
            object.__setattr__(self, "labels", _readonly(y))

    @classmethod
    def scalar(cls, values) -> "Sample":
        return cls(values=np.asarray(values, float))

    @classmethod
    def regression(cls, features, labels) -> "Sample":
        return cls(features=features, labels=labels)

    @property
    def is_regression(self) -> bool:
        return self.values is None

    @property
    def n(self) -> int:
        return len(self.labels) if self.is_regression else len(self.values)

    def take(self, indices) -> "Sample":
        idx = np.asarray(indices)
        if self.is_regression:
            return Sample.regression(self.features[idx], self.labels[idx])
        return Sample.scalar(self.values[idx])


@dataclass(frozen=True)
class Partition:
    """Disjoint subsamples of equal size m plus the n mod m leftover records."""

    subsamples: list
    leftover: Sample | None


def ord_st(y, xi: float) -> float:
    """The floor(xi)-th order statistic of y, with limiting extremes.

    Returns -inf for xi < 1 and +inf for xi > len(y) (1-based ranks).
    """
    y = np.asarray(y, float)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("y must be a nonempty vector")
    k = y.size
    if xi < 1:
        return -math.inf
    if xi > k:
        return math.inf
    return float(np.sort(y)[int(math.floor(xi)) - 1])


def quantile(values, beta: float) -> float:
    """Left-continuous quantile: smallest v with empirical CDF(v) >= beta.

    No interpolation; this is the inf-based definition, so percentile CI
    endpoints land exactly on observed values.
    """
    v = np.asarray(values, float)
    if v.size == 0:
        raise ValueError("values must be nonempty")
    if not (0.0 < beta <= 1.0):
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    # guard against products like 0.95 * 160 landing an ulp above the integer
    rank = math.ceil(beta * v.size - 1e-9)
    rank = min(max(rank, 1), v.size)
    return float(np.sort(v)[rank - 1])


def resample_with_replacement(sample: Sample, n_out: int, rng: RngStream) -> Sample:
    """i.i.d. with-replacement resample of size n_out (one slot per draw)."""
    if n_out < 1:
        raise ValueError("n_out must be positive")
    idx = rng.integers(sample.n, n_out)
    return sample.take(idx)


def partition_disjoint(sample: Sample, m: int, rng: RngStream) -> Partition:
    """Random split into s = floor(n/m) disjoint blocks of size m.

    A random permutation (argsort of per-index random keys) is cut into
    consecutive blocks; the n - s*m trailing records become the leftover.
    """
    n = sample.n
    if not (1 <= m <= n):
        raise ValueError(f"m must be in [1, n], got m={m}, n={n}")
    perm = np.argsort(rng.u64(n), kind="stable")
    s = n // m
    subs = [sample.take(perm[i * m : (i + 1) * m]) for i in range(s)]
    rest = perm[s * m :]
    leftover = sample.take(rest) if rest.size else None
    return Partition(subsamples=subs, leftover=leftover)
