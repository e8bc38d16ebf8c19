"""Median-above-threshold scan over a sequence of query vectors.

Scans T vectors in R^k and returns the first index t whose noisy order
statistic OrdSt(y(t), xi0 + xi_t) reaches the threshold, where the shared
offset xi0 ~ Laplace(k/2, 2/eps) and the per-query xi_t ~ Laplace(0, 4/eps).
Under that calibration the scan is eps-DP for inputs whose vectors differ in
at most one coordinate each. The floor inside OrdSt is part of the privacy
coupling and is kept exactly; with the noise at its mean the scan reads the
floor(k/2)-th order statistic.

A miss is a first-class None result, not an error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import RngStream, laplace_from_uniform


@dataclass(frozen=True)
class AboveThrNoise:
    """Noise bundle: shared offset xi0 (mean k/2) and per-query offsets xi."""

    xi0: float
    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", np.asarray(self.xi, float))


def draw_abovethr_noise(k: int, T: int, epsilon: float, rng: RngStream) -> AboveThrNoise:
    """Draw the calibrated noise up front (1 + T stream slots)."""
    if k < 1 or T < 1:
        raise ValueError("k and T must be at least 1")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    xi0 = rng.laplace(k / 2.0, 2.0 / epsilon)
    xi = rng.laplace(0.0, 4.0 / epsilon, T)
    return AboveThrNoise(xi0=xi0, xi=xi)


def _noisy_order_stats(queries: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """OrdSt(queries[t], idx[t]) for each row t, vectorized."""
    T, k = queries.shape
    srt = np.sort(queries, axis=1)
    pick = np.clip(np.floor(idx), 1, k).astype(np.int64) - 1
    vals = srt[np.arange(T), pick]
    vals = np.where(idx < 1, -np.inf, vals)
    return np.where(idx > k, np.inf, vals)


def above_thr(queries, tau: float, noise: AboveThrNoise):
    """First index t (1-based) with OrdSt(y(t), xi0 + xi_t) >= tau, else None."""
    q = np.asarray(queries, float)
    if q.ndim != 2 or q.shape[0] == 0:
        raise ValueError("queries must be a nonempty (T, k) array")
    T, k = q.shape
    if noise.xi.shape != (T,):
        raise ValueError(f"noise.xi must have length T={T}, got {noise.xi.shape}")
    vals = _noisy_order_stats(q, noise.xi0 + noise.xi)
    hits = vals >= tau
    if not hits.any():
        return None
    return int(np.argmax(hits)) + 1


def above_thr_many(queries, tau: float, epsilon: float, rng: RngStream, size: int) -> np.ndarray:
    """Output distribution sampler: `size` independent runs with fresh noise.

    Consumes size * (1 + T) slots, matching a loop of draw_abovethr_noise +
    above_thr on the same stream draw for draw. Returns 1-based indices with
    0 standing for the miss outcome.
    """
    q = np.asarray(queries, float)
    T, k = q.shape
    u = rng.uniforms(size * (1 + T)).reshape(size, 1 + T)
    xi0 = laplace_from_uniform(u[:, 0], k / 2.0, 2.0 / epsilon)
    xi = laplace_from_uniform(u[:, 1:], 0.0, 4.0 / epsilon)
    idx = xi0[:, None] + xi

    srt = np.sort(q, axis=1)
    pick = np.clip(np.floor(idx), 1, k).astype(np.int64) - 1
    vals = srt[np.arange(T)[None, :], pick]
    vals = np.where(idx < 1, -np.inf, vals)
    vals = np.where(idx > k, np.inf, vals)
    hits = vals >= tau
    first = np.argmax(hits, axis=1) + 1
    return np.where(hits.any(axis=1), first, 0).astype(np.int64)


def mean_noise(k: int, T: int) -> AboveThrNoise:
    """The zero-variance limit: xi0 = k/2, xi = 0 (reads OrdSt at floor(k/2))."""
    return AboveThrNoise(xi0=k / 2.0, xi=np.zeros(T))
