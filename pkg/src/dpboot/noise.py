"""Laplace and Gaussian noise primitives with their analytic tail functions.

The tail formulas double as test oracles for the samplers; the two-scale
Laplace sum tail is the one that calibrates the above-threshold scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RngStream


@dataclass(frozen=True)
class LaplaceSpec:
    """Laplace(location, scale) with density exp(-|x-loc|/scale) / (2 scale)."""

    location: float
    scale: float

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError(f"Laplace scale must be positive, got {self.scale}")


def laplace_sample(spec: LaplaceSpec, rng: RngStream) -> float:
    """One inverse-CDF Laplace draw (consumes one stream slot)."""
    return rng.laplace(spec.location, spec.scale)


def laplace_sample_block(spec: LaplaceSpec, rng: RngStream, count: int) -> np.ndarray:
    return rng.laplace(spec.location, spec.scale, count)


def laplace_tail(scale: float, t: float) -> float:
    """P(|X| > t) for X ~ Laplace(0, scale)."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    if t < 0:
        raise ValueError("t must be nonnegative")
    return math.exp(-t / scale)


def laplace_sum_tail(b1: float, b2: float, t: float) -> float:
    """P(|X1 + X2| > t) for independent centered Laplace draws with scales b1, b2.

    Equals b1^2/(b1^2-b2^2) e^{-t/b1} + b2^2/(b2^2-b1^2) e^{-t/b2}, evaluated
    in the cancellation-free form e^{-t/b2} (1 + b1^2/(b1+b2) expm1(t d/(b1 b2))/d)
    with d = b1 - b2, which stays accurate for nearly equal scales. Exactly
    equal scales are rejected (the formula is singular there).
    """
    if b1 <= 0 or b2 <= 0:
        raise ValueError("scales must be positive")
    if b1 == b2:
        raise ValueError("laplace_sum_tail is undefined at b1 == b2")
    if t < 0:
        raise ValueError("t must be nonnegative")
    d = b1 - b2
    x = t * d / (b1 * b2)
    if abs(x) < 1.0:
        # the two exponentials nearly cancel here; expm1 keeps full precision
        # (x underflows to 0 for denormal-tiny d, where expm1(x)/d takes its limit)
        ratio = t / (b1 * b2) if x == 0.0 else math.expm1(x) / d
        return math.exp(-t / b2) * (1.0 + b1 * b1 / (b1 + b2) * ratio)
    c1 = b1 * b1 / (b1 * b1 - b2 * b2)
    return c1 * math.exp(-t / b1) + (1.0 - c1) * math.exp(-t / b2)


def gaussian_vector_sample(dim: int, sigma: float, rng: RngStream) -> np.ndarray:
    """dim independent N(0, sigma^2) coordinates (two stream slots each)."""
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    return rng.normals(dim, sigma=sigma)
