"""Inverse-sensitivity private median via exact smoothed level sets.

The score of a candidate y is the number of data points between y and the
sample median (the median itself included, per the score's half-open
intervals), smoothed by taking the infimum over a +-rho window. Because the
raw score is a step function with breakpoints at the data values, the level
sets {y : score(y) = l} are finite unions of intervals whose endpoints are
data values shifted by +-rho, so their measures are computed exactly; any
grid discretization here would break the mechanism's sampling measure.

The mechanism draws a level with probability proportional to
|I_l| * exp(-l * epsilon / 2) (in log space, so large levels cannot
underflow the categorical), then a uniform position inside the level set.
Level 0 is always present: the score vanishes on the rho-window around the
sample median, so degenerate inputs still succeed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import RngStream


@dataclass(frozen=True)
class MedianConfig:
    epsilon: float
    rho: float
    range_lo: float
    range_hi: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if not self.range_lo < self.range_hi:
            raise ValueError("range_lo must be strictly below range_hi")


def _lower_median(sorted_values: np.ndarray) -> float:
    """Lower-of-two-middles convention; the score is defined relative to it."""
    return float(sorted_values[(len(sorted_values) - 1) // 2])


def smoothed_length(values, y: float, rho: float) -> int:
    """inf over |z - y| < rho of the number of points between z and the median.

    Counted with multiplicity over the half-open intervals (z, med] / [med, z),
    so the median point itself contributes whenever z != med.
    """
    v = np.asarray(values, float)
    if v.size == 0:
        raise ValueError("values must be nonempty")
    if rho <= 0:
        raise ValueError("rho must be positive")
    s = np.sort(v)
    med = _lower_median(s)
    if abs(y - med) < rho:
        return 0
    if y >= med + rho:
        return int(np.searchsorted(s, y - rho, side="right") - np.searchsorted(s, med, side="left"))
    return int(np.searchsorted(s, med, side="right") - np.searchsorted(s, y + rho, side="left"))


def median_level_sets(values, rho: float, range_lo: float, range_hi: float):
    """Exact level-set geometry of the smoothed score over [range_lo, range_hi].

    `values` must already lie inside the range. Returns a dict of arrays over
    levels l = 0..n: total measure `meas`, plus the clipped left piece
    (start `la`, length `ml`) and right piece (start `ra`, length `mr`) for
    l >= 1; `a0` is the start of the level-0 window. Levels that do not occur
    have zero measure.
    """
    s = np.sort(np.asarray(values, float))
    n = s.size
    med = _lower_median(s)
    left_of = int(np.searchsorted(s, med, side="left"))
    upto = int(np.searchsorted(s, med, side="right"))

    lv = np.arange(1, n + 1)
    ra_idx = left_of + lv - 1
    valid_r = ra_idx <= n - 1
    ra = s[np.minimum(ra_idx, n - 1)] + rho
    rb = np.where(ra_idx + 1 <= n - 1, s[np.minimum(ra_idx + 1, n - 1)] + rho, np.inf)
    ra_c = np.maximum(ra, range_lo)
    mr = np.where(valid_r, np.clip(np.minimum(rb, range_hi) - ra_c, 0.0, None), 0.0)

    lb_idx = upto - lv
    valid_l = lb_idx >= 0
    lb = s[np.maximum(lb_idx, 0)] - rho
    la = np.where(lb_idx - 1 >= 0, s[np.maximum(lb_idx - 1, 0)] - rho, -np.inf)
    la_c = np.maximum(la, range_lo)
    ml = np.where(valid_l, np.clip(np.minimum(lb, range_hi) - la_c, 0.0, None), 0.0)

    a0 = max(med - rho, range_lo)
    meas0 = max(min(med + rho, range_hi) - a0, 0.0)
    meas = np.concatenate(([meas0], ml + mr))
    return {"meas": meas, "ml": ml, "mr": mr, "la": la_c, "ra": ra_c, "a0": a0}


def priv_median_draws(values, cfg: MedianConfig, rng: RngStream, count: int) -> np.ndarray:
    """`count` independent draws of the mechanism on a fixed input vector.

    Each draw consumes two stream slots (level choice, position), so a
    single draw equals priv_median on the same stream.
    """
    v = np.clip(np.asarray(values, float), cfg.range_lo, cfg.range_hi)
    if v.size == 0:
        raise ValueError("values must be nonempty")
    geo = median_level_sets(v, cfg.rho, cfg.range_lo, cfg.range_hi)
    meas = geo["meas"]
    with np.errstate(divide="ignore"):
        logw = np.where(meas > 0.0, np.log(meas), -np.inf)
    pen = np.arange(meas.size, dtype=float)
    pen[1:] *= cfg.epsilon / 2.0  # level 0 carries no penalty even at eps = inf
    logw -= pen
    w = np.exp(logw - logw.max())
    cum = np.cumsum(w)

    u = rng.uniforms(2 * count).reshape(count, 2)
    target = u[:, 0] * cum[-1]
    ksel = (cum[None, :] < target[:, None]).sum(axis=1)

    j = np.maximum(ksel - 1, 0)
    ml, mr = geo["ml"][j], geo["mr"][j]
    x = u[:, 1] * (ml + mr)
    out = np.where((x < ml) | (mr == 0.0), geo["la"][j] + x, geo["ra"][j] + (x - ml))
    out = np.where(ksel == 0, geo["a0"] + u[:, 1] * meas[0], out)
    return np.clip(out, cfg.range_lo, cfg.range_hi)


def priv_median(values, cfg: MedianConfig, rng: RngStream) -> float:
    """epsilon-DP median estimate in [range_lo, range_hi] (values clipped first)."""
    return float(priv_median_draws(values, cfg, rng, 1)[0])
