"""Numpy implementation of the resampling kernels.

This is the fallback backend; `_ckern` implements the same functions in
Cython. Both consume the same counter-based stream slots: resample ``j``
drawn from parent stream ``sid`` uses the child stream ``child_id(sid, j)``,
with index draws at slots ``0..n_out-1`` and, for the private-median kernel,
the level/position uniforms at slots ``n_out`` and ``n_out+1``.

Integer and uniform outputs are bit-identical across backends; outputs that
go through libm transcendentals or float accumulation may differ by a few
ulps (see tests/test_kernels.py).
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_ONE = np.uint64(1)
_INV53 = 2.0**-53

# Cap on elements materialized per chunk inside the resample kernels.
_CHUNK_ELEMS = 2_000_000


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _stream_key(seed: int, stream_id: int) -> np.uint64:
    with np.errstate(over="ignore"):
        s = _mix64(np.uint64((seed + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF).reshape(1))
        t = _mix64(np.uint64(stream_id & 0xFFFFFFFFFFFFFFFF).reshape(1))
        return _mix64(s ^ t)[0]


def _child_keys(seed: int, stream_id: int, n_children: int) -> np.ndarray:
    """Stream keys of children child_id(stream_id, 0..n_children-1)."""
    with np.errstate(over="ignore"):
        j = np.arange(n_children, dtype=np.uint64)
        cids = _mix64(np.uint64(stream_id) + _GAMMA * (j + _ONE))
        s = _mix64(np.uint64((seed + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF).reshape(1))
        return _mix64(s ^ _mix64(cids))


def u64_block(seed: int, stream_id: int, start: int, count: int) -> np.ndarray:
    key = _stream_key(seed, stream_id)
    with np.errstate(over="ignore"):
        slots = np.arange(start, start + count, dtype=np.uint64)
        return _mix64(key + _GAMMA * (slots + _ONE))


def uniform_block(seed: int, stream_id: int, start: int, count: int) -> np.ndarray:
    x = u64_block(seed, stream_id, start, count)
    return ((x >> np.uint64(11)).astype(np.float64) + 0.5) * _INV53


def index_block(seed: int, stream_id: int, start: int, count: int, upper: int) -> np.ndarray:
    x = u64_block(seed, stream_id, start, count)
    return (x % np.uint64(upper)).astype(np.int64)


def child_uniform_block(seed: int, stream_id: int, n_children: int, slot: int) -> np.ndarray:
    """Slot `slot` uniform of each child stream j = 0..n_children-1."""
    keys = _child_keys(seed, stream_id, n_children)
    with np.errstate(over="ignore"):
        x = _mix64(keys + _GAMMA * np.uint64(slot + 1))
    return ((x >> np.uint64(11)).astype(np.float64) + 0.5) * _INV53


def _resample_matrix(values, n_out, keys):
    """Gathered resample values for one chunk of child keys: (len(keys), n_out)."""
    m = np.uint64(len(values))
    with np.errstate(over="ignore"):
        slots = _GAMMA * (np.arange(n_out, dtype=np.uint64) + _ONE)
        raw = _mix64(keys[:, None] + slots[None, :])
    return values[(raw % m).astype(np.int64)]


def resample_means(values, n_out: int, n_mc: int, seed: int, stream_id: int) -> np.ndarray:
    """Mean of each of `n_mc` with-replacement resamples of size `n_out`."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    keys = _child_keys(seed, stream_id, n_mc)
    out = np.empty(n_mc)
    step = max(1, _CHUNK_ELEMS // max(1, n_out))
    for lo in range(0, n_mc, step):
        hi = min(n_mc, lo + step)
        out[lo:hi] = _resample_matrix(values, n_out, keys[lo:hi]).mean(axis=1)
    return out


def resample_medians(values, n_out: int, n_mc: int, seed: int, stream_id: int) -> np.ndarray:
    """Lower-middle order statistic of each resample."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    keys = _child_keys(seed, stream_id, n_mc)
    out = np.empty(n_mc)
    mid = (n_out - 1) // 2
    step = max(1, _CHUNK_ELEMS // max(1, n_out))
    for lo in range(0, n_mc, step):
        hi = min(n_mc, lo + step)
        block = _resample_matrix(values, n_out, keys[lo:hi])
        out[lo:hi] = np.partition(block, mid, axis=1)[:, mid]
    return out


def resample_privmedians(
    values,
    n_out: int,
    n_mc: int,
    epsilon: float,
    rho: float,
    range_lo: float,
    range_hi: float,
    seed: int,
    stream_id: int,
) -> np.ndarray:
    """Inverse-sensitivity private median of each resample.

    Per resample: clip into [range_lo, range_hi], build the exact level sets
    of the rho-smoothed score, draw a level with probability proportional to
    measure * exp(-level * epsilon / 2), then a uniform position in it.
    """
    values = np.clip(np.ascontiguousarray(values, dtype=np.float64), range_lo, range_hi)
    keys = _child_keys(seed, stream_id, n_mc)
    out = np.empty(n_mc)
    step = max(1, (_CHUNK_ELEMS // 4) // max(1, n_out))
    with np.errstate(over="ignore"):
        u_lvl_all = _mix64(keys + _GAMMA * np.uint64(n_out + 1))
        u_pos_all = _mix64(keys + _GAMMA * np.uint64(n_out + 2))
    u_lvl_all = ((u_lvl_all >> np.uint64(11)).astype(np.float64) + 0.5) * _INV53
    u_pos_all = ((u_pos_all >> np.uint64(11)).astype(np.float64) + 0.5) * _INV53
    for lo in range(0, n_mc, step):
        hi = min(n_mc, lo + step)
        block = np.sort(_resample_matrix(values, n_out, keys[lo:hi]), axis=1)
        out[lo:hi] = _privmedian_rows(
            block, epsilon, rho, range_lo, range_hi, u_lvl_all[lo:hi], u_pos_all[lo:hi]
        )
    return out


def _privmedian_rows(s, epsilon, rho, lo, hi, u_level, u_pos):
    """Vectorized private-median draw, one per row of sorted matrix `s`."""
    rows, n = s.shape
    med = s[:, (n - 1) // 2]
    left_of = (s < med[:, None]).sum(axis=1)   # multiplicity counts around the median
    upto = (s <= med[:, None]).sum(axis=1)

    lv = np.arange(1, n + 1)
    # right pieces: [ s[L+l-1]+rho, s[L+l]+rho ) for l <= n-L
    ra_idx = left_of[:, None] + lv[None, :] - 1
    valid_r = ra_idx <= n - 1
    ra = np.take_along_axis(s, np.minimum(ra_idx, n - 1), axis=1) + rho
    rb_idx = np.minimum(ra_idx + 1, n - 1)
    rb = np.where(ra_idx + 1 <= n - 1, np.take_along_axis(s, rb_idx, axis=1) + rho, np.inf)
    ra_c = np.maximum(ra, lo)
    meas_right = np.where(valid_r, np.clip(np.minimum(rb, hi) - ra_c, 0.0, None), 0.0)

    # left pieces: ( s[U-l-1]-rho, s[U-l]-rho ] for l <= U
    lb_idx = upto[:, None] - lv[None, :]
    valid_l = lb_idx >= 0
    lb = np.take_along_axis(s, np.maximum(lb_idx, 0), axis=1) - rho
    la_idx = np.maximum(lb_idx - 1, 0)
    la = np.where(lb_idx - 1 >= 0, np.take_along_axis(s, la_idx, axis=1) - rho, -np.inf)
    la_c = np.maximum(la, lo)
    meas_left = np.where(valid_l, np.clip(np.minimum(lb, hi) - la_c, 0.0, None), 0.0)

    meas = np.empty((rows, n + 1))
    a0 = np.maximum(med - rho, lo)
    meas[:, 0] = np.clip(np.minimum(med + rho, hi) - a0, 0.0, None)
    meas[:, 1:] = meas_left + meas_right

    with np.errstate(divide="ignore"):
        logw = np.where(meas > 0.0, np.log(meas), -np.inf)
    pen = np.arange(n + 1, dtype=float)
    pen[1:] *= epsilon / 2.0  # level 0 carries no penalty even at eps = inf
    logw -= pen[None, :]
    shift = logw.max(axis=1, keepdims=True)
    w = np.exp(logw - shift)
    cum = np.cumsum(w, axis=1)
    target = u_level * cum[:, -1]
    ksel = (cum < target[:, None]).sum(axis=1)

    j = np.maximum(ksel - 1, 0)[:, None]
    ml = np.take_along_axis(meas_left, j, axis=1)[:, 0]
    mr = np.take_along_axis(meas_right, j, axis=1)[:, 0]
    la_s = np.take_along_axis(la_c, j, axis=1)[:, 0]
    ra_s = np.take_along_axis(ra_c, j, axis=1)[:, 0]
    x = u_pos * (ml + mr)
    out = np.where((x < ml) | (mr == 0.0), la_s + x, ra_s + (x - ml))
    out = np.where(ksel == 0, a0 + u_pos * meas[:, 0], out)
    return np.clip(out, lo, hi)
