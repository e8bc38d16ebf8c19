import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from dpboot.noise import (
    LaplaceSpec,
    gaussian_vector_sample,
    laplace_sample,
    laplace_sample_block,
    laplace_sum_tail,
    laplace_tail,
)
from dpboot.rng import RngStream


def test_spec_validates_scale():
    with pytest.raises(ValueError):
        LaplaceSpec(0.0, 0.0)
    with pytest.raises(ValueError):
        LaplaceSpec(0.0, -1.0)


def test_laplace_sample_is_deterministic_under_replay():
    spec = LaplaceSpec(0.0, 1.0)
    assert laplace_sample(spec, RngStream(11)) == laplace_sample(spec, RngStream(11))


def test_laplace_moments():
    # Var(Laplace(0, b)) = 2 b^2
    x = laplace_sample_block(LaplaceSpec(0.0, 1.0), RngStream(1), 1_000_000)
    assert abs(x.mean()) < 0.01
    assert abs(x.var() - 2.0) < 0.05


def test_laplace_location_is_median():
    x = laplace_sample_block(LaplaceSpec(5.0, 2.0), RngStream(2), 100_000)
    assert abs(np.median(x) - 5.0) < 0.05


def test_laplace_tail_values():
    assert laplace_tail(1.0, 0.0) == 1.0
    assert laplace_tail(1.0, math.log(2.0)) == pytest.approx(0.5)
    x = laplace_sample_block(LaplaceSpec(0.0, 2.0), RngStream(3), 1_000_000)
    mc = np.mean(np.abs(x) > 2.0)
    assert abs(mc - laplace_tail(2.0, 2.0)) < 3e-3
    with pytest.raises(ValueError):
        laplace_tail(1.0, -0.1)
    with pytest.raises(ValueError):
        laplace_tail(0.0, 1.0)


def test_laplace_sum_tail_formula():
    assert laplace_sum_tail(2.0, 1.0, 0.0) == pytest.approx(1.0)
    expected = (4.0 / 3.0) * math.exp(-1.0) - (1.0 / 3.0) * math.exp(-2.0)
    assert laplace_sum_tail(2.0, 1.0, 2.0) == pytest.approx(expected)
    with pytest.raises(ValueError):
        laplace_sum_tail(1.0, 1.0, 0.5)


def test_laplace_sum_tail_is_stable_for_nearly_equal_scales():
    # the naive two-coefficient form cancels catastrophically as b1 -> b2;
    # the limit law is exp(-t/b) (1 + t/(2b))
    b, t = 0.5, 1.0
    want = math.exp(-t / b) * (1.0 + t / (2.0 * b))
    got = laplace_sum_tail(b + 1e-12, b, t)
    assert got == pytest.approx(want, rel=1e-9)
    prev = 1.0
    for tt in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0):
        v = laplace_sum_tail(b + 1e-7, b, tt)
        assert v <= prev + 1e-15
        prev = v


def test_laplace_sum_tail_against_monte_carlo():
    r = RngStream(4)
    x = r.laplace(0.0, 2.0, 1_000_000) + r.child(1).laplace(0.0, 1.0, 1_000_000)
    for t in (0.5, 1.0, 2.0, 4.0):
        p = laplace_sum_tail(2.0, 1.0, t)
        mc = np.mean(np.abs(x) > t)
        se = math.sqrt(p * (1 - p) / x.size)
        assert abs(mc - p) < max(3 * se, 3e-3)


@given(
    b1=st.floats(0.1, 5.0),
    b2=st.floats(0.1, 5.0),
    t1=st.floats(0.0, 10.0),
    t2=st.floats(0.0, 10.0),
)
@settings(max_examples=100, deadline=None)
def test_sum_tail_properties(b1, b2, t1, t2):
    if b1 == b2:
        b2 = b2 + 0.25
    lo, hi = min(t1, t2), max(t1, t2)
    assert laplace_sum_tail(b1, b2, lo) >= laplace_sum_tail(b1, b2, hi) - 1e-12
    assert laplace_sum_tail(b1, b2, 0.0) == pytest.approx(1.0)
    assert laplace_sum_tail(b1, b2, hi) == pytest.approx(laplace_sum_tail(b2, b1, hi))
    assert laplace_sum_tail(b1, b2, 200.0 * max(b1, b2)) < 1e-12
    assert laplace_tail(b1, lo) >= laplace_tail(b1, hi)
    assert laplace_tail(b1, 200.0 * b1) < 1e-12


def test_gaussian_vector():
    assert np.array_equal(gaussian_vector_sample(3, 0.0, RngStream(5)), np.zeros(3))
    z = RngStream(6).normals(1_000_000)
    ks = stats.kstest(z, "norm")
    assert ks.pvalue > 1e-3
    # a dim-2 vector is two consecutive stream normals, so a block of pairs
    # has the same law as repeated vector draws
    assert np.array_equal(gaussian_vector_sample(2, 2.0, RngStream(7)), RngStream(7).normals(2, sigma=2.0))
    pairs = RngStream(7).normals(2_000_000, sigma=2.0).reshape(-1, 2)
    cov = np.cov(pairs.T)
    assert np.all(np.abs(cov - 4.0 * np.eye(2)) < 0.05)
    with pytest.raises(ValueError):
        gaussian_vector_sample(0, 1.0, RngStream(8))
