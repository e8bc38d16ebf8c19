import math

import numpy as np
import pytest

from dpboot.blb import (
    BlbConfig,
    IntervalFamily,
    blb_quant,
    blb_var,
    boot_var,
    coverage_curve,
    nonprivate_bootstrap_ci,
    normal_ci,
    percentile_ci,
)
from dpboot.estimators import (
    laplace_mean_mech,
    laplace_mean_resampler,
    mean_plugin,
    plugin_mean_resampler,
)
from dpboot.rng import RngStream
from dpboot.samples import Sample


def _noiseless(sample, rng):
    return mean_plugin(sample)


def test_boot_var_constant_subsample_is_zero():
    sub = Sample.scalar(np.full(20, 3.0))
    v = boot_var(mean_plugin, _noiseless, sub, 100, 200, RngStream(0))
    assert v == 0.0


def test_boot_var_two_point_subsample():
    # resample means of n=100 draws from {-1, +1} have variance 1/n, so the
    # sqrt(n)-scaled statistic has MSE 1
    sub = Sample.scalar(np.array([-1.0, 1.0]))
    v = boot_var(mean_plugin, _noiseless, sub, 100, 10_000, RngStream(1))
    assert abs(v - 1.0) < 0.05


def test_boot_var_additive_noise_decomposition():
    # an independent Laplace(0, 2b/(n eps)) on every resampled mean adds
    # n * 2 (2b/(n eps))^2 to the bootstrap MSE
    b, eps, n = 6.0, 2.0, 400
    sub = Sample.scalar(np.linspace(-1, 1, 41))
    base = boot_var(
        mean_plugin, _noiseless, sub, n, 20_000, RngStream(2),
        batch_priv_fn=plugin_mean_resampler(),
    )
    noisy = boot_var(
        mean_plugin,
        lambda s, r: laplace_mean_mech(s, b, eps, r),
        sub, n, 20_000, RngStream(2),
        batch_priv_fn=laplace_mean_resampler(b, eps),
    )
    extra = n * 2.0 * (2.0 * b / (n * eps)) ** 2
    assert abs((noisy - base) - extra) < 0.05 * max(extra, 1.0)


def test_boot_var_is_invariant_to_record_order():
    vals = np.array([0.3, -1.2, 4.0, 2.2, -0.7, 0.9])
    a = boot_var(mean_plugin, _noiseless, Sample.scalar(vals), 50, 500, RngStream(3))
    b = boot_var(mean_plugin, _noiseless, Sample.scalar(vals[::-1]), 50, 500, RngStream(3))
    assert a == b


def test_blb_var_with_identical_subsample_statistics():
    cfg = BlbConfig(epsilon=1e6, K=4.0, rho=1e-3, sigma_max_sq=100.0)
    sample = Sample.scalar(np.linspace(-1, 1, 200))
    out = blb_var(
        mean_plugin, _noiseless, sample, cfg, RngStream(4),
        boot_var_fn=lambda sub, n, rng: 7.5,
    )
    assert abs(out - 7.5) <= 1e-3 + 1e-9


def test_blb_var_output_is_clipped_to_range():
    cfg = BlbConfig(epsilon=2.0, K=4.0, rho=0.01, sigma_max_sq=10.0)
    sample = Sample.scalar(np.linspace(-1, 1, 100))
    out = blb_var(
        mean_plugin, _noiseless, sample, cfg, RngStream(5),
        boot_var_fn=lambda sub, n, rng: 1e9,
    )
    assert 0.0 <= out <= 10.0
    out = blb_var(
        mean_plugin, _noiseless, sample, cfg, RngStream(6),
        boot_var_fn=lambda sub, n, rng: -5.0,
    )
    assert 0.0 <= out <= 10.0


def test_blb_var_accuracy_contract_with_stubbed_bootstrap():
    # Theorem-style contract at desk scale: stub the bootstrap stage with
    # sigma^2 + U(-nu, nu) and check |output - sigma^2| <= nu + rho mostly
    sigma2, nu, rho = 1.0, 0.1, 0.01
    cfg = BlbConfig(epsilon=1.0, rho=rho, sigma_max_sq=4.0, subsamples_override=300)
    sample = Sample.scalar(np.zeros(3000))

    def stub(sub, n, rng):
        return sigma2 + nu * (2.0 * rng.uniform() - 1.0)

    hits = 0
    runs = 50
    for i in range(runs):
        out = blb_var(mean_plugin, _noiseless, sample, cfg, RngStream(7).child(i), boot_var_fn=stub)
        hits += abs(out - sigma2) <= nu + rho
    assert hits / runs >= 0.9


def test_coverage_curve_is_nondecreasing_and_correct():
    stats = np.array([0.0, 0.5, 1.0, 1.5])
    half = np.array([0.4, 0.8, 1.6, 3.0])
    p = coverage_curve(1.0, stats, 4, half)  # |sqrt(4)(1 - stats)| = [2, 1, 0, 1]
    assert np.all(np.diff(p) >= 0)
    np.testing.assert_allclose(p, [0.25, 0.25, 0.75, 1.0])


def test_blb_quant_zero_noise_reduces_to_deterministic_scan():
    # eps = inf collapses the scan noise to its mean, reading the
    # floor(s/2)-th order statistic of each p-hat vector
    sample = Sample.scalar(np.sort(RngStream(8).uniforms(400) * 4 - 2))
    fam = IntervalFamily(h=0.1, T=120)
    cfg = BlbConfig(epsilon=math.inf, K=2.0, alpha=0.05, n_mc_override=400)
    got = blb_quant(mean_plugin, _noiseless, sample, fam, cfg, RngStream(9),
                    batch_priv_fn=plugin_mean_resampler())

    # independent scan: rebuild the p-hat matrix with the same streams
    from dpboot.blb import _LANE_SUBSAMPLE, _partition_for, _resampled_stats

    part, s, _ = _partition_for(sample, cfg, RngStream(9))
    k = s
    p_hat = np.empty((s, fam.T))
    for i, sub in enumerate(part.subsamples):
        sub_rng = RngStream(9).child(_LANE_SUBSAMPLE, i)
        theta_hat = mean_plugin(sub)
        stats = _resampled_stats(None, plugin_mean_resampler(), sub, sample.n, 400, sub_rng)
        p_hat[i] = coverage_curve(theta_hat, stats, sample.n, fam.half_widths())
    ord_idx = math.floor(k / 2)
    want = None
    for t in range(fam.T):
        if np.sort(p_hat[:, t])[ord_idx - 1] >= 0.95:
            want = t + 1
            break
    assert got == want is not None


def test_blb_quant_miss_is_none():
    sample = Sample.scalar(np.linspace(-1, 1, 100))
    fam = IntervalFamily(h=1e-9, T=3)  # sets far too small to ever cover
    cfg = BlbConfig(epsilon=math.inf, K=2.0, alpha=0.05, n_mc_override=50)
    out = blb_quant(mean_plugin, _noiseless, sample, fam, cfg, RngStream(10),
                    batch_priv_fn=plugin_mean_resampler())
    assert out is None


def test_one_record_touches_one_subsample_statistic():
    # instrumented disjointness: flipping one record changes at most one
    # coordinate of the v vector / one row of the p-hat matrix
    n = 60
    base = np.linspace(-1, 1, n)
    changed = base.copy()
    changed[17] = 5.0
    cfg = BlbConfig(epsilon=1e6, K=3.0, n_mc_override=100)
    fam = IntervalFamily(h=0.2, T=40)

    from dpboot.blb import _LANE_SUBSAMPLE, _partition_for, _resampled_stats

    def stats_rows(vals):
        sample = Sample.scalar(vals)
        part, s, _ = _partition_for(sample, cfg, RngStream(11))
        rows = []
        for i, sub in enumerate(part.subsamples):
            sub_rng = RngStream(11).child(_LANE_SUBSAMPLE, i)
            stats = _resampled_stats(
                None, plugin_mean_resampler(), sub, n, 100, sub_rng
            )
            rows.append(coverage_curve(mean_plugin(sub), stats, n, fam.half_widths()))
        return np.array(rows)

    diff_rows = np.any(stats_rows(base) != stats_rows(changed), axis=1)
    assert diff_rows.sum() <= 1


def test_percentile_ci_arithmetic():
    fam = IntervalFamily(h=1.0, T=10)
    ci = percentile_ci(0.0, fam, 3, 100)
    assert (ci.lo, ci.hi) == (-0.3, 0.3)
    ci = percentile_ci(-0.1, IntervalFamily(h=0.0316, T=20), 10, 1000)
    assert ci.lo == pytest.approx(-0.11, abs=5e-4)
    assert ci.hi == pytest.approx(-0.09, abs=5e-4)
    failed = percentile_ci(0.5, fam, None, 100)
    assert failed.failed and failed.center == 0.5
    with pytest.raises(ValueError):
        percentile_ci(0.0, fam, 11, 100)


def test_normal_ci_arithmetic():
    ci = normal_ci(0.0, 1.0, 100, 0.05)
    assert ci.hi == pytest.approx(0.195996, abs=1e-5)
    ci = normal_ci(2.0, 4.0, 400, 0.05)
    assert ci.lo == pytest.approx(1.804, abs=1e-3)
    assert ci.hi == pytest.approx(2.196, abs=1e-3)
    point = normal_ci(1.0, 0.0, 50, 0.05)
    assert point.lo == point.hi == 1.0
    with pytest.raises(ValueError):
        normal_ci(0.0, -1.0, 100, 0.05)


def test_nonprivate_bootstrap_degenerate_sample():
    sample = Sample.scalar(np.full(200, 2.5))
    ci = nonprivate_bootstrap_ci(sample, mean_plugin, _noiseless, 0.05, 500, RngStream(12))
    assert ci.lo == ci.hi == 2.5


def test_nonprivate_bootstrap_is_roughly_symmetric_on_symmetric_data():
    asym, widths = [], []
    for i in range(40):
        vals = RngStream(13).child(i).normals(400)
        sample = Sample.scalar(vals)
        ci = nonprivate_bootstrap_ci(
            sample, mean_plugin, _noiseless, 0.05, 2000, RngStream(14).child(i),
            batch_priv_fn=plugin_mean_resampler(), center=mean_plugin(sample),
        )
        asym.append((ci.hi - ci.center) - (ci.center - ci.lo))
        widths.append(ci.width)
    assert abs(np.mean(asym)) <= 0.05 * np.mean(widths)


def test_config_counts():
    cfg = BlbConfig(epsilon=4.0, K=10.0)
    assert cfg.subsample_count(1000) == 17
    assert cfg.monte_carlo_count(1000, 17) == 269
    assert cfg.rho_at(1000) == pytest.approx(1e-3)
    assert cfg.sigma_max_sq_at(1000) == pytest.approx(1e6)
    with pytest.raises(ValueError):
        BlbConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        BlbConfig(epsilon=1.0, alpha=1.5)
