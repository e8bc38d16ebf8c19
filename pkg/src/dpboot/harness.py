"""Coverage/width experiment harness.

One trial draws a fresh sample, spends half the privacy budget on the
private point estimate and half on the interval mechanism, then scores the
interval with the conditional-coverage shortcut: the sample and the selected
interval stay fixed while only the point estimator's noise is redrawn, and
coverage is the frequency with which the true parameter falls in the
recentered interval. Everything is reproducible from the master seed alone.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import blb as blb_mod
from . import datasets, estimators
from .blb import BlbConfig, ConfidenceInterval, IntervalFamily
from .estimators import EstimatorSpec
from .private_median import MedianConfig, priv_median_draws
from .rng import RngStream
from .samples import Sample

METHODS = ("nonprivate", "blbquant", "blbvar", "laplace_variance")

# rng lanes inside a trial
_LANE_DATA = 0
_LANE_POINT = 1
_LANE_INTERVAL = 2
_LANE_COVERAGE = 3

WIDTH_BIN = 0.05


@dataclass
class ExperimentConfig:
    task: str
    n_grid: list
    eps_total: float
    data: dict
    alpha: float = 0.05
    n_trials: int = 100
    n_resamp: int = 625
    methods: tuple = METHODS
    blb: dict = field(default_factory=dict)
    master_seed: int = 0
    name: str = "experiment"

    def __post_init__(self):
        if self.task not in ("mean", "median", "logreg"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.n_trials < 1 or self.n_resamp < 1:
            raise ValueError("n_trials and n_resamp must be positive")
        if not self.eps_total > 0:
            raise ValueError("eps_total must be positive")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}; choose from {METHODS}")
        if self.task != "mean" and "laplace_variance" in self.methods:
            raise ValueError("laplace_variance applies to the mean task only")
        self.methods = tuple(self.methods)
        self.n_grid = [int(n) for n in self.n_grid]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["methods"] = list(self.methods)
        return d


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    method: str
    n: int
    eps_total: float
    lo: float
    hi: float
    width: float
    coverage_freq: float
    failed: bool
    seed: int


# ---------------------------------------------------------------------------
# Tasks


class MeanTask:
    """Truncated-Gaussian data, Laplace-mechanism mean."""

    def __init__(self, data_cfg: dict, eps_point: float):
        self.mu = data_cfg.get("mu", 0.0)
        self.sigma2 = data_cfg.get("var", 4.0)
        self.lo = data_cfg.get("lo", -6.0)
        self.hi = data_cfg.get("hi", 4.0)
        self.b = data_cfg.get("clip", max(abs(self.lo), abs(self.hi)))
        self.spec = EstimatorSpec("mean", clip_bound=self.b)
        self.eps_point = eps_point
        self.theta_true = datasets.truncated_gaussian_moments(
            self.mu, self.sigma2, self.lo, self.hi
        ).mean
        self.param_span = 2.0 * self.b

    def draw_sample(self, n, rng):
        return datasets.gen_truncated_gaussian(n, self.mu, self.sigma2, self.lo, self.hi, rng)

    def theta_fn(self, sample):
        return float(np.mean(np.clip(sample.values, -self.b, self.b)))

    def point_estimate(self, sample, rng, n):
        return estimators.laplace_mean_mech(sample, self.b, self.eps_point, rng)

    def point_redraws(self, sample, rng, count):
        v = np.clip(sample.values, -self.b, self.b)
        scale = 0.0 if math.isinf(self.eps_point) else 2.0 * self.b / (v.size * self.eps_point)
        return float(np.mean(v)) + rng.laplace(0.0, scale, count)

    def priv_fn(self, sample, rng):
        return estimators.laplace_mean_mech(sample, self.b, self.eps_point, rng)

    def resampler(self, n):
        return estimators.laplace_mean_resampler(self.b, self.eps_point)

    def variance_mech(self, sample, epsilon, rng):
        return estimators.laplace_variance_mech(sample, self.b, epsilon, rng).value


class MedianTask:
    """Truncated-Gaussian data, inverse-sensitivity private median."""

    def __init__(self, data_cfg: dict, eps_point: float):
        self.mu = data_cfg.get("mu", 0.0)
        self.sigma2 = data_cfg.get("var", 4.0)
        self.lo = data_cfg.get("lo", -6.0)
        self.hi = data_cfg.get("hi", 4.0)
        self.b = data_cfg.get("clip", max(abs(self.lo), abs(self.hi)))
        self.spec = EstimatorSpec("median", clip_bound=self.b)
        self.eps_point = eps_point
        self.theta_true = datasets.truncated_gaussian_moments(
            self.mu, self.sigma2, self.lo, self.hi
        ).median
        self.param_span = 2.0 * self.b

    def _cfg(self, n):
        return MedianConfig(self.eps_point, 1.0 / n, -self.b, self.b)

    def draw_sample(self, n, rng):
        return datasets.gen_truncated_gaussian(n, self.mu, self.sigma2, self.lo, self.hi, rng)

    def theta_fn(self, sample):
        return estimators.median_plugin(sample)

    def point_estimate(self, sample, rng, n):
        return estimators.inv_sens_median_mech(sample, self._cfg(n), rng)

    def point_redraws(self, sample, rng, count):
        return priv_median_draws(sample.values, self._cfg(sample.n), rng, count)

    def priv_fn(self, sample, rng):
        return estimators.inv_sens_median_mech(sample, self._cfg(sample.n), rng)

    def resampler(self, n):
        # resamples are drawn at the full sample size, so the mechanism config
        # (rho = 1/n, same budget) matches the point estimator's
        return estimators.inv_sens_median_resampler(self._cfg(n))


class LogregTask:
    """Income prediction; objective-perturbation logistic regression.

    Truth is the full-pool ERM solution, trials subsample n records from the
    pool; intervals are for one coordinate (the sex column by default).
    """

    def __init__(self, data_cfg: dict, eps_point: float, master_rng: RngStream):
        kind = data_cfg.get("kind", "synthetic_logreg")
        if kind == "adult_csv":
            self.pool = datasets.load_adult_csv(data_cfg["path"])
        else:
            theta_star = data_cfg.get("theta_star", [1.0, -0.5, 0.8, -1.2, 0.3])
            pool_n = data_cfg.get("pool_n", 100_000)
            self.pool = datasets.gen_synthetic_logreg(pool_n, theta_star, master_rng.child(9))
        self.coordinate = int(data_cfg.get("coordinate", 3))
        dim = self.pool.features.shape[1]
        if not 0 <= self.coordinate < dim:
            raise ValueError(f"coordinate {self.coordinate} outside parameter dimension {dim}")
        self.spec = EstimatorSpec("logreg-coordinate", coordinate=self.coordinate)
        self.eps_point = eps_point
        rad = float(np.max(np.linalg.norm(self.pool.features, axis=1)))
        self.rad = rad
        self.theta_pool = estimators.logreg_fit(self.pool, lam=0.0, tol=1e-8)
        self.theta_true = float(self.theta_pool[self.coordinate])
        self.param_span = float(data_cfg.get("param_span", 16.0))

    def _cfg(self, n):
        d = self.pool.features.shape[1]
        return estimators.ObjPertConfig(
            epsilon=self.eps_point,
            delta=n ** -1.1,
            lip0=self.rad,
            lip1=self.rad**2 / 4.0,
            dim=d,
        )

    def draw_sample(self, n, rng):
        perm = np.argsort(rng.u64(self.pool.n), kind="stable")
        return self.pool.take(perm[:n])

    def theta_fn(self, sample):
        lam = self._cfg(sample.n).lam(sample.n)
        return float(estimators.logreg_fit(sample, lam=lam, tol=1e-8)[self.coordinate])

    def point_estimate(self, sample, rng, n):
        theta = estimators.obj_pert_logreg(sample, self._cfg(n), rng, tol=1e-8)
        return float(theta[self.coordinate])

    def point_redraws(self, sample, rng, count):
        cfg = self._cfg(sample.n)
        out = np.empty(count)
        for k in range(count):
            out[k] = estimators.obj_pert_logreg(sample, cfg, rng.child(k), tol=1e-8)[
                self.coordinate
            ]
        return out

    def priv_fn(self, sample, rng):
        cfg = self._cfg(sample.n)
        return float(estimators.obj_pert_logreg(sample, cfg, rng, tol=1e-8)[self.coordinate])

    def resampler(self, n):
        return None


def build_task(cfg: ExperimentConfig, eps_point: float):
    if cfg.task == "mean":
        return MeanTask(cfg.data, eps_point)
    if cfg.task == "median":
        return MedianTask(cfg.data, eps_point)
    return LogregTask(cfg.data, eps_point, RngStream(cfg.master_seed, 0xD0))


# ---------------------------------------------------------------------------
# Coverage shortcut and trial execution


def evaluate_coverage(
    interval: ConfidenceInterval,
    theta_true: float,
    point_redraw_fn: Callable,
    sample: Sample,
    n_resamp: int,
    rng: RngStream,
) -> float:
    """Frequency of theta_true in the interval recentered at fresh point noise."""
    if interval.failed:
        return 0.0
    lo_off, hi_off = interval.offsets()
    centers = np.asarray(point_redraw_fn(sample, rng, n_resamp), float)
    hit = (theta_true >= centers + lo_off) & (theta_true <= centers + hi_off)
    return float(np.mean(hit))


def family_for(task, n: int, c: float) -> IntervalFamily:
    """Sets at resolution h = c/sqrt(n), enough of them to span the parameter range.

    I_T must reach +-sqrt(n) * span/2 on the sqrt(n) scale, i.e. h T >= sqrt(n) span,
    which reduces to T = ceil(span n / c).
    """
    h = c / math.sqrt(n)
    T = max(1, math.ceil(task.param_span * n / c - 1e-9))
    return IntervalFamily(h=h, T=T)


def _blb_config(cfg: ExperimentConfig, eps_interval: float) -> BlbConfig:
    b = cfg.blb
    return BlbConfig(
        epsilon=eps_interval,
        alpha=cfg.alpha,
        K=b.get("K", 10.0),
        c=b.get("c", 1.0),
        rho=b.get("rho"),
        sigma_max_sq=b.get("sigma_max_sq"),
        n_mc_override=b.get("n_mc"),
        subsamples_override=b.get("subsamples"),
    )


def run_trial(task, method: str, sample: Sample, cfg: ExperimentConfig, trial_rng: RngStream):
    """Point estimate + interval for one (sample, method); returns the interval and T."""
    n = sample.n
    eps_interval = cfg.eps_total / 2.0
    bcfg = _blb_config(cfg, eps_interval)
    center = task.point_estimate(sample, trial_rng.child(_LANE_POINT), n)
    rng_int = trial_rng.child(_LANE_INTERVAL)
    batch = task.resampler(n)
    T_used = None

    if method == "nonprivate":
        n_mc = int(min(10000, max(100, n**1.5 / math.log(max(n, 2)))))
        interval = blb_mod.nonprivate_bootstrap_ci(
            sample, task.theta_fn, task.priv_fn, cfg.alpha, n_mc, rng_int,
            batch_priv_fn=batch, center=center,
        )
    elif method == "blbquant":
        fam = family_for(task, n, bcfg.c)
        T_used = fam.T
        t_hat = blb_mod.blb_quant(
            task.theta_fn, task.priv_fn, sample, fam, bcfg, rng_int, batch_priv_fn=batch
        )
        interval = blb_mod.percentile_ci(center, fam, t_hat, n)
    elif method == "blbvar":
        sigma2 = blb_mod.blb_var(
            task.theta_fn, task.priv_fn, sample, bcfg, rng_int, batch_priv_fn=batch
        )
        interval = blb_mod.normal_ci(center, sigma2, n, cfg.alpha)
    elif method == "laplace_variance":
        sigma2 = task.variance_mech(sample, eps_interval, rng_int)
        interval = blb_mod.normal_ci(center, sigma2, n, cfg.alpha)
    else:
        raise ValueError(f"unknown method {method!r}")
    return interval, T_used


def run_experiment(cfg: ExperimentConfig):
    """Run the full (n, method, trial) grid; returns (records, report)."""
    eps_point = cfg.eps_total / 2.0
    task = build_task(cfg, eps_point)
    master = RngStream(cfg.master_seed)
    records: list[TrialRecord] = []
    t_by_cell: dict = {}
    for ni, n in enumerate(cfg.n_grid):
        for method in cfg.methods:
            mi = METHODS.index(method)
            for trial in range(cfg.n_trials):
                t_rng = master.child(ni, mi, trial)
                sample = task.draw_sample(n, t_rng.child(_LANE_DATA))
                try:
                    interval, T_used = run_trial(task, method, sample, cfg, t_rng)
                except estimators.ConvergenceError:
                    interval, T_used = blb_mod.failed_interval(math.nan, method), None
                cov = evaluate_coverage(
                    interval, task.theta_true, task.point_redraws, sample,
                    cfg.n_resamp, t_rng.child(_LANE_COVERAGE),
                )
                if T_used is not None:
                    t_by_cell[(n, method)] = T_used
                records.append(
                    TrialRecord(
                        trial_id=trial,
                        method=method,
                        n=n,
                        eps_total=cfg.eps_total,
                        lo=interval.lo,
                        hi=interval.hi,
                        width=interval.width,
                        coverage_freq=cov,
                        failed=interval.failed,
                        seed=t_rng.stream_id,
                    )
                )
    report = {
        "config": cfg.to_dict(),
        "master_seed": cfg.master_seed,
        "task": cfg.task,
        "theta_true": task.theta_true,
        "cells": aggregate_records(records, t_by_cell),
    }
    return records, report


# ---------------------------------------------------------------------------
# Aggregation and persistence


def _width_histogram(widths) -> dict:
    hist: dict = {}
    for w in widths:
        key = f"{math.floor(w / WIDTH_BIN) * WIDTH_BIN:.2f}"
        hist[key] = hist.get(key, 0) + 1
    return dict(sorted(hist.items(), key=lambda kv: float(kv[0])))


def aggregate_records(records, t_by_cell=None) -> list:
    """Per-(method, n, eps) aggregates, recomputable from the records alone."""
    cells: dict = {}
    for r in records:
        cells.setdefault((r.method, r.n, r.eps_total), []).append(r)
    out = []
    for (method, n, eps_total), rs in sorted(cells.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        widths = [r.width for r in rs if not r.failed]
        cell = {
            "method": method,
            "n": n,
            "eps_total": eps_total,
            "n_trials": len(rs),
            "coverage": float(np.mean([r.coverage_freq for r in rs])),
            "mean_width": float(np.mean(widths)) if widths else None,
            "median_width": float(np.median(widths)) if widths else None,
            "failure_rate": float(np.mean([r.failed for r in rs])),
            "width_hist": _width_histogram(widths),
        }
        if t_by_cell and (n, method) in t_by_cell:
            cell["T"] = t_by_cell[(n, method)]
        out.append(cell)
    return out


_CSV_FIELDS = (
    "trial_id", "method", "n", "eps_total", "lo", "hi",
    "width", "coverage_freq", "failed", "seed",
)


def write_records_csv(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_FIELDS)
        for r in records:
            writer.writerow(
                [r.trial_id, r.method, r.n, repr(r.eps_total), repr(r.lo), repr(r.hi),
                 repr(r.width), repr(r.coverage_freq), int(r.failed), r.seed]
            )


def read_records_csv(path) -> list:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                TrialRecord(
                    trial_id=int(row["trial_id"]),
                    method=row["method"],
                    n=int(row["n"]),
                    eps_total=float(row["eps_total"]),
                    lo=float(row["lo"]),
                    hi=float(row["hi"]),
                    width=float(row["width"]),
                    coverage_freq=float(row["coverage_freq"]),
                    failed=bool(int(row["failed"])),
                    seed=int(row["seed"]),
                )
            )
    return records


def write_report_json(report, path):
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
