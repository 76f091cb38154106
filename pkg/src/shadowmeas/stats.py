"""Uncertainty quantification: standard errors and leave-one-out jackknife.

The jackknife for trace moments reuses the tuple-trace aggregation pass of
the full U-statistic: every leave-one-out estimate is a filtered re-sum of
cached terms, so the total cost stays close to a single full evaluation.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _ustat
from .errors import NotEnoughBatches, NotEnoughSamples
from .shadows import BatchShadowSet

#: Below this many batches the jackknife error bar is unreliable (warning only).
RECOMMENDED_MIN_BATCHES = 10


def sem(values) -> float:
    """Standard error of the mean: sample std (n-1 denominator) over sqrt(n)."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise NotEnoughSamples("sem needs at least two values")
    return float(v.std(ddof=1) / np.sqrt(v.size))


@dataclass(frozen=True, eq=False)
class JackknifeResult:
    """Bias-corrected point estimate with leave-one-out variance."""

    point_estimate: float  # N_B * theta - (N_B - 1) * mean(leave_one_out)
    raw_estimate: float
    variance: float
    leave_one_out: np.ndarray

    def __post_init__(self):
        loo = np.asarray(self.leave_one_out, dtype=float)
        loo.setflags(write=False)
        object.__setattr__(self, "leave_one_out", loo)

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))


def jackknife_moments(batches: BatchShadowSet, ks, compute_cov: bool = False):
    """Jackknife point estimates and variances for tr(rho^k), k in ``ks``.

    Returns a list of JackknifeResult; with ``compute_cov`` also the jackknife
    covariance matrix across the requested moments (its diagonal equals the
    per-k variances exactly).
    """
    ks = [int(k) for k in ks]
    if any(k < 2 for k in ks):
        raise ValueError("trace moments are defined for k >= 2")
    mats = [b.matrix for b in batches]
    n_b = len(mats)
    if n_b < 2 or n_b < max(ks) + 1:
        raise NotEnoughBatches(
            f"jackknife for k = {max(ks)} needs at least {max(ks) + 1} batches, got {n_b}"
        )
    if n_b < RECOMMENDED_MIN_BATCHES:
        warnings.warn(
            f"jackknife with {n_b} batches; at least {RECOMMENDED_MIN_BATCHES} are "
            "recommended for reliable error bars",
            stacklevel=2,
        )
    factor = (n_b - 1) / n_b
    results = []
    centered_rows = []
    for k in ks:
        theta, loo = _ustat.leave_one_out(mats, k)
        loo_mean = loo.mean()
        point = n_b * theta - (n_b - 1) * loo_mean
        centered = loo - loo_mean
        # variance and covariance diagonal share the same dot product exactly
        variance = factor * float(np.dot(centered, centered))
        results.append(JackknifeResult(point, theta, variance, loo))
        centered_rows.append(centered)
    if not compute_cov:
        return results
    size = len(ks)
    cov = np.empty((size, size))
    for i in range(size):
        for j in range(i, size):
            cov[i, j] = cov[j, i] = factor * float(
                np.dot(centered_rows[i], centered_rows[j])
            )
    return results, cov
