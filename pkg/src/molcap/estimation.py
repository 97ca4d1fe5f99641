"""Plug-in mutual-information estimation and distribution-fit statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EstimationError


@dataclass(frozen=True)
class MiEstimate:
    """A Monte Carlo mutual-information estimate with a bootstrap interval.

    Attributes:
        value_nats: plug-in estimate from the empirical joint histogram.
        ci_low / ci_high: percentile bootstrap confidence limits (nats).
        n_samples: number of symbol pairs that entered the histogram.
    """

    value_nats: float
    ci_low: float
    ci_high: float
    n_samples: int


def histogram_mi(x_idx: np.ndarray, y_idx: np.ndarray, n_x: int, n_y: int) -> float:
    """Plug-in mutual information (nats) of paired category indices."""
    x_idx = np.asarray(x_idx)
    y_idx = np.asarray(y_idx)
    if x_idx.shape != y_idx.shape:
        raise ValueError("x_idx and y_idx must be paired (same shape)")
    joint = np.zeros((n_x, n_y))
    np.add.at(joint, (x_idx, y_idx), 1.0)
    joint /= joint.sum()
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    mask = joint > 0
    ratio = joint[mask] / (px @ py)[mask]
    return float(np.sum(joint[mask] * np.log(ratio)))


def mi_with_bootstrap(x_idx, y_idx, rng: np.random.Generator, n_boot: int = 200,
                      ci_level: float = 0.95, tol: float | None = None) -> MiEstimate:
    """Estimate I(X;Y) from paired samples with a percentile bootstrap CI.

    Args:
        x_idx, y_idx: integer category indices of equal length.
        rng: source of bootstrap resamples.
        n_boot: number of bootstrap replicates.
        ci_level: two-sided confidence level.
        tol: optional cap on the CI width; exceeded width raises
            :class:`EstimationError` so callers cannot silently read an
            estimate coarser than they asked for.
    """
    x_idx = np.asarray(x_idx)
    y_idx = np.asarray(y_idx)
    if x_idx.shape != y_idx.shape or x_idx.ndim != 1:
        raise ValueError("x_idx and y_idx must be 1-D arrays of equal length")
    n = x_idx.size
    if n < 2:
        raise ValueError("need at least two samples")
    n_x = int(x_idx.max()) + 1
    n_y = int(y_idx.max()) + 1
    value = histogram_mi(x_idx, y_idx, n_x, n_y)
    reps = np.empty(n_boot)
    for b in range(n_boot):
        sel = rng.integers(0, n, size=n)
        reps[b] = histogram_mi(x_idx[sel], y_idx[sel], n_x, n_y)
    alpha = (1.0 - ci_level) / 2.0
    lo, hi = np.quantile(reps, [alpha, 1.0 - alpha])
    if tol is not None and hi - lo > tol:
        raise EstimationError(
            f"bootstrap CI width {hi - lo:.3e} exceeds requested tolerance {tol:.3e}; "
            "increase the sample budget"
        )
    return MiEstimate(value, float(lo), float(hi), n)


def ks_distance(samples: np.ndarray, cdf, n_total: int | None = None,
                upper: float | None = None) -> float:
    """Kolmogorov-Smirnov distance of samples against a reference cdf.

    Supports right-censored data: pass the uncensored samples plus the
    total draw count in ``n_total`` and the censoring point in ``upper``;
    the supremum is then taken over the observed range only.
    """
    t = np.sort(np.asarray(samples, dtype=np.float64))
    n = t.size if n_total is None else int(n_total)
    if t.size == 0 or n < t.size:
        raise ValueError("need 0 < len(samples) <= n_total")
    ref = np.asarray(cdf(t), dtype=np.float64)
    steps = np.arange(1, t.size + 1) / n
    d = max(np.max(np.abs(steps - ref)), np.max(np.abs(steps - 1.0 / n - ref)))
    if upper is not None:
        d = max(d, abs(t.size / n - float(cdf(upper))))
    return float(d)
