"""Channels that carry information in release and arrival times.

Two models live here.  The additive first-arrival channel delays each
transmission by an independent inverse-Gaussian arrival time, giving
``Z = X + T`` under a mean release-delay budget; its capacity is bracketed
between explicit achievable rates (a matched inverse-Gaussian input that
exploits the closure of the family under addition, and an exponential
input through the entropy-power inequality) and a max-entropy converse.
The delay-selector model releases up to ``n_max`` molecules per slot, each
arriving within a bounded window of ``delta`` slots; counting its
unconfusable codewords yields an exact zero-error rate as the log of a
polynomial root, and simulation gives single-letter achievable rates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import erfc

from .capacity import BoundReport
from .diffusion import (INVERSE_GAUSSIAN, HittingTimeModel, hitting_pdf,
                        sample_hitting)
from .errors import QuadratureError
from .estimation import MiEstimate, mi_with_bootstrap


@dataclass(frozen=True)
class DelaySelector:
    """Slotted link: up to ``n_max`` molecules per slot, each delayed by
    0 .. delta-1 slots before detection."""

    n_max: int
    delta: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        if self.delta < 1:
            raise ValueError(f"delta must be >= 1, got {self.delta}")


def delay_selector_root(ds: DelaySelector) -> float:
    """Unique root above 1 of ``x^(delta+1) - x^delta - n_max``.

    The count of codeword pairs that can never be confused grows like
    ``root**length``; bisection on ``(1, 1 + n_max)`` down to machine
    precision keeps the polynomial residual near rounding level.
    """
    n, d = ds.n_max, ds.delta

    def poly(x):
        return x ** (d + 1) - x ** d - n

    lo, hi = 1.0, 1.0 + n
    if poly(hi) <= 0:  # cannot happen for n, d >= 1, kept as a guard
        raise ValueError("failed to bracket the growth root")
    while hi - lo > 1e-16 * hi:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if poly(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def delay_selector_zero_error(ds: DelaySelector) -> float:
    """Zero-error capacity in nats: the log of the codeword growth root."""
    return math.log(delay_selector_root(ds))


def simulate_delay_selector(ds: DelaySelector, released, delay_probs,
                            rng: np.random.Generator) -> np.ndarray:
    """Per-slot detection counts for a release sequence.

    Every molecule released in slot ``i`` is detected in slot ``i + J``
    with ``J`` drawn independently from ``delay_probs`` on
    ``0 .. delta-1``; arrivals past the end of the sequence are dropped.
    """
    released = np.asarray(released)
    if np.any((released < 0) | (released > ds.n_max)):
        raise ValueError(f"releases must lie in 0 .. {ds.n_max}")
    n = released.size
    slot_of = np.repeat(np.arange(n), released)
    delays = rng.choice(ds.delta, size=slot_of.size, p=delay_probs)
    return np.bincount(slot_of + delays, minlength=n + ds.delta)[:n]


def delay_selector_iid_lower(ds: DelaySelector, n_slots: int, seed: int,
                             release_probs=None, delay_probs=None,
                             n_boot: int = 200, ci_level: float = 0.95,
                             tol: float | None = None) -> MiEstimate:
    """Monte Carlo single-letter achievable rate under i.i.d. releases.

    Releases are drawn i.i.d. from ``release_probs`` on ``0 .. n_max``
    (uniform by default) and molecules delayed by ``delay_probs`` on
    ``0 .. delta-1`` (uniform by default).  The first ``delta`` slots are
    burned in, then the stationary per-slot I(X_i;Y_i) is estimated with a
    bootstrap interval; superadditivity of block information under
    independent inputs makes this a valid rate for the full channel.
    """
    if release_probs is None:
        release_probs = np.full(ds.n_max + 1, 1.0 / (ds.n_max + 1))
    release_probs = np.asarray(release_probs, dtype=np.float64)
    if release_probs.shape != (ds.n_max + 1,) or abs(release_probs.sum() - 1) > 1e-9:
        raise ValueError("release_probs must be a distribution on 0 .. n_max")
    if delay_probs is None:
        delay_probs = np.full(ds.delta, 1.0 / ds.delta)
    delay_probs = np.asarray(delay_probs, dtype=np.float64)
    if delay_probs.shape != (ds.delta,) or abs(delay_probs.sum() - 1) > 1e-9:
        raise ValueError("delay_probs must be a distribution on 0 .. delta-1")
    if n_slots <= ds.delta:
        raise ValueError("n_slots must exceed the burn-in of delta slots")
    rng = np.random.default_rng(seed)
    xs = rng.choice(ds.n_max + 1, size=n_slots, p=release_probs)
    ys = simulate_delay_selector(ds, xs, delay_probs, rng)
    x_kept = xs[ds.delta:]
    _, y_kept = np.unique(ys[ds.delta:], return_inverse=True)
    return mi_with_bootstrap(x_kept, y_kept, rng, n_boot=n_boot,
                             ci_level=ci_level, tol=tol)


# ---------------------------------------------------------------------------
# additive inverse-Gaussian arrival-time channel


@dataclass(frozen=True)
class AignParams:
    """Additive arrival-noise channel: Z = X + T.

    ``T`` is inverse Gaussian with mean ``mu`` and shape ``lam``; the
    release delay ``X >= 0`` is constrained to mean at most ``budget``.
    """

    budget: float
    mu: float
    lam: float

    def __post_init__(self):
        if self.budget <= 0:
            raise ValueError(f"budget must be positive, got {self.budget}")
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")

    @property
    def noise(self) -> HittingTimeModel:
        return HittingTimeModel(INVERSE_GAUSSIAN, self.lam, self.mu)


def _neg_f_log_f(pdf, pieces, tol):
    total, err_total = 0.0, 0.0

    def integrand(t):
        f = pdf(t)
        return -f * math.log(f) if f > 0 else 0.0

    for lo, hi in pieces:
        with warnings.catch_warnings():
            # the achieved-error check below supersedes quadpack's warning
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(integrand, lo, hi,
                                      epsabs=tol / len(pieces),
                                      epsrel=0.0, limit=300)
        total += val
        err_total += err
    if err_total > tol:
        raise QuadratureError(
            f"entropy integral error {err_total:.2e} above tolerance {tol:.1e}",
            achieved=err_total, requested=tol)
    return total


def ig_entropy(mu: float, lam: float, tol: float = 1e-6) -> float:
    """Differential entropy (nats) of the inverse-Gaussian law, by quadrature."""
    if mu <= 0 or lam <= 0:
        raise ValueError("mu and lam must be positive")
    model = HittingTimeModel(INVERSE_GAUSSIAN, lam, mu)

    def pdf(t):
        return float(hitting_pdf(model, t))

    pieces = [(0.0, mu), (mu, np.inf)]
    return _neg_f_log_f(pdf, pieces, tol)


def levy_truncated_entropy(lam: float, lifetime: float, tol: float = 1e-6) -> float:
    """Differential entropy (nats) of the drift-free arrival law cut at a lifetime.

    The untruncated law has no finite mean, which degenerates the additive
    channel's mean-budget bounds; conditioning the arrival on happening
    within the molecule lifetime restores a proper distribution.  The
    density is renormalised on ``(0, lifetime]``.
    """
    if lam <= 0 or lifetime <= 0:
        raise ValueError("lam and lifetime must be positive")
    z = float(erfc(math.sqrt(lam / (2.0 * lifetime))))
    if z <= 0:
        raise ValueError("lifetime keeps essentially no arrival mass")

    def pdf(t):
        if t <= 0:
            return 0.0
        return math.sqrt(lam / (2.0 * math.pi * t ** 3)) * math.exp(
            -lam / (2.0 * t)) / z

    split = min(lam, lifetime)
    pieces = [(0.0, split)] + ([(split, lifetime)] if split < lifetime else [])
    return _neg_f_log_f(pdf, pieces, tol)


def aign_bounds(params: AignParams, tol: float = 1e-8) -> BoundReport:
    """Certified capacity bracket for the additive arrival-time channel.

    Achievable rates: an inverse-Gaussian input on the same ``lam/mu^2``
    ray as the noise (addition stays in the family, so both differential
    entropies are exact quadratures), and an exponential input combined
    with the entropy-power inequality.  Converse: the output is positive
    with mean exactly ``budget + mu``, so its entropy is at most that of
    the exponential with the same mean.
    """
    h_noise = ig_entropy(params.mu, params.lam, tol)
    kappa = params.lam / params.mu ** 2
    total_mean = params.budget + params.mu
    h_out_matched = ig_entropy(total_mean, kappa * total_mean ** 2, tol)
    lower_ig = h_out_matched - h_noise
    h_input = 1.0 + math.log(params.budget)
    lower_epi = 0.5 * math.log(math.exp(2.0 * h_input)
                               + math.exp(2.0 * h_noise)) - h_noise
    upper = math.log(total_mean) + 1.0 - h_noise
    if lower_ig >= lower_epi:
        lower, method = lower_ig, "ig_input"
    else:
        lower, method = lower_epi, "epi"
    return BoundReport(
        lower, upper, method, "max_entropy_output",
        metadata={
            "budget": params.budget, "mu": params.mu, "lam": params.lam,
            "noise_entropy_nats": h_noise,
            "lower_ig_input_nats": lower_ig,
            "lower_epi_nats": lower_epi,
        },
    )


def sample_aign(params: AignParams, n: int, rng: np.random.Generator,
                input_sampler=None) -> tuple[np.ndarray, np.ndarray]:
    """Draw (release delay, arrival time) pairs from the additive channel.

    The noise is sampled exactly by the squared-normal transformation (no
    discretisation, no rejection chains).  ``input_sampler(n, rng)``
    defaults to the exponential law that meets the budget with equality.
    """
    if input_sampler is None:
        x = rng.exponential(params.budget, size=n)
    else:
        x = np.asarray(input_sampler(n, rng), dtype=np.float64)
        if x.shape != (n,) or np.any(x < 0):
            raise ValueError("input_sampler must return n nonnegative delays")
    t = sample_hitting(params.noise, n, rng)
    return x, x + t
