"""Discrete and conditionally-Poisson/Gaussian channel models.

A finite channel is held as a row-stochastic matrix together with its input
and output labels.  On top of that this module provides the standard textbook
channels (binary symmetric, erasure, Z), composition and powers, and the
slotted molecular receiver front-ends: Poisson counting rows, ligand-binding
binomial rows, and sequence simulators for the tapped-delay-line Poisson and
linear-Gaussian receiver models.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import stats

_ROW_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Dmc:
    """A discrete memoryless channel.

    Attributes:
        input_labels: one label per matrix row.
        output_labels: one label per matrix column.
        matrix: row-stochastic conditional probabilities, shape
            ``(len(input_labels), len(output_labels))``.
    """

    input_labels: tuple
    output_labels: tuple
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "input_labels", tuple(self.input_labels))
        object.__setattr__(self, "output_labels", tuple(self.output_labels))
        mat = np.asarray(self.matrix, dtype=np.float64)
        if mat.ndim != 2:
            raise ValueError(f"matrix must be 2-D, got shape {mat.shape}")
        if mat.shape != (len(self.input_labels), len(self.output_labels)):
            raise ValueError(
                f"matrix shape {mat.shape} does not match "
                f"{len(self.input_labels)} inputs / {len(self.output_labels)} outputs"
            )
        if np.any(mat < 0):
            raise ValueError("matrix entries must be nonnegative")
        rows = mat.sum(axis=1)
        bad = np.abs(rows - 1.0) > _ROW_SUM_TOL
        if np.any(bad):
            i = int(np.argmax(np.abs(rows - 1.0)))
            raise ValueError(f"row {i} sums to {rows[i]!r}, not 1 within {_ROW_SUM_TOL}")
        object.__setattr__(self, "matrix", mat)

    @property
    def n_inputs(self) -> int:
        return len(self.input_labels)

    @property
    def n_outputs(self) -> int:
        return len(self.output_labels)


def make_bsc(p: float) -> Dmc:
    """Binary symmetric channel with crossover probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"crossover probability must be in [0, 1], got {p}")
    return Dmc((0, 1), (0, 1), [[1.0 - p, p], [p, 1.0 - p]])


def make_erasure(eps: float) -> Dmc:
    """Binary erasure channel; the erasure output is labelled ``'e'``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability must be in [0, 1], got {eps}")
    return Dmc((0, 1), (0, "e", 1), [[1.0 - eps, eps, 0.0], [0.0, eps, 1.0 - eps]])


def make_z(q: float) -> Dmc:
    """Z channel: input 0 is noiseless, input 1 decays to 0 with probability ``q``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"decay probability must be in [0, 1], got {q}")
    return Dmc((0, 1), (0, 1), [[1.0, 0.0], [q, 1.0 - q]])


def dmc_compose(first: Dmc, second: Dmc) -> Dmc:
    """Feed the output of ``first`` into ``second``.

    The output alphabet of ``first`` must equal the input alphabet of
    ``second``; the result has matrix ``first.matrix @ second.matrix``.
    """
    if first.output_labels != second.input_labels:
        raise ValueError(
            "alphabet mismatch: outputs of the first channel "
            f"{first.output_labels} != inputs of the second {second.input_labels}"
        )
    return Dmc(first.input_labels, second.output_labels, first.matrix @ second.matrix)


def dmc_power(ch: Dmc, m: int) -> Dmc:
    """``m``-fold self-composition of a square channel.

    Uses repeated squaring with long-double accumulation, renormalising
    rows after every multiply so stochasticity does not drift for large
    ``m``.
    """
    if ch.input_labels != ch.output_labels:
        raise ValueError("power requires input and output alphabets to coincide")
    if m < 1:
        raise ValueError(f"exponent must be >= 1, got {m}")
    base = ch.matrix.astype(np.longdouble)
    acc = None
    while m:
        if m & 1:
            acc = base.copy() if acc is None else _renorm(acc @ base)
        m >>= 1
        if m:
            base = _renorm(base @ base)
    return Dmc(ch.input_labels, ch.output_labels, np.asarray(acc, dtype=np.float64))


def _renorm(mat):
    return mat / mat.sum(axis=1, keepdims=True)


def intensity_grid(peak: float, n: int = 33) -> np.ndarray:
    """Uniform grid of ``n`` release intensities on ``[0, peak]``."""
    if peak <= 0:
        raise ValueError(f"peak must be positive, got {peak}")
    if n < 2:
        raise ValueError(f"grid needs at least 2 points, got {n}")
    return np.linspace(0.0, peak, n)


def poisson_y_max(mean_max: float, tail_tol: float = 1e-10) -> int:
    """Smallest count cutoff whose aggregated tail mass is below ``tail_tol``.

    Returns the smallest ``y_max`` such that ``P(Y >= y_max) < tail_tol``
    for ``Y ~ Poisson(mean_max)``.
    """
    y = int(mean_max) + 1
    while stats.poisson.sf(y - 1, mean_max) >= tail_tol:
        y += 1
    return y


def poisson_dmc(background: float, input_grid, y_max: int | None = None,
                tail_tol: float = 1e-10) -> Dmc:
    """Discretised Poisson counting channel.

    Row ``x`` is the pmf of ``Poisson(x + background)`` on counts
    ``0 .. y_max``; the final column is an overflow symbol that absorbs all
    mass at or above ``y_max`` so every row sums to one and mutual
    informations computed on the result are exact for the truncated channel.

    Args:
        background: expected nuisance count per slot (rate times slot length).
        input_grid: release intensities, each >= 0.
        y_max: count cutoff; defaults to the smallest cutoff meeting
            ``tail_tol`` at the largest grid intensity.
        tail_tol: maximum allowed aggregated overflow mass.

    Raises:
        ValueError: if the overflow mass at some intensity exceeds ``tail_tol``.
    """
    if background < 0:
        raise ValueError(f"background must be >= 0, got {background}")
    grid = np.asarray(input_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("input_grid must be a nonempty 1-D array")
    if np.any(grid < 0):
        raise ValueError("release intensities must be >= 0")
    means = grid + background
    if y_max is None:
        y_max = poisson_y_max(float(means.max()), tail_tol)
    counts = np.arange(y_max)
    mat = np.empty((grid.size, y_max + 1))
    mat[:, :y_max] = stats.poisson.pmf(counts[None, :], means[:, None])
    overflow = stats.poisson.sf(y_max - 1, means)
    worst = float(overflow.max())
    if worst >= tail_tol:
        raise ValueError(
            f"overflow mass {worst:.3e} at y_max={y_max} exceeds tolerance {tail_tol:.1e}"
        )
    mat[:, y_max] = overflow
    # guard against scipy rounding: renormalise the residual (~1e-16 scale)
    mat /= mat.sum(axis=1, keepdims=True)
    return Dmc(tuple(grid.tolist()), tuple(range(y_max + 1)), mat)


def ligand_binomial_dmc(n_receptors: int, prob_grid) -> Dmc:
    """Ligand-binding receiver: each of ``n_receptors`` binds independently.

    Input is the per-receptor binding probability, output the number of
    bound receptors, so row ``p`` is ``Binomial(n_receptors, p)``.
    """
    if n_receptors < 1:
        raise ValueError(f"need at least one receptor, got {n_receptors}")
    grid = np.asarray(prob_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("prob_grid must be a nonempty 1-D array")
    if np.any((grid < 0) | (grid > 1)):
        raise ValueError("binding probabilities must lie in [0, 1]")
    k = np.arange(n_receptors + 1)
    mat = stats.binom.pmf(k[None, :], n_receptors, grid[:, None])
    mat /= mat.sum(axis=1, keepdims=True)
    return Dmc(tuple(grid.tolist()), tuple(k.tolist()), mat)


@dataclass(frozen=True)
class LtiPoissonChannel:
    """Slotted Poisson receiver behind a linear time-invariant tap line.

    The count in slot ``i`` is Poisson with mean
    ``background + sum_j taps[j] * x[i-j]``.

    Attributes:
        taps: nonnegative slot-arrival weights ``(p_0, .., p_k)`` summing
            to at most 1 (mass beyond the last tap is lost, not aliased).
        background: expected nuisance count per slot.
        peak: largest admissible release intensity per slot.
        avg: average-intensity budget, ``0 < avg <= peak``.
    """

    taps: tuple
    background: float
    peak: float
    avg: float

    def __post_init__(self):
        taps = tuple(float(t) for t in self.taps)
        if len(taps) == 0:
            raise ValueError("need at least one tap")
        if any(t < 0 for t in taps):
            raise ValueError("taps must be nonnegative")
        if sum(taps) > 1.0 + 1e-12:
            raise ValueError(f"taps sum to {sum(taps)}, must be <= 1")
        object.__setattr__(self, "taps", taps)
        if self.background < 0:
            raise ValueError(f"background must be >= 0, got {self.background}")
        if self.peak <= 0:
            raise ValueError(f"peak must be positive, got {self.peak}")
        if not 0 < self.avg <= self.peak:
            raise ValueError(f"need 0 < avg <= peak, got avg={self.avg} peak={self.peak}")

    @property
    def memory(self) -> int:
        """Number of past slots that interfere with the current one."""
        return len(self.taps) - 1


@dataclass(frozen=True)
class LinearGaussianChannel:
    """Tapped-delay-line receiver with signal-dependent Gaussian noise.

    Slot ``i`` observes ``s_i + N_i`` where ``s_i = sum_j taps[j] * x[i-j]``
    and ``N_i ~ Normal(0, s_i / v_r)`` independently across slots.  ``v_r``
    is the reciprocal noise scale: larger values mean less noise per unit
    of delivered signal.
    """

    taps: tuple
    v_r: float

    def __post_init__(self):
        taps = tuple(float(t) for t in self.taps)
        if len(taps) == 0:
            raise ValueError("need at least one tap")
        if any(t < 0 for t in taps):
            raise ValueError("taps must be nonnegative")
        if sum(taps) > 1.0 + 1e-12:
            raise ValueError(f"taps sum to {sum(taps)}, must be <= 1")
        object.__setattr__(self, "taps", taps)
        if self.v_r <= 0:
            raise ValueError(f"v_r must be positive, got {self.v_r}")

    @property
    def memory(self) -> int:
        return len(self.taps) - 1


def _convolve_taps(taps, inputs):
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("inputs must be a 1-D sequence of slot intensities")
    return np.convolve(x, np.asarray(taps))[: x.size]


def simulate_lti_poisson(ch: LtiPoissonChannel, inputs, rng: np.random.Generator) -> np.ndarray:
    """Draw one slot-count sequence for the given release sequence.

    Slots before the first release contribute nothing; the sequence is
    treated as all-zero for negative time.
    """
    x = np.asarray(inputs, dtype=np.float64)
    if np.any(x < 0) or np.any(x > ch.peak + 1e-9):
        raise ValueError("release intensities must lie in [0, peak]")
    means = ch.background + _convolve_taps(ch.taps, x)
    return rng.poisson(means)


def simulate_linear_gaussian(ch: LinearGaussianChannel, inputs,
                             rng: np.random.Generator) -> np.ndarray:
    """Draw one observation sequence; outputs may be negative (no clamping)."""
    x = np.asarray(inputs, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("release intensities must be >= 0")
    signal = _convolve_taps(ch.taps, x)
    return signal + rng.normal(0.0, np.sqrt(signal / ch.v_r))


def dmc_to_json(ch: Dmc) -> str:
    """Serialise a channel as ``{"inputs": .., "outputs": .., "matrix": ..}``."""
    payload = {
        "inputs": list(ch.input_labels),
        "outputs": list(ch.output_labels),
        "matrix": [[float(v) for v in row] for row in ch.matrix],
    }
    return json.dumps(payload, sort_keys=True)


def dmc_from_json(text: str) -> Dmc:
    """Inverse of :func:`dmc_to_json`; exact for round-trips of finite floats."""
    payload = json.loads(text)
    try:
        inputs = payload["inputs"]
        outputs = payload["outputs"]
        matrix = payload["matrix"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed channel payload: missing {exc}") from None

    def labels(seq):
        return tuple(tuple(v) if isinstance(v, list) else v for v in seq)

    return Dmc(labels(inputs), labels(outputs), np.asarray(matrix, dtype=np.float64))
