"""Capacity values and certified bounds for finite channels.

Everything here works in nats; unit conversion is left to the callers
(the command-line front end prints bits by default).  The centre piece is
a Blahut-Arimoto solver that certifies its answer with a per-iteration
lower/upper bracket, optionally under an average-input-cost constraint via
bisection on the Lagrange multiplier.  Around it sit the symmetrized-KL
divergence upper bound (generic simplex maximisation plus closed forms for
the Poisson counting channel), the mismatched-output upper bound, a Monte
Carlo single-letter lower bound for channels with input memory, and
block-channel sandwich bounds that bracket the capacity of the
tapped-delay-line Poisson receiver.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .channels import Dmc, LtiPoissonChannel, intensity_grid, poisson_y_max, simulate_lti_poisson
from .errors import AlphabetSizeError, ConvergenceError
from .estimation import MiEstimate, mi_with_bootstrap

_SIMPLEX_TOL = 1e-12

#: method tags accepted in a BoundReport
BOUND_METHODS = frozenset({
    "ba", "sym_kl", "sym_kl_closed", "topsoe", "iid_mc",
    "sandwich_lo", "sandwich_hi", "ig_input", "epi", "max_entropy_output",
})


@dataclass(frozen=True, eq=False)
class Prior:
    """A probability assignment on a finite input alphabet."""

    labels: tuple
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size != len(self.labels):
            raise ValueError("probs must be 1-D and match the labels")
        if np.any(p < -_SIMPLEX_TOL):
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > _SIMPLEX_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", np.clip(p, 0.0, None))

    @classmethod
    def uniform(cls, labels) -> "Prior":
        labels = tuple(labels)
        return cls(labels, np.full(len(labels), 1.0 / len(labels)))


@dataclass(frozen=True)
class BoundReport:
    """A certified lower/upper capacity bracket (nats).

    ``lower_method`` / ``upper_method`` must come from :data:`BOUND_METHODS`;
    ``metadata`` carries solver diagnostics (iteration counts, grids, seeds)
    for reproducibility.
    """

    lower_nats: float
    upper_nats: float
    lower_method: str
    upper_method: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower_method not in BOUND_METHODS:
            raise ValueError(f"unknown lower method {self.lower_method!r}")
        if self.upper_method not in BOUND_METHODS:
            raise ValueError(f"unknown upper method {self.upper_method!r}")
        if not (self.lower_nats <= self.upper_nats + 1e-9):
            raise ValueError(
                f"lower bound {self.lower_nats!r} exceeds upper bound {self.upper_nats!r}"
            )

    @property
    def lower_bits(self) -> float:
        return self.lower_nats / math.log(2.0)

    @property
    def upper_bits(self) -> float:
        return self.upper_nats / math.log(2.0)

    def to_dict(self) -> dict:
        return {
            "lower_nats": self.lower_nats,
            "upper_nats": self.upper_nats,
            "lower_method": self.lower_method,
            "upper_method": self.upper_method,
            "metadata": self.metadata,
        }


def _check_prior(prior: Prior, ch: Dmc):
    if prior.labels != ch.input_labels:
        raise ValueError(
            f"prior labels {prior.labels} do not match channel inputs {ch.input_labels}"
        )


def mutual_information(prior: Prior, ch: Dmc) -> float:
    """I(X;Y) in nats for the given input assignment, with 0*log 0 = 0."""
    _check_prior(prior, ch)
    p = prior.probs
    w = ch.matrix
    m = p @ w
    joint = p[:, None] * w
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = np.log(w / m[None, :])
        terms = np.where(joint > 0, joint * log_ratio, 0.0)
    return float(terms.sum())


def _row_entropies_neg(w: np.ndarray) -> np.ndarray:
    """sum_y W log W per row (the negative Shannon entropy of each row)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(w > 0, w * np.log(np.where(w > 0, w, 1.0)), 0.0)
    return t.sum(axis=1)


@dataclass(frozen=True)
class BaResult:
    """Outcome of a certified Blahut-Arimoto run.

    ``capacity_nats`` is the information rate of ``prior`` (an achievable
    value); the true optimum lies within ``bracket_nats`` above it.
    """

    capacity_nats: float
    prior: Prior
    iterations: int
    bracket_nats: float
    multiplier: float = 0.0


def _ba_fixed_multiplier(w, rowneg, s, cost, tol, max_iter, p0, strict=True):
    """Maximise I(p) - s*E[cost] by alternating maximisation.

    Returns (p, lower, best_upper, iterations) where lower/best_upper
    bracket the optimum of the penalised objective (no budget offset).

    With ``strict=False`` the iteration cap is a soft budget: the current
    iterate is returned even if the bracket is still wider than ``tol``.
    Both bounds remain valid in that case, so callers that re-certify the
    final answer (the constrained bisection does) can use capped solves as
    cheap progress steps instead of hard failures.
    """
    n = w.shape[0]
    logp = np.log(np.full(n, 1.0 / n) if p0 is None else np.maximum(p0, 1e-300))
    logp -= _logsumexp(logp)
    penal = 0.0 if s == 0.0 else s * cost
    best_upper = np.inf
    lower = -np.inf
    for it in range(1, max_iter + 1):
        p = np.exp(logp)
        m = p @ w
        logm = np.log(np.maximum(m, 1e-300))
        d = rowneg - w @ logm - penal
        lower = float(p @ d)
        best_upper = min(best_upper, float(d.max()))
        if best_upper - lower <= tol:
            return p, lower, best_upper, it
        logp = logp + d
        logp -= _logsumexp(logp)
    if strict:
        raise ConvergenceError(
            f"no convergence after {max_iter} iterations",
            bracket_width=best_upper - lower,
        )
    return p, lower, best_upper, max_iter


def _logsumexp(v):
    hi = v.max()
    return hi + np.log(np.exp(v - hi).sum())


def _constrained_newton(w, rowneg, cost, budget, support, p_seed, s_seed):
    """Solve the stationarity system of the budget-constrained problem.

    On the given support the optimum satisfies: every supported input has
    the same tilted score ``D(W_x || m) - s*cost_x``, the prior sums to one
    and spends the budget exactly.  Newton iteration on that square system
    converges quadratically, which sidesteps the crawling alternating
    updates when two inputs are nearly tied.  Returns ``(p, s, score)`` on
    success (p restricted to the support) or None.
    """
    sub = np.asarray(support, dtype=np.intp)
    k = sub.size
    if k < 2:
        return None
    ws = w[sub]
    cs = cost[sub]
    p = np.maximum(p_seed[sub], 1e-12)
    p = p / p.sum()
    s = max(float(s_seed), 0.0)
    m = p @ ws
    score = rowneg[sub] - ws @ np.log(np.maximum(m, 1e-300)) - s * cs
    level = float(score @ p)
    for _ in range(60):
        m = p @ ws
        score = rowneg[sub] - ws @ np.log(np.maximum(m, 1e-300)) - s * cs
        resid = np.concatenate([score - level, [p.sum() - 1.0], [p @ cs - budget]])
        if not np.isfinite(resid).all():
            return None
        if np.abs(resid).max() < 1e-13:
            break
        gram = ws @ (ws / np.maximum(m, 1e-300)).T
        jac = np.zeros((k + 2, k + 2))
        jac[:k, :k] = -gram
        jac[:k, k] = -cs
        jac[:k, k + 1] = -1.0
        jac[k, :k] = 1.0
        jac[k + 1, :k] = cs
        try:
            step = np.linalg.solve(jac, -resid)
        except np.linalg.LinAlgError:
            return None
        alpha = 1.0
        for _ in range(50):
            p_new = p + alpha * step[:k]
            if p_new.min() > 0.0:
                break
            alpha *= 0.5
        else:
            return None
        p = p_new
        s += alpha * step[k]
        level += alpha * step[k + 1]
    else:
        return None
    if np.abs(resid).max() > 1e-10 or s < 0.0:
        return None
    return p, s, level


def _kkt_polish(w, rowneg, cost, budget, p_seed, s_seed):
    """Active-set refinement of a constrained-capacity iterate.

    Guesses the optimal support from the seed prior and its tilted scores,
    solves the stationarity system on it, and repairs the guess when the
    full-input check disagrees (a supported input that wants negative mass
    is dropped, an outside input whose score exceeds the common level is
    added).  Returns ``(p_full, s)`` or None if no guess checks out.
    """
    n = w.shape[0]
    m = p_seed @ w
    scores = rowneg - w @ np.log(np.maximum(m, 1e-300)) - s_seed * cost
    support = np.where((p_seed > 1e-7) | (scores > scores.max() - 1e-5), True, False)
    tried = set()
    for _ in range(8):
        key = tuple(np.flatnonzero(support))
        if key in tried or len(key) < 2:
            return None
        tried.add(key)
        sol = _constrained_newton(w, rowneg, cost, budget, np.flatnonzero(support),
                                  p_seed, s_seed)
        if sol is None:
            # shrink: retry without the weakest member of the guess
            idx = np.flatnonzero(support)
            weakest = idx[np.argmin(p_seed[idx])]
            support[weakest] = False
            continue
        p_sub, s, level = sol
        if p_sub.min() < 1e-12:
            idx = np.flatnonzero(support)
            support[idx[np.argmin(p_sub)]] = False
            continue
        p_full = np.zeros(n)
        p_full[np.flatnonzero(support)] = p_sub
        m = p_full @ w
        scores = rowneg - w @ np.log(np.maximum(m, 1e-300)) - s * cost
        outside = ~support
        if np.any(scores[outside] > level + 1e-11):
            worst = np.flatnonzero(outside)[np.argmax(scores[outside])]
            support[worst] = True
            p_seed = np.maximum(p_full, 1e-12)
            s_seed = s
            continue
        return p_full, s
    return None


def blahut_arimoto(ch: Dmc, tol: float = 1e-9, max_iter: int = 100_000,
                   cost=None, budget: float | None = None,
                   budget_tol: float = 1e-9, init=None) -> BaResult:
    """Channel capacity by alternating maximisation, with certification.

    Every iteration produces a valid achievable rate (the information of the
    current prior) and a valid converse bound (the worst-case divergence from
    the current output law); the solver stops once they agree within ``tol``.

    With ``cost`` (one value per input) and ``budget`` given, the average
    constraint ``E[cost] <= budget`` is enforced by bisecting the Lagrange
    multiplier until the constraint is met within ``budget_tol``.

    Raises:
        ConvergenceError: bracket still wider than ``tol`` after ``max_iter``.
        ValueError: infeasible budget or mismatched cost vector.
    """
    w = ch.matrix
    rowneg = _row_entropies_neg(w)
    if cost is None:
        p, lower, upper, its = _ba_fixed_multiplier(w, rowneg, 0.0, None, tol, max_iter, init)
        return BaResult(lower, Prior(ch.input_labels, p), its, upper - lower)

    cost = np.asarray(cost, dtype=np.float64)
    if cost.shape != (ch.n_inputs,):
        raise ValueError("cost must assign one value to each channel input")
    if budget is None:
        raise ValueError("budget is required when a cost vector is given")
    if budget < cost.min():
        raise ValueError(f"budget {budget} below the cheapest input cost {cost.min()}")

    total_its = 0

    # Near a multiplier where the active support changes, the penalised
    # problem has near-tied inputs and the alternating updates drain their
    # mass at a crawl.  Individual solves therefore run with a soft
    # iteration cap and may return an unconverged bracket; warm starts
    # carry the drained iterate from one multiplier to the next, and the
    # explicit certificate check at the end is what guarantees the result.
    def solve(s, p0, cap=max_iter):
        nonlocal total_its
        p, lo, up, its = _ba_fixed_multiplier(
            w, rowneg, s, cost, tol, cap, p0, strict=False
        )
        total_its += its
        # 'up + s*budget' is a converse bound on the constrained capacity for any s >= 0
        return p, lo, up + s * budget, float(p @ cost)

    p, lo, up, ec = solve(0.0, init)
    best_upper = up
    if ec <= budget + budget_tol:
        # budget inactive: same contract as the unconstrained solver
        if best_upper - lo > tol:
            raise ConvergenceError(
                f"no convergence after {max_iter} iterations",
                bracket_width=best_upper - lo,
            )
        return BaResult(lo, Prior(ch.input_labels, p), total_its, best_upper - lo)

    cap_mid = min(max_iter, 25_000)
    p_inf, ec_inf = p, ec

    # grow the multiplier until the constraint is satisfied, then bisect
    s_lo, s_hi = 0.0, 1.0
    p_hi = p
    for _ in range(200):
        p_hi, lo, up, ec = solve(s_hi, p_hi, cap=cap_mid)
        best_upper = min(best_upper, up)
        if ec <= budget:
            break
        p_inf, ec_inf = p_hi, ec
        s_lo, s_hi = s_hi, 2.0 * s_hi
    else:
        raise ConvergenceError("could not bracket the cost multiplier")

    p_feas, ec_feas = p_hi, ec
    p_last = p_hi
    for _ in range(200):
        if budget - budget_tol <= ec_feas <= budget + budget_tol:
            break
        if s_hi - s_lo <= 1e-12 * max(1.0, s_hi):
            break
        s_mid = 0.5 * (s_lo + s_hi)
        p_last, lo, up, ec = solve(s_mid, p_last, cap=cap_mid)
        best_upper = min(best_upper, up)
        if ec > budget + budget_tol:
            s_lo = s_mid
            p_inf, ec_inf = p_last, ec
        else:
            s_hi = s_mid
            p_feas, ec_feas = p_last, ec

    def achievable(q):
        m = q @ w
        return float(q @ (rowneg - w @ np.log(np.maximum(m, 1e-300))))

    s_mid = 0.5 * (s_lo + s_hi)
    p_best, lo_best, s_best = p_feas, achievable(p_feas), s_mid

    # quadratic endgame: solve the stationarity system on the support the
    # iterate identified; certifies to roundoff even when two inputs are
    # nearly tied and the alternating updates crawl
    kkt = _kkt_polish(w, rowneg, cost, budget, np.maximum(p_feas, 0.0), s_mid)
    if kkt is not None:
        p_hat, s_hat = kkt
        if float(p_hat @ cost) <= budget + budget_tol:
            m = p_hat @ w
            scores = rowneg - w @ np.log(np.maximum(m, 1e-300)) - s_hat * cost
            best_upper = min(best_upper, float(scores.max()) + s_hat * budget)
            lo_hat = achievable(p_hat)
            if lo_hat > lo_best:
                p_best, lo_best, s_best = p_hat, lo_hat, s_hat

    if best_upper - lo_best > tol:
        # alternating-update fallback: tighten both ends of the multiplier
        # bracket and, if the spend still straddles the budget, time-share
        # between the two end priors to spend it exactly
        p_fin, lo, up, ec_fin = solve(s_hi, p_feas, cap=max(max_iter, 400_000))
        best_upper = min(best_upper, up)
        if ec_fin <= budget + budget_tol:
            p_feas, ec_feas = p_fin, ec_fin
        elif ec_fin < ec_inf:
            p_inf, ec_inf = p_fin, ec_fin
        cand = achievable(p_feas)
        if cand > lo_best:
            p_best, lo_best, s_best = p_feas, cand, s_mid
        if ec_feas < budget - budget_tol:
            p_end, lo, up, ec_end = solve(s_lo, p_inf, cap=max(max_iter, 400_000))
            best_upper = min(best_upper, up)
            if ec_end > budget + budget_tol:
                share = (budget - ec_feas) / (ec_end - ec_feas)
                p_mix = share * p_end + (1.0 - share) * p_feas
                cand = achievable(p_mix)
                if cand > lo_best:
                    p_best, lo_best, s_best = p_mix, cand, s_mid
            else:
                cand = achievable(p_end)
                if cand > lo_best:
                    p_best, lo_best, s_best = p_end, cand, s_lo

    if best_upper - lo_best > max(10 * tol, 1e-7):
        raise ConvergenceError(
            "constrained bisection did not close the bracket",
            bracket_width=best_upper - lo_best,
        )
    # the budget_tol feasibility band can leave the achievable side a few
    # parts in 1e10 above the exact-budget converse; a negative width would
    # only confuse callers
    bracket = max(best_upper - lo_best, 0.0)
    return BaResult(lo_best, Prior(ch.input_labels, p_best), total_its,
                    bracket, multiplier=s_best)


# ---------------------------------------------------------------------------
# symmetrized KL divergence bounds


def sym_kl_value(prior: Prior, ch: Dmc) -> float:
    """Symmetrized divergence between the joint law and the product of marginals.

    Returns ``D(joint || product) + D(product || joint)`` in nats, which for
    any prior dominates I(X;Y).  The reverse part is infinite whenever some
    output is reachable overall but impossible under an input the prior
    uses, in which case ``math.inf`` is returned.
    """
    _check_prior(prior, ch)
    p = prior.probs
    w = ch.matrix
    supp = p > 0
    m = p @ w
    live = m > 0
    if np.any((w[supp][:, live] == 0)):
        return math.inf
    ws = w[np.ix_(supp, live)]
    ps = p[supp]
    ms = m[live]
    logw = np.log(ws)
    # D_sym collapses to  sum_x p [sum_y W log W]  -  sum_y m(y) * s(y)
    # with s(y) = sum_x p(x) log W(y|x); see the quadratic form used by
    # sym_kl_capacity_bound.
    return float(ps @ (ws * logw).sum(axis=1) - ms @ (logw.T @ ps))


def _project_simplex(v):
    """Euclidean projection of v onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    good = u - css / idx > 0
    rho = idx[good][-1]
    theta = css[rho - 1] / rho
    return np.clip(v - theta, 0.0, None)


def _project_simplex_capped(v, cost, budget):
    """Projection onto the simplex intersected with ``cost @ p <= budget``."""
    p = _project_simplex(v)
    if cost is None or cost @ p <= budget + 1e-12:
        return p
    lo, hi = 0.0, 1.0
    while cost @ _project_simplex(v - hi * cost) > budget:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise ValueError("cost constraint infeasible under projection")
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if cost @ _project_simplex(v - mid * cost) > budget:
            lo = mid
        else:
            hi = mid
    return _project_simplex(v - hi * cost)


def sym_kl_capacity_bound(ch: Dmc, cost=None, budget: float | None = None,
                          n_restarts: int = 50, seed: int = 0,
                          grad_tol: float = 1e-9, max_iter: int = 2000) -> float:
    """Maximise the symmetrized divergence over input assignments.

    The result upper-bounds channel capacity (under the same cost
    constraint, if one is given).  The objective is the quadratic
    ``p @ e - p @ Q p`` with ``e_x = sum_y W log W`` and
    ``Q = W (log W)^T``, maximised by projected gradient ascent with step
    halving from ``n_restarts`` random starts plus the uniform prior and
    the Blahut-Arimoto optimiser (which guarantees the result is never
    below the capacity estimate itself).

    Returns ``math.inf`` if the channel rows do not share a common support,
    since mixing two inputs with different supports already drives the
    reverse divergence to infinity.
    """
    w = ch.matrix
    n = ch.n_inputs
    support = w[0] > 0
    if any(np.any((w[i] > 0) != support) for i in range(1, n)):
        return math.inf
    ws = w[:, support]
    logw = np.log(ws)
    e = (ws * logw).sum(axis=1)
    q_sym = ws @ logw.T
    q_sym = q_sym + q_sym.T

    def value(p):
        return float(p @ e - 0.5 * p @ (q_sym @ p))

    def ascend(p):
        best = value(p)
        for _ in range(max_iter):
            g = e - q_sym @ p
            step = 1.0
            improved = False
            while step > 1e-14:
                cand = _project_simplex_capped(p + step * g, cost, budget)
                fv = value(cand)
                if fv > best + 1e-15:
                    p, best, improved = cand, fv, True
                    break
                step *= 0.5
            tau = 1e-6
            moved = _project_simplex_capped(p + tau * g, cost, budget)
            if np.linalg.norm((moved - p) / tau) <= grad_tol or not improved:
                break
        return best

    if cost is not None:
        cost = np.asarray(cost, dtype=np.float64)
        if budget is None:
            raise ValueError("budget is required when a cost vector is given")

    rng = np.random.default_rng(seed)
    starts = [np.full(n, 1.0 / n)]
    ba = blahut_arimoto(ch, tol=1e-9, cost=cost, budget=budget)
    starts.append(np.maximum(ba.prior.probs, 0.0))
    for _ in range(n_restarts):
        starts.append(rng.dirichlet(np.ones(n)))
    best = -math.inf
    for p0 in starts:
        p0 = _project_simplex_capped(p0, cost, budget)
        best = max(best, ascend(p0))
    if best < ba.capacity_nats - 1e-9:
        raise ConvergenceError(
            f"divergence maximisation returned {best}, below the capacity "
            f"estimate {ba.capacity_nats}; ascent failed"
        )
    return best


def poisson_two_point_prior(avg: float, peak: float) -> Prior:
    """The on-off assignment that maximises the Poisson divergence bound.

    Mass ``min(avg/peak, 1/2)`` on the peak intensity, remainder on zero;
    its mean never exceeds ``avg``.
    """
    if not 0 < avg <= peak:
        raise ValueError(f"need 0 < avg <= peak, got avg={avg} peak={peak}")
    s = min(avg / peak, 0.5)
    return Prior((0.0, peak), np.array([1.0 - s, s]))


def poisson_sym_kl_cov(prior: Prior, background: float) -> float:
    """Closed-form symmetrized divergence for the exact Poisson channel.

    For counts with mean ``x + background`` the divergence under a prior on
    intensities collapses to ``Cov(X + background, log(X + background))``.
    Infinite when the prior can place the mean at zero (log 0).
    """
    if background < 0:
        raise ValueError(f"background must be >= 0, got {background}")
    lam = np.asarray(prior.labels, dtype=np.float64) + background
    p = prior.probs
    if np.any((lam == 0) & (p > 0)):
        return math.inf if p[lam == 0].sum() < 1.0 else 0.0
    supp = p > 0
    lam, p = lam[supp], p[supp]
    loglam = np.log(lam)
    return float(p @ (lam * loglam) - (p @ lam) * (p @ loglam))


def poisson_sym_kl_max(avg: float, peak: float, background: float) -> float:
    """Largest Poisson divergence bound over priors with mean budget ``avg``.

    Piecewise closed form: ``(avg/peak)(peak-avg) log(peak/background + 1)``
    while ``avg < peak/2``, saturating at ``(peak/4) log(peak/background+1)``
    beyond; continuous at the joint.  Infinite for zero background.
    """
    if not 0 < avg <= peak:
        raise ValueError(f"need 0 < avg <= peak, got avg={avg} peak={peak}")
    if background < 0:
        raise ValueError(f"background must be >= 0, got {background}")
    if background == 0:
        return math.inf
    gain = math.log(peak / background + 1.0)
    if avg < peak / 2.0:
        return (avg / peak) * (peak - avg) * gain
    return (peak / 4.0) * gain


def topsoe_upper(prior: Prior, ch: Dmc, out_dist) -> float:
    """Mismatched-output upper bound on mutual information.

    ``E[log(W(Y|X)/q(Y))]`` dominates I(X;Y) for every output law ``q`` and
    collapses to it exactly when ``q`` is the true output marginal.
    Returns ``math.inf`` when ``q`` puts zero mass on a reachable output.
    """
    _check_prior(prior, ch)
    q = np.asarray(out_dist, dtype=np.float64)
    if q.shape != (ch.n_outputs,):
        raise ValueError("out_dist must assign a probability to every output")
    if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-9:
        raise ValueError("out_dist must be a probability vector")
    joint = prior.probs[:, None] * ch.matrix
    mask = joint > 0
    if np.any(q[np.where(mask)[1]] == 0):
        return math.inf
    return float(np.sum(joint[mask] * np.log(ch.matrix[mask] / q[np.where(mask)[1]])))


# ---------------------------------------------------------------------------
# Monte Carlo single-letter lower bound


def iid_lower_bound(sample_outputs, prior: Prior, n_slots: int, seed: int,
                    burn_in: int, n_boot: int = 200, ci_level: float = 0.95,
                    tol: float | None = None) -> MiEstimate:
    """Single-letter achievable rate under i.i.d. inputs, from simulation.

    Draws an i.i.d. input sequence from ``prior``, runs it through
    ``sample_outputs(values, rng)``, discards the first ``burn_in`` slots
    (which have not seen a full interference history) and estimates the
    stationary per-slot I(X_i; Y_i) with a bootstrap confidence interval.
    This is a valid rate for the channel with memory because the block
    information is superadditive across slots under independent inputs.
    """
    if burn_in < 0 or burn_in >= n_slots:
        raise ValueError("need 0 <= burn_in < n_slots")
    rng = np.random.default_rng(seed)
    x_idx = rng.choice(len(prior.labels), size=n_slots, p=prior.probs)
    values = np.asarray(prior.labels, dtype=np.float64)[x_idx]
    ys = np.asarray(sample_outputs(values, rng))
    if ys.shape != (n_slots,):
        raise ValueError("sample_outputs must return one output per slot")
    x_kept = x_idx[burn_in:]
    _, y_kept = np.unique(ys[burn_in:], return_inverse=True)
    return mi_with_bootstrap(x_kept, y_kept, rng, n_boot=n_boot,
                             ci_level=ci_level, tol=tol)


# ---------------------------------------------------------------------------
# block sandwich bounds for the tapped-delay-line Poisson receiver


@dataclass(frozen=True)
class SandwichResult:
    """One side of the block-channel capacity sandwich (rates in nats/slot)."""

    rate_nats: float
    block_capacity_nats: float
    slots_per_block: int
    ba: BaResult
    y_max: int


def _block_poisson_dmc(ch: LtiPoissonChannel, grid, lead_slots, obs_slots,
                       tail_tol, max_entries):
    """Product DMC over one block of the tapped-delay-line Poisson channel.

    The block carries ``lead_slots + obs_slots`` inputs at positions
    ``-lead_slots .. obs_slots - 1``; the observed outputs are the counts at
    positions ``0 .. obs_slots - 1``, each Poisson with the background plus
    the tap-weighted within-block history, truncated at a per-slot overflow
    symbol.  Interference from outside the block is absent by construction.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if np.any(grid < 0) or np.any(grid > ch.peak + 1e-9):
        raise ValueError("grid intensities must lie in [0, peak]")
    n_in_slots = lead_slots + obs_slots
    n_super = len(grid) ** n_in_slots
    if n_super > 1_000_000:
        raise AlphabetSizeError(
            f"{n_super} block inputs exceed the 1e6 super-alphabet guard"
        )
    taps = np.asarray(ch.taps)
    k = ch.memory
    mean_max = ch.background + taps.sum() * grid.max()
    y_max = poisson_y_max(mean_max, tail_tol)
    n_cols = (y_max + 1) ** obs_slots
    if n_super * n_cols > max_entries:
        raise AlphabetSizeError(
            f"block matrix would hold {n_super * n_cols:.2e} entries "
            f"(guard {max_entries:.1e}); reduce the grid or block length"
        )
    blocks = np.array(list(itertools.product(grid, repeat=n_in_slots)))
    # mean count of observed slot i given the block input
    means = np.empty((n_super, obs_slots))
    for i in range(obs_slots):
        acc = np.full(n_super, ch.background)
        for j in range(min(k, i + lead_slots) + 1):
            acc += taps[j] * blocks[:, lead_slots + i - j]
        means[:, i] = acc
    counts = np.arange(y_max)
    w = np.ones((n_super, 1))
    for i in range(obs_slots):
        rows = np.empty((n_super, y_max + 1))
        rows[:, :y_max] = stats.poisson.pmf(counts[None, :], means[:, i, None])
        rows[:, y_max] = stats.poisson.sf(y_max - 1, means[:, i])
        w = (w[:, :, None] * rows[:, None, :]).reshape(n_super, -1)
    w /= w.sum(axis=1, keepdims=True)
    labels = tuple(tuple(b) for b in blocks)
    return Dmc(labels, tuple(range(n_cols)), w), blocks, y_max


def _block_cost(ch, blocks, charged_slots):
    """Average intensity over the charged block slots, or None if never binding."""
    if ch.avg >= ch.peak:
        return None, None
    return blocks[:, -charged_slots:].mean(axis=1), ch.avg


def sandwich_lower(ch: LtiPoissonChannel, r: int, grid=None, tol: float = 1e-6,
                   tail_tol: float = 1e-12, max_entries: float = 6e7,
                   max_iter: int = 50_000) -> SandwichResult:
    """Achievable rate from blocks whose first ``memory`` outputs are discarded.

    Each block transmits ``memory + r`` inputs but only the last ``r``
    outputs are decoded; those never see the previous block, so the block
    channel is memoryless and its capacity divided by the full block length
    is achievable on the original channel.  All ``memory + r`` transmitted
    slots are charged against the average budget whenever
    ``ch.avg < ch.peak``.
    """
    if r < 1:
        raise ValueError(f"need r >= 1, got {r}")
    if grid is None:
        grid = intensity_grid(ch.peak)
    k = ch.memory
    dmc, blocks, y_max = _block_poisson_dmc(ch, grid, k, r, tail_tol, max_entries)
    cost, budget = _block_cost(ch, blocks, k + r)
    ba = blahut_arimoto(dmc, tol=tol, max_iter=max_iter, cost=cost, budget=budget)
    return SandwichResult(ba.capacity_nats / (k + r), ba.capacity_nats, k + r, ba, y_max)


def sandwich_upper(ch: LtiPoissonChannel, r: int, grid=None, tol: float = 1e-6,
                   tail_tol: float = 1e-12, max_entries: float = 6e7,
                   max_iter: int = 50_000) -> SandwichResult:
    """Converse rate from blocks with a freely chosen interference history.

    The transmitter of the relaxed channel may install an arbitrary
    ``memory``-slot prefix before each ``r``-slot block, which can only
    help, so the block capacity divided by ``r`` dominates the true
    capacity.  The block channel law is the same as in
    :func:`sandwich_lower`; the relaxation differs in that the prefix slots
    are free -- only the ``r`` decoded slots are charged against the
    average budget (charging the virtual prefix would cut into the
    relaxation's freedom and void the converse) -- and in the rate divisor.
    """
    if r < 1:
        raise ValueError(f"need r >= 1, got {r}")
    if grid is None:
        grid = intensity_grid(ch.peak)
    k = ch.memory
    dmc, blocks, y_max = _block_poisson_dmc(ch, grid, k, r, tail_tol, max_entries)
    cost, budget = _block_cost(ch, blocks, r)
    ba = blahut_arimoto(dmc, tol=tol, max_iter=max_iter, cost=cost, budget=budget)
    return SandwichResult(ba.capacity_nats / r, ba.capacity_nats, r, ba, y_max)


def lti_poisson_iid_lower(ch: LtiPoissonChannel, prior: Prior, n_slots: int,
                          seed: int, **kwargs) -> MiEstimate:
    """Convenience wrapper: i.i.d. Monte Carlo lower bound for the tap-line channel."""
    return iid_lower_bound(
        lambda xs, rng: simulate_lti_poisson(ch, xs, rng),
        prior, n_slots, seed, burn_in=max(ch.memory, 1), **kwargs,
    )
