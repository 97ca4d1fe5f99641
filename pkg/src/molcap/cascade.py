"""Information decay through chains of identical channels.

An ``m``-fold cascade of a memoryless channel is the channel of its
``m``-step transition matrix, so the long-run behaviour is governed by the
Markov structure of that matrix: its communicating classes, which of them
are closed, and their periods.  This module computes that structure, the
limiting cascade capacity ``log(sum of closed-class periods)`` together
with the explicit zero-error signalling scheme that achieves it, exact
closed forms for the binary-symmetric cascade, the Dobrushin contraction
envelope, a ladder-shaped example whose cascade converges to a Z-channel
while every finite truncation has zero zero-error capacity, and the
counting of binary strings without adjacent zeros that pins the
zero-error rate of the unit-delay selector channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capacity import Prior, mutual_information
from .channels import Dmc


@dataclass(frozen=True)
class ChainStructure:
    """Communicating-class decomposition of a square stochastic matrix.

    Attributes:
        classes: the communicating classes, as tuples of state labels.
        closed: per class, whether no transition leaves it.
        periods: per class, the gcd of its cycle lengths (None for open
            classes, whose period plays no role in the cascade limit).
        phases: per closed class, the cyclic partition of its states in
            step order: one step moves phase ``j`` to phase ``j+1 mod T``.
            None for open classes.
        transient_states: labels outside every closed class.
    """

    classes: tuple
    closed: tuple
    periods: tuple
    phases: tuple
    transient_states: tuple

    @property
    def n_closed(self) -> int:
        return sum(self.closed)


def _strongly_connected_components(adj):
    """Kosaraju's algorithm, iterative; returns components as index lists."""
    n = len(adj)
    radj = [[] for _ in range(n)]
    for u, vs in enumerate(adj):
        for v in vs:
            radj[v].append(u)
    order = []
    seen = [False] * n
    for start in range(n):
        if seen[start]:
            continue
        stack = [(start, 0)]
        seen[start] = True
        while stack:
            node, ptr = stack[-1]
            if ptr < len(adj[node]):
                stack[-1] = (node, ptr + 1)
                nxt = adj[node][ptr]
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append((nxt, 0))
            else:
                order.append(node)
                stack.pop()
    comp = [-1] * n
    n_comp = 0
    for start in reversed(order):
        if comp[start] >= 0:
            continue
        stack = [start]
        comp[start] = n_comp
        while stack:
            node = stack.pop()
            for nxt in radj[node]:
                if comp[nxt] < 0:
                    comp[nxt] = n_comp
                    stack.append(nxt)
        n_comp += 1
    groups = [[] for _ in range(n_comp)]
    for v, c in enumerate(comp):
        groups[c].append(v)
    return groups, comp


def _class_period_and_phases(adj, members):
    """Period of a strongly connected vertex set by BFS level differences."""
    members = list(members)
    inside = set(members)
    level = {members[0]: 0}
    queue = [members[0]]
    g = 0
    while queue:
        u = queue.pop(0)
        for v in adj[u]:
            if v not in inside:
                continue
            if v in level:
                g = math.gcd(g, level[u] + 1 - level[v])
            else:
                level[v] = level[u] + 1
                queue.append(v)
    period = abs(g) if g != 0 else 1
    phases = [[] for _ in range(period)]
    for v in members:
        phases[level[v] % period].append(v)
    return period, [tuple(sorted(ph)) for ph in phases]


def analyze_chain(ch: Dmc) -> ChainStructure:
    """Decompose a square channel into communicating classes.

    Edges are the strictly positive transitions.  A class is closed when no
    positive transition leaves it; only closed classes get a period and a
    cyclic phase partition, because only they survive in the cascade limit.
    """
    if ch.input_labels != ch.output_labels:
        raise ValueError("chain analysis needs matching input/output state labels")
    mat = ch.matrix
    n = ch.n_inputs
    adj = [list(np.nonzero(mat[i] > 0)[0]) for i in range(n)]
    groups, comp = _strongly_connected_components(adj)
    labels = ch.input_labels
    classes, closed, periods, phases = [], [], [], []
    transient = []
    for idx, members in enumerate(groups):
        is_closed = all(comp[v] == idx for u in members for v in adj[u])
        classes.append(tuple(labels[v] for v in sorted(members)))
        closed.append(is_closed)
        if is_closed:
            period, phase_idx = _class_period_and_phases(adj, sorted(members))
            periods.append(period)
            phases.append(tuple(tuple(labels[v] for v in ph) for ph in phase_idx))
        else:
            periods.append(None)
            phases.append(None)
            transient.extend(labels[v] for v in sorted(members))
    return ChainStructure(tuple(classes), tuple(closed), tuple(periods),
                          tuple(phases), tuple(transient))


def deep_cascade_limit(structure: ChainStructure) -> float:
    """Limiting cascade capacity in nats: log of the total closed-class phase count.

    As the cascade deepens, everything except the closed-class identity and
    the phase within it washes out, and both are recoverable without error;
    the number of distinguishable messages is therefore the sum of the
    closed-class periods.
    """
    total = sum(t for t, c in zip(structure.periods, structure.closed) if c)
    if total == 0:
        raise ValueError("chain has no closed class; the limit is undefined")
    return math.log(total)


def cascade_mi_curve(ch: Dmc, prior: Prior, m_max: int) -> np.ndarray:
    """I(X_1; Y_m) in nats for cascades m = 1 .. m_max.

    The m-step matrix is accumulated incrementally with row renormalisation
    so stochasticity cannot drift along the curve.  The data-processing
    inequality makes the result nonincreasing in m.
    """
    if m_max < 1:
        raise ValueError(f"m_max must be >= 1, got {m_max}")
    if ch.input_labels != ch.output_labels:
        raise ValueError("cascading needs matching input/output state labels")
    values = np.empty(m_max)
    acc = ch
    values[0] = mutual_information(prior, ch)
    for m in range(1, m_max):
        mat = acc.matrix @ ch.matrix
        mat /= mat.sum(axis=1, keepdims=True)
        acc = Dmc(ch.input_labels, ch.output_labels, mat)
        values[m] = mutual_information(prior, acc)
    return values


def bsc_cascade_capacity(p: float, m: int) -> float:
    """Capacity in bits of m chained binary symmetric channels.

    The cascade is again binary symmetric with crossover
    ``(1 - (1-2p)^m) / 2``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"crossover probability must be in [0, 1], got {p}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    q = 0.5 * (1.0 - (1.0 - 2.0 * p) ** m)
    return 1.0 - binary_entropy_bits(q)


def binary_entropy_bits(q: float) -> float:
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {q}")
    if q in (0.0, 1.0):
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


def dobrushin_coefficient(ch: Dmc) -> float:
    """Worst-case total-variation distance between two rows.

    This contraction coefficient multiplies any input-distribution TV gap
    per channel use, hence information about the input dies at least
    geometrically whenever it is below one.
    """
    mat = ch.matrix
    best = 0.0
    for i in range(mat.shape[0]):
        diffs = 0.5 * np.abs(mat[i + 1:] - mat[i]).sum(axis=1)
        if diffs.size:
            best = max(best, float(diffs.max()))
    return best


def prior_entropy(prior: Prior) -> float:
    """Shannon entropy of an input assignment, in nats."""
    p = prior.probs[prior.probs > 0]
    return float(-(p * np.log(p)).sum())


def strong_dpi_envelope(ch: Dmc, prior: Prior, m_values) -> np.ndarray:
    """Geometric upper envelope ``eta^(m-1) H(X_1)`` on the cascade curve (nats)."""
    eta = dobrushin_coefficient(ch)
    h = prior_entropy(prior)
    return np.array([eta ** (m - 1) * h for m in np.atleast_1d(m_values)], dtype=np.float64)


# ---------------------------------------------------------------------------
# ladder example: cascade tends to a Z channel, zero-error capacity stays 0


def ladder_survival_default(m: int) -> float:
    """Default running survival product: drops from 3/4 toward 1/2 as 1/2 + 2^-(m+1)."""
    return 0.5 + 2.0 ** (-(m + 1))


def ladder_channel(n_rungs: int, survival=None) -> Dmc:
    """Climb-or-fall chain on states 0 .. n_rungs.

    State 0 is absorbing.  From rung ``i`` the walker climbs to ``i+1``
    with probability ``a_i`` and falls to 0 otherwise, where the ``a_i``
    are chosen so that the running product ``b_m = a_1 .. a_m`` matches
    ``survival(m)``.  The top rung keeps its climb probability as a
    self-loop so the ``m``-step pass-through probability from rung 1 stays
    exactly ``b_m`` for every ``m``.  Since every positive-probability path
    can fall to 0, any two inputs of any cascade remain confusable.

    Args:
        n_rungs: number of rungs above the absorbing floor.
        survival: map m -> b_m for m = 1 .. n_rungs; defaults to
            :func:`ladder_survival_default`.  Values must decrease strictly
            inside (1/2, 1) -- the regime where the cascade tends to a
            nondegenerate Z channel.
    """
    if n_rungs < 1:
        raise ValueError(f"need at least one rung, got {n_rungs}")
    survival = ladder_survival_default if survival is None else survival
    b = [1.0] + [float(survival(m)) for m in range(1, n_rungs + 1)]
    for m in range(1, n_rungs + 1):
        if not 0.5 < b[m] < 1.0 or b[m] >= b[m - 1]:
            raise ValueError(
                f"survival products must decrease strictly within (1/2, 1); "
                f"got b_{m} = {b[m]} after b_{m-1} = {b[m-1]}"
            )
    n = n_rungs + 1
    mat = np.zeros((n, n))
    mat[0, 0] = 1.0
    for i in range(1, n_rungs):
        a = b[i] / b[i - 1]
        mat[i, i + 1] = a
        mat[i, 0] = 1.0 - a
    a_top = b[n_rungs] / b[n_rungs - 1]
    mat[n_rungs, n_rungs] = a_top
    mat[n_rungs, 0] = 1.0 - a_top
    states = tuple(range(n))
    return Dmc(states, states, mat)


def ladder_cascade_mi_bits(n_rungs: int, p_climb_input: float = 0.5) -> float:
    """I(X;Y) in bits across ``n_rungs`` chained ladder channels.

    The input is supported on the floor (state 0) and the first rung; after
    ``n_rungs`` steps the rung input either reached the top (probability
    ``b_L``) or fell, so the cascade acts as a Z channel whose pass-through
    probability tends to 1/2 and the information to ``h(1/4) - 1/2`` bits.
    """
    if not 0.0 < p_climb_input < 1.0:
        raise ValueError("the two-point input needs interior probabilities")
    ch = ladder_channel(n_rungs)
    probs = np.zeros(n_rungs + 1)
    probs[0] = 1.0 - p_climb_input
    probs[1] = p_climb_input
    prior = Prior(ch.input_labels, probs)
    curve = cascade_mi_curve(ch, prior, n_rungs)
    return float(curve[-1]) / math.log(2.0)


def zero_error_capacity_is_zero(ch: Dmc) -> bool:
    """True iff no two inputs can ever be told apart with certainty.

    Checks that every pair of rows shares a positive output.  When that
    holds the confusability graph is complete and stays complete under
    products, so no zero-error code of any block length carries more than
    one message; when it fails, two inputs with disjoint supports already
    give a one-shot zero-error bit.
    """
    mat = ch.matrix > 0
    overlap = mat.astype(np.float64) @ mat.T.astype(np.float64)
    return bool(np.all(overlap > 0))


# ---------------------------------------------------------------------------
# zero-error signalling through a deep cascade


def class_phase_messages(structure: ChainStructure) -> list:
    """One representative state per (closed class, phase): the code book.

    The number of messages is the sum of the closed-class periods, so the
    code rate attains :func:`deep_cascade_limit` exactly.
    """
    messages = []
    for ci, is_closed in enumerate(structure.closed):
        if not is_closed:
            continue
        for pi, phase in enumerate(structure.phases[ci]):
            messages.append((ci, pi, phase[0]))
    if not messages:
        raise ValueError("chain has no closed class; nothing can be signalled")
    return messages


def decode_class_phase(structure: ChainStructure, state, m: int) -> tuple:
    """Recover (class, launch phase) from the state observed after m steps."""
    for ci, is_closed in enumerate(structure.closed):
        if not is_closed:
            continue
        for pi, phase in enumerate(structure.phases[ci]):
            if state in phase:
                return ci, (pi - m) % structure.periods[ci]
    raise ValueError(f"state {state!r} is not inside any closed class")


def simulate_class_phase_signaling(ch: Dmc, m: int, n_trials: int,
                                   rng: np.random.Generator) -> int:
    """Transmit random codewords through the m-cascade; returns error count.

    Encoding starts the chain at the representative state of a uniformly
    random (class, phase) message; decoding reads the class and phase of
    the final state.  Because closed classes cannot be left and phases
    advance deterministically modulo the period, the scheme is error-free:
    the return value is zero for every chain, depth and seed.
    """
    structure = analyze_chain(ch)
    messages = class_phase_messages(structure)
    label_index = {lab: i for i, lab in enumerate(ch.input_labels)}
    cum = np.cumsum(ch.matrix, axis=1)
    cum[:, -1] = 1.0
    picks = rng.integers(0, len(messages), size=n_trials)
    states = np.array([label_index[messages[k][2]] for k in picks])
    for _ in range(m):
        u = rng.random(n_trials)
        states = (cum[states] < u[:, None]).sum(axis=1)
    errors = 0
    for k, s in zip(picks, states):
        ci, pi = decode_class_phase(structure, ch.input_labels[s], m)
        if (ci, pi) != messages[k][:2]:
            errors += 1
    return errors


# ---------------------------------------------------------------------------
# binary strings without adjacent zeros


def rll_no_double_zero_count(n: int) -> int:
    """Number of length-n binary strings with no two adjacent zeros.

    Satisfies c(1) = 2, c(2) = 3, c(n) = c(n-1) + c(n-2): the Fibonacci
    recursion, because a valid string ends in 1 (extend any valid string)
    or in 10 (extend any valid string two back).
    """
    if n < 1:
        raise ValueError(f"length must be >= 1, got {n}")
    a, b = 2, 3  # counts for lengths 1 and 2
    if n == 1:
        return a
    for _ in range(n - 2):
        a, b = b, a + b
    return b


def rll_growth_rate_bits(n: int) -> float:
    """One-step growth ``log2 c(n)/c(n-1)`` of the adjacent-zero-free count.

    Converges (geometrically fast) to ``log2((1 + sqrt 5)/2)``, the largest
    rate at which such constrained strings (and hence codewords that are
    never confused on a unit-delay selector link) can accumulate.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return math.log2(rll_no_double_zero_count(n) / rll_no_double_zero_count(n - 1))
