import math

import numpy as np
import pytest

from molcap import (Dmc, Prior, analyze_chain, binary_entropy_bits,
                    bsc_cascade_capacity, cascade_mi_curve,
                    class_phase_messages, decode_class_phase,
                    dmc_power, dobrushin_coefficient, ladder_cascade_mi_bits,
                    ladder_channel, ladder_survival_default, make_bsc, make_z,
                    mutual_information, prior_entropy, deep_cascade_limit,
                    rll_growth_rate_bits, rll_no_double_zero_count,
                    simulate_class_phase_signaling, strong_dpi_envelope,
                    zero_error_capacity_is_zero)

LOG2 = math.log(2.0)


def random_chain(rng, n):
    """Row-stochastic matrix with a random sparsity pattern."""
    while True:
        mask = rng.random((n, n)) < rng.uniform(0.25, 0.8)
        if not mask.any(axis=1).all():
            continue
        mat = np.where(mask, rng.uniform(0.1, 1.0, size=(n, n)), 0.0)
        mat /= mat.sum(axis=1, keepdims=True)
        return Dmc(tuple(range(n)), tuple(range(n)), mat)


def reachability(adj):
    """Boolean transitive closure by iterated squaring."""
    n = adj.shape[0]
    reach = adj.copy()
    for _ in range(n):
        reach = reach | (reach @ adj)
    return reach


def classes_oracle(adj):
    """Mutual-reachability partition, as a set of frozensets."""
    n = adj.shape[0]
    reach = reachability(adj)
    both = reach & reach.T
    out = set()
    for i in range(n):
        members = frozenset(
            j for j in range(n)
            if i == j or (both[i, j] and both[j, i]))
        cls = frozenset(
            j for j in members
            if j == i or (reach[i, j] and reach[j, i]))
        # a state is in i's class iff they reach each other (or is i itself)
        cls = frozenset([i]) | frozenset(
            j for j in range(n) if reach[i, j] and reach[j, i])
        out.add(cls)
    return out


def period_oracle(adj, members):
    """gcd of all return times of a class member, scanned directly."""
    n = adj.shape[0]
    i = min(members)
    power = np.eye(n, dtype=bool)
    g = 0
    for t in range(1, 2 * n + 2):
        power = power @ adj
        if power[i, i]:
            g = math.gcd(g, t)
    return g if g else None


class TestStructure:
    def test_classes_match_reachability_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            ch = random_chain(rng, int(rng.integers(2, 9)))
            adj = ch.matrix > 0
            st = analyze_chain(ch)
            assert {frozenset(c) for c in st.classes} == classes_oracle(adj)

    def test_closed_flag_matches_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            ch = random_chain(rng, int(rng.integers(2, 8)))
            adj = ch.matrix > 0
            st = analyze_chain(ch)
            for members, closed in zip(st.classes, st.closed):
                outside = [j for j in range(ch.n_inputs)
                           if j not in members]
                leaks = any(adj[i, j] for i in members for j in outside)
                assert closed == (not leaks)

    def test_periods_match_return_time_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            ch = random_chain(rng, int(rng.integers(2, 8)))
            adj = ch.matrix > 0
            st = analyze_chain(ch)
            for members, closed, period in zip(st.classes, st.closed,
                                               st.periods):
                if closed:
                    assert period == period_oracle(adj, members)

    def test_phases_partition_each_closed_class(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            ch = random_chain(rng, 6)
            st = analyze_chain(ch)
            for members, closed, period, phases in zip(
                    st.classes, st.closed, st.periods, st.phases):
                if not closed:
                    assert phases is None
                    continue
                assert len(phases) == period
                flat = sorted(s for ph in phases for s in ph)
                assert flat == sorted(members)
                # one step always advances the phase by one (mod period)
                index = {s: k for k, ph in enumerate(phases) for s in ph}
                for s in members:
                    for t in np.flatnonzero(ch.matrix[s] > 0):
                        assert index[int(t)] == (index[s] + 1) % period

    def test_explicit_period_two_chain(self):
        mat = np.array([
            [0.0, 1.0, 0.0, 0.0],
            [0.5, 0.0, 0.5, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.2, 0.3, 0.3, 0.2],
        ])
        st = analyze_chain(Dmc((0, 1, 2, 3), (0, 1, 2, 3), mat))
        assert st.transient_states == (3,)
        by_members = dict(zip(st.classes, zip(st.closed, st.periods)))
        assert by_members[(0, 1, 2)] == (True, 2)
        assert by_members[(3,)] == (False, None)

    def test_requires_matching_alphabets(self):
        with pytest.raises(ValueError):
            analyze_chain(Dmc((0, 1), ("a", "b"), np.eye(2)))


class TestStructuralLimit:
    def test_sum_of_periods(self):
        # two closed cycles (lengths 2 and 3) plus one transient state
        n = 6
        mat = np.zeros((n, n))
        mat[0, 1] = mat[1, 0] = 1.0          # 2-cycle
        mat[2, 3] = mat[3, 4] = mat[4, 2] = 1.0  # 3-cycle
        mat[5] = [0.2, 0.2, 0.2, 0.2, 0.1, 0.1]
        st = analyze_chain(Dmc(tuple(range(n)), tuple(range(n)), mat))
        assert deep_cascade_limit(st) == pytest.approx(math.log(5))

    def test_identity_chain(self):
        st = analyze_chain(Dmc((0, 1, 2), (0, 1, 2), np.eye(3)))
        assert deep_cascade_limit(st) == pytest.approx(math.log(3))

    def test_single_mixing_class(self):
        mat = np.array([[0.5, 0.5], [0.4, 0.6]])
        st = analyze_chain(Dmc((0, 1), (0, 1), mat))
        assert deep_cascade_limit(st) == pytest.approx(0.0)

    def test_no_closed_class_rejected(self):
        # structurally impossible for a finite stochastic chain, so build
        # the structure by hand
        from molcap import ChainStructure
        st = ChainStructure(((0,),), (False,), (None,), (None,), (0,))
        with pytest.raises(ValueError):
            deep_cascade_limit(st)

    def test_deep_cascade_approaches_limit(self):
        # lazy two-cycle plus transient: I(X1;Y_m) under the signaling
        # prior approaches log(sum of periods)
        mat = np.array([
            [0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.3, 0.3, 0.4],
        ])
        ch = Dmc((0, 1, 2), (0, 1, 2), mat)
        st = analyze_chain(ch)
        msgs = class_phase_messages(st)
        probs = np.zeros(3)
        for _cls, _phase, state in msgs:
            probs[state] += 1.0 / len(msgs)
        prior = Prior((0, 1, 2), probs)
        val = mutual_information(prior, dmc_power(ch, 100))
        assert val == pytest.approx(deep_cascade_limit(st), abs=1e-9)


class TestCascadeCurve:
    def test_matches_direct_powers(self):
        rng = np.random.default_rng(4)
        ch = random_chain(rng, 4)
        prior = Prior(ch.input_labels, rng.dirichlet(np.ones(4)))
        curve = cascade_mi_curve(ch, prior, 6)
        for m in range(1, 7):
            want = mutual_information(prior, dmc_power(ch, m))
            assert curve[m - 1] == pytest.approx(want, abs=1e-10)

    def test_monotone_decrease(self):
        rng = np.random.default_rng(5)
        ch = random_chain(rng, 5)
        prior = Prior.uniform(ch.input_labels)
        curve = cascade_mi_curve(ch, prior, 12)
        assert all(curve[i + 1] <= curve[i] + 1e-12
                   for i in range(len(curve) - 1))

    def test_bsc_closed_form(self):
        for p in (0.05, 0.2):
            ch = make_bsc(p)
            prior = Prior.uniform((0, 1))
            curve = cascade_mi_curve(ch, prior, 8)
            for m in range(1, 9):
                want = bsc_cascade_capacity(p, m) * LOG2
                assert curve[m - 1] == pytest.approx(want, abs=1e-10)

    def test_bsc_cascade_formula(self):
        # m relayed flips compose to crossover (1 - (1-2p)^m) / 2
        p, m = 0.1, 5
        eff = (1 - (1 - 2 * p) ** m) / 2
        want = 1.0 - binary_entropy_bits(eff)
        assert bsc_cascade_capacity(p, m) == pytest.approx(want, abs=1e-14)


class TestDobrushin:
    def test_bsc_value(self):
        assert dobrushin_coefficient(make_bsc(0.1)) == pytest.approx(0.8)

    def test_extremes(self):
        ident = Dmc((0, 1), (0, 1), np.eye(2))
        assert dobrushin_coefficient(ident) == pytest.approx(1.0)
        flat = Dmc((0, 1), (0, 1), np.full((2, 2), 0.5))
        assert dobrushin_coefficient(flat) == pytest.approx(0.0)

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            mat = rng.dirichlet(np.ones(5), size=4)
            ch = Dmc(tuple(range(4)), tuple(range(5)), mat)
            want = max(0.5 * np.abs(mat[i] - mat[j]).sum()
                       for i in range(4) for j in range(4))
            assert dobrushin_coefficient(ch) == pytest.approx(want,
                                                              abs=1e-14)

    def test_envelope_formula(self):
        rng = np.random.default_rng(7)
        mat = rng.dirichlet(np.ones(4), size=4)
        ch = Dmc(tuple(range(4)), tuple(range(4)), mat)
        prior = Prior(ch.input_labels, rng.dirichlet(np.ones(4)))
        eta = dobrushin_coefficient(ch)
        ent = prior_entropy(prior)
        ms = np.array([1, 2, 5, 9])
        want = eta ** (ms - 1) * ent
        assert np.allclose(strong_dpi_envelope(ch, prior, ms), want,
                           atol=1e-13)

    def test_envelope_dominates_cascade(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            mat = rng.uniform(0.05, 1.0, size=(4, 4))
            mat /= mat.sum(axis=1, keepdims=True)
            ch = Dmc(tuple(range(4)), tuple(range(4)), mat)
            prior = Prior.uniform(ch.input_labels)
            ms = np.arange(1, 16)
            env = strong_dpi_envelope(ch, prior, ms)
            curve = cascade_mi_curve(ch, prior, 15)
            assert np.all(curve <= env + 1e-10)


class TestLadder:
    def test_default_survival_sequence(self):
        assert ladder_survival_default(1) == pytest.approx(0.75)
        assert ladder_survival_default(2) == pytest.approx(0.625)
        assert ladder_survival_default(20) == pytest.approx(0.5 + 2 ** -21)

    def test_rows_stochastic_and_floor_absorbing(self):
        ch = ladder_channel(6)
        assert np.allclose(ch.matrix.sum(axis=1), 1.0, atol=1e-12)
        assert ch.matrix[0, 0] == 1.0
        assert np.all(ch.matrix[1:, 0] > 0)  # every rung can fall

    def test_pass_through_mass_is_survival(self):
        # starting on the first rung, the chance of never hitting the
        # floor in m hops equals the m-th survival number for any m up to
        # the ladder height
        ch = ladder_channel(7)
        for m in range(1, 8):
            alive = dmc_power(ch, m).matrix[1, 1:].sum()
            assert alive == pytest.approx(ladder_survival_default(m),
                                          abs=1e-12)

    def test_cascade_equals_z_channel(self):
        # depth-L relay of the ladder acts on {floor, rung 1} exactly as a
        # single Z channel with pass-through b_L
        for depth in (3, 8):
            b = ladder_survival_default(depth)
            got = ladder_cascade_mi_bits(depth)
            prior = Prior.uniform((0, 1))
            want = mutual_information(prior, make_z(1 - b)) / LOG2
            assert got == pytest.approx(want, abs=1e-12)

    def test_deep_ladder_limit(self):
        want = binary_entropy_bits(0.25) - 0.5
        assert ladder_cascade_mi_bits(20) == pytest.approx(want, abs=1e-3)

    def test_custom_survival_validation(self):
        # survival products must fall strictly, and stay above one half
        with pytest.raises(ValueError):
            ladder_channel(3, survival=lambda m: (0.75, 0.8, 0.6)[m - 1])
        with pytest.raises(ValueError):
            ladder_channel(3, survival=lambda m: (0.75, 0.6, 0.4)[m - 1])

    def test_custom_survival_used(self):
        ch = ladder_channel(2, survival=lambda m: (0.9, 0.72)[m - 1])
        assert dmc_power(ch, 1).matrix[1, 1:].sum() == pytest.approx(0.9)
        assert dmc_power(ch, 2).matrix[1, 1:].sum() == pytest.approx(0.72)

    def test_zero_error_is_zero_for_all_truncations(self):
        for depth in (1, 2, 5, 12):
            ch = ladder_channel(depth)
            assert zero_error_capacity_is_zero(ch)
            assert zero_error_capacity_is_zero(dmc_power(ch, 3))


class TestZeroError:
    def test_identity_has_positive_zero_error(self):
        ch = Dmc((0, 1), (0, 1), np.eye(2))
        assert not zero_error_capacity_is_zero(ch)

    def test_bsc_confusable(self):
        assert zero_error_capacity_is_zero(make_bsc(0.1))

    def test_partial_overlap(self):
        mat = np.array([[0.5, 0.5, 0.0],
                        [0.0, 0.5, 0.5],
                        [0.5, 0.0, 0.5]])
        ch = Dmc((0, 1, 2), (0, 1, 2), mat)
        assert zero_error_capacity_is_zero(ch)


class TestClassPhaseSignaling:
    @pytest.fixture
    def chain(self):
        mat = np.array([
            [0.0, 1.0, 0.0, 0.0],
            [0.5, 0.0, 0.5, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.2, 0.3, 0.3, 0.2],
        ])
        return Dmc((0, 1, 2, 3), (0, 1, 2, 3), mat)

    def test_messages_are_class_phase_pairs(self, chain):
        st = analyze_chain(chain)
        msgs = class_phase_messages(st)
        assert len(msgs) == 2
        assert {(c, p) for c, p, _s in msgs} == {(1, 0), (1, 1)}

    def test_decode_inverts_phase_rotation(self, chain):
        st = analyze_chain(chain)
        for cls_idx, phase_idx, state in class_phase_messages(st):
            for m in (2, 4, 6, 200):
                # after m hops the walk sits in phase (phase + m) mod T
                landed_phase = (phase_idx + m) % 2
                landing = st.phases[cls_idx][landed_phase][0]
                got = decode_class_phase(st, landing, m)
                assert got == (cls_idx, phase_idx)

    def test_simulated_transmissions_error_free(self, chain):
        rng = np.random.default_rng(9)
        errors = simulate_class_phase_signaling(chain, 200, 10_000, rng)
        assert errors == 0

    def test_absorbing_pair_error_free(self):
        mat = np.array([
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.4, 0.4, 0.2],
        ])
        ch = Dmc((0, 1, 2), (0, 1, 2), mat)
        rng = np.random.default_rng(10)
        assert simulate_class_phase_signaling(ch, 50, 2_000, rng) == 0


class TestRunLengthCounts:
    def test_small_values(self):
        assert rll_no_double_zero_count(1) == 2
        assert rll_no_double_zero_count(2) == 3
        assert rll_no_double_zero_count(3) == 5

    def test_matches_exhaustive_enumeration(self):
        # bit-flip symmetry: strings without 00 are counted by strings
        # without adjacent 1-bits
        for n in range(1, 17):
            arr = np.arange(1 << n, dtype=np.uint32)
            ok = int(np.count_nonzero((arr & (arr >> 1)) == 0))
            assert rll_no_double_zero_count(n) == ok

    def test_exact_integers_at_large_n(self):
        # Fibonacci recurrence stays exact far past float precision
        a, b = 2, 3
        for _ in range(3, 91):
            a, b = b, a + b
        assert rll_no_double_zero_count(90) == b

    def test_growth_rate_approaches_golden_ratio(self):
        want = math.log2((1 + math.sqrt(5)) / 2)
        assert rll_growth_rate_bits(60) == pytest.approx(want, abs=1e-9)
        coarse = rll_growth_rate_bits(5)
        assert abs(coarse - want) > 1e-4  # short blocks are visibly off

    def test_validation(self):
        with pytest.raises(ValueError):
            rll_no_double_zero_count(0)
        with pytest.raises(ValueError):
            rll_growth_rate_bits(1)
