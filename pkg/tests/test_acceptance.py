"""Acceptance suite: ten end-to-end checks at fixed tolerances.

Each test prints a single ``[NN] PASS/FAIL`` line (shown with ``-s`` or on
failure) and then asserts the advertised tolerance, so a plain pytest run
doubles as the acceptance report.  The checks cover the simulation physics
against the analytic arrival laws, relay-cascade algebra, certified
capacity brackets, and the zero-error combinatorics.
"""

import math
import time

import numpy as np
import pytest

from molcap import (AignParams, DelaySelector, DiffusionMedium, Dmc,
                    HittingTimeModel, INVERSE_GAUSSIAN, LtiPoissonChannel,
                    Prior, aign_bounds, analyze_chain, binary_entropy_bits,
                    blahut_arimoto, bsc_cascade_capacity, cascade_mi_curve,
                    class_phase_messages, delay_selector_root,
                    delay_selector_zero_error, dmc_power, hitting_cdf,
                    hitting_model, intensity_grid, ladder_cascade_mi_bits,
                    ladder_channel, mutual_information, poisson_dmc,
                    poisson_sym_kl_cov, poisson_sym_kl_max,
                    poisson_two_point_prior, rll_growth_rate_bits,
                    rll_no_double_zero_count, sample_hitting,
                    sandwich_lower, sandwich_upper,
                    simulate_class_phase_signaling, simulate_first_hitting,
                    strong_dpi_envelope, zero_error_capacity_is_zero)
from molcap.estimation import ks_distance

LOG2 = math.log(2.0)


def verdict(tag, ok, detail):
    print(f"[{tag}] {'PASS' if ok else 'FAIL'} {detail}")


def period_two_chain():
    mat = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [0.5, 0.0, 0.5, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.2, 0.3, 0.3, 0.2],
    ])
    return Dmc((0, 1, 2, 3), (0, 1, 2, 3), mat)


def signaling_prior(ch):
    structure = analyze_chain(ch)
    messages = class_phase_messages(structure)
    probs = np.zeros(ch.n_inputs)
    for _cls, _phase, state in messages:
        probs[state] += 1.0 / len(messages)
    return Prior(ch.input_labels, probs)


def test_01_hitting_time_simulation_matches_analytic_laws():
    started = time.monotonic()
    drift = DiffusionMedium(1.0, 1.0, 1.0)
    sample = simulate_first_hitting(drift, 100_000, dt=1e-4, t_max=100.0,
                                    seed=2025)
    model = hitting_model(drift)
    ks_ig = ks_distance(sample.times, lambda t: hitting_cdf(model, t),
                        n_total=sample.n_paths, upper=sample.t_max)

    free = DiffusionMedium(1.0, 0.0, 1.0)
    sample2 = simulate_first_hitting(free, 100_000, dt=1e-4, t_max=100.0,
                                     seed=2026)
    model2 = hitting_model(free)
    ks_levy = ks_distance(sample2.times, lambda t: hitting_cdf(model2, t),
                          n_total=sample2.n_paths, upper=sample2.t_max)
    elapsed = time.monotonic() - started

    ok = ks_ig < 0.01 and ks_levy < 0.01 and elapsed < 120.0
    verdict("01", ok,
            f"hitting-time KS: drifted {ks_ig:.4f}, drift-free {ks_levy:.4f}"
            f" (censored {sample2.censored}), {elapsed:.0f}s")
    assert ks_ig < 0.01
    assert ks_levy < 0.01
    assert elapsed < 120.0


def test_02_bsc_cascade_curve_and_decay_rate():
    worst_gap = 0.0
    worst_ratio_err = 0.0
    for p in (0.05, 0.1, 0.25):
        contraction = (1 - 2 * p) ** 2
        curve_bits = []
        for m in range(1, 21):
            ba = blahut_arimoto(dmc_power_bsc(p, m), tol=1e-12)
            bits = ba.capacity_nats / LOG2
            curve_bits.append(bits)
            gap = abs(bits - bsc_cascade_capacity(p, m))
            worst_gap = max(worst_gap, gap)
        for m in range(10, 20):
            ratio = curve_bits[m] / curve_bits[m - 1]
            worst_ratio_err = max(worst_ratio_err,
                                  abs(ratio / contraction - 1.0))
    ok = worst_gap < 1e-8 and worst_ratio_err < 0.05
    verdict("02", ok,
            f"cascade capacity vs closed form: gap {worst_gap:.2e} bits, "
            f"per-step contraction off by {worst_ratio_err:.2%}")
    assert worst_gap < 1e-8
    assert worst_ratio_err < 0.05


def dmc_power_bsc(p, m):
    from molcap import make_bsc
    return dmc_power(make_bsc(p), m)


def test_03_structural_limit_and_class_phase_code():
    ch = period_two_chain()
    prior = signaling_prior(ch)
    val = mutual_information(prior, dmc_power(ch, 200))
    gap_cyclic = abs(val - LOG2)

    absorbing = Dmc((0, 1, 2, 3), (0, 1, 2, 3), np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.4, 0.4, 0.1, 0.1],
        [0.25, 0.25, 0.25, 0.25],
    ]))
    val2 = mutual_information(signaling_prior(absorbing),
                              dmc_power(absorbing, 200))
    gap_absorbing = abs(val2 - LOG2)

    rng = np.random.default_rng(33)
    errors = simulate_class_phase_signaling(ch, 200, 10_000, rng)

    ok = gap_cyclic < 1e-4 and gap_absorbing < 1e-6 and errors == 0
    verdict("03", ok,
            f"deep-cascade rate gaps {gap_cyclic:.1e} / {gap_absorbing:.1e} "
            f"nats, signaling errors {errors}/10000")
    assert gap_cyclic < 1e-4
    assert gap_absorbing < 1e-6
    assert errors == 0


def test_04_delay_selector_zero_error_roots():
    bits = delay_selector_zero_error(DelaySelector(1, 1)) / LOG2
    gap = abs(bits - math.log2((1 + math.sqrt(5)) / 2))

    root = delay_selector_root(DelaySelector(2, 2))
    residual = abs(root ** 3 - root ** 2 - 2.0)

    ok = gap <= 1e-9 and residual <= 1e-12
    verdict("04", ok,
            f"zero-error rate off by {gap:.1e} bits, "
            f"growth-root residual {residual:.1e}")
    assert gap <= 1e-9
    assert residual <= 1e-12


def test_05_symmetrised_divergence_orders_capacity_grid():
    started = time.monotonic()
    lam0_cycle = (0.5, 1.0, 2.0, 0.5, 1.0)
    worst = math.inf
    n_checked = 0
    for peak in (1.0, 2.0, 4.0, 8.0):
        for frac, lam0 in zip((0.125, 0.25, 0.5, 0.75, 1.0), lam0_cycle):
            avg = frac * peak
            upper = poisson_sym_kl_max(avg, peak, lam0)
            cov = poisson_sym_kl_cov(poisson_two_point_prior(avg, peak),
                                     lam0)
            grid = intensity_grid(peak, 33)
            ch = poisson_dmc(lam0, grid, tail_tol=1e-10)
            if avg < peak:
                ba = blahut_arimoto(ch, tol=1e-9, cost=grid, budget=avg)
            else:
                ba = blahut_arimoto(ch, tol=1e-9)
            worst = min(worst, upper - cov, cov - ba.capacity_nats)
            n_checked += 1
    elapsed = time.monotonic() - started
    ok = worst >= -1e-9 and elapsed < 300.0 and n_checked == 20
    verdict("05", ok,
            f"divergence bound chain on {n_checked} configurations: "
            f"smallest margin {worst:.2e} nats, {elapsed:.0f}s")
    assert worst >= -1e-9
    assert elapsed < 300.0


def test_06_sandwich_brackets_tighten_with_block_length():
    ch = LtiPoissonChannel((0.8, 0.2), 0.5, 4.0, 4.0)
    grid = np.array([0.0, 4.0])
    gaps = {}
    for r in (1, 2, 3, 4):
        lo = sandwich_lower(ch, r, grid=grid, tol=1e-6)
        hi = sandwich_upper(ch, r, grid=grid, tol=1e-6)
        assert lo.rate_nats <= hi.rate_nats + 1e-9
        gaps[r] = hi.rate_nats - lo.rate_nats
    ok = gaps[4] < gaps[1]
    verdict("06", ok,
            "sandwich gap per block length "
            + ", ".join(f"r={r}: {gaps[r]:.4f}" for r in sorted(gaps)))
    assert gaps[4] < gaps[1]


def test_07_ladder_cascade_limit_and_confusability():
    got = ladder_cascade_mi_bits(20)
    want = binary_entropy_bits(0.25) - 0.5
    gap = abs(got - want)
    confusable = all(zero_error_capacity_is_zero(ladder_channel(depth))
                     for depth in range(1, 21))
    ok = gap < 1e-3 and abs(got - 0.311278) < 1e-3 and confusable
    verdict("07", ok,
            f"20-rung ladder rate {got:.6f} bits (target {want:.6f}), "
            f"all truncations confusable: {confusable}")
    assert gap < 1e-3
    assert abs(got - 0.311278) < 1e-3
    assert confusable


def test_08_contraction_envelope_never_violated():
    rng = np.random.default_rng(8)
    ms = np.arange(1, 31)
    violations = 0
    for _ in range(10):
        mat = rng.uniform(0.05, 1.0, size=(4, 4))
        mat /= mat.sum(axis=1, keepdims=True)
        ch = Dmc((0, 1, 2, 3), (0, 1, 2, 3), mat)
        prior = Prior.uniform(ch.input_labels)
        curve = cascade_mi_curve(ch, prior, 30)
        envelope = strong_dpi_envelope(ch, prior, ms)
        violations += int(np.sum(curve > envelope + 1e-12))
    ok = violations == 0
    verdict("08", ok,
            f"contraction envelope violations: {violations} "
            f"(10 channels, depths to 30)")
    assert violations == 0


def test_09_arrival_time_bounds_and_additivity():
    worst = math.inf
    for mu in (0.5, 1.0, 2.0):
        for lam in (0.5, 1.0, 2.0):
            for budget in (0.5, 1.0, 2.0):
                report = aign_bounds(AignParams(budget, mu, lam))
                worst = min(worst, report.upper_nats - report.lower_nats)

    kappa, mu1, mu2 = 1.5, 0.8, 1.4
    rng = np.random.default_rng(99)
    part1 = sample_hitting(
        HittingTimeModel(INVERSE_GAUSSIAN, kappa * mu1 ** 2, mu1),
        100_000, rng)
    part2 = sample_hitting(
        HittingTimeModel(INVERSE_GAUSSIAN, kappa * mu2 ** 2, mu2),
        100_000, rng)
    total_mu = mu1 + mu2
    target = HittingTimeModel(INVERSE_GAUSSIAN, kappa * total_mu ** 2,
                              total_mu)
    ks = ks_distance(part1 + part2, lambda t: hitting_cdf(target, t))
    ok = worst >= -1e-9 and ks < 0.01
    verdict("09", ok,
            f"arrival-time bracket margin {worst:.3f} nats over 27 "
            f"configurations, additivity KS {ks:.4f}")
    assert worst >= -1e-9
    assert ks < 0.01


def test_10_run_length_counts_and_growth_rate():
    exact = True
    for n in range(1, 21):
        arr = np.arange(1 << n, dtype=np.uint32)
        want = int(np.count_nonzero((arr & (arr >> 1)) == 0))
        exact = exact and rll_no_double_zero_count(n) == want
    rate = rll_growth_rate_bits(60)
    gap = abs(rate - 0.694242)
    ok = exact and gap < 1e-3
    verdict("10", ok,
            f"codeword counts exact to n=20: {exact}, growth rate "
            f"{rate:.6f} bits/slot (off by {gap:.1e})")
    assert exact
    assert gap < 1e-3
