"""Capacity bounds and channel models for molecular communication systems.

The package is organised around a few small families:

* :mod:`molcap.diffusion` -- physical arrival laws (Green's functions,
  first-hitting distributions, slot taps) and an Euler path simulator.
* :mod:`molcap.channels` -- discrete memoryless channels with labelled
  alphabets, Poisson and binomial receiver front ends, and linear
  channels with inter-slot memory.
* :mod:`molcap.capacity` -- certified capacity brackets: Blahut-Arimoto
  with converse tracking, divergence upper bounds, Monte Carlo lower
  bounds, and block sandwich bounds for channels with memory.
* :mod:`molcap.cascade` -- information decay across chains of relays,
  structural limits, and zero-error questions.
* :mod:`molcap.timing` -- channels that signal through release timing.
* :mod:`molcap.cli` -- the ``molcap`` command-line tool.
"""

from .capacity import (BOUND_METHODS, BaResult, BoundReport, Prior,
                       SandwichResult, blahut_arimoto, iid_lower_bound,
                       lti_poisson_iid_lower, mutual_information,
                       poisson_sym_kl_cov, poisson_sym_kl_max,
                       poisson_two_point_prior, sandwich_lower,
                       sandwich_upper, sym_kl_capacity_bound, sym_kl_value,
                       topsoe_upper)
from .cascade import (ChainStructure, analyze_chain, binary_entropy_bits,
                      bsc_cascade_capacity, cascade_mi_curve,
                      class_phase_messages, decode_class_phase,
                      dobrushin_coefficient, ladder_cascade_mi_bits,
                      ladder_channel, ladder_survival_default, prior_entropy,
                      deep_cascade_limit, rll_growth_rate_bits,
                      rll_no_double_zero_count,
                      simulate_class_phase_signaling, strong_dpi_envelope,
                      zero_error_capacity_is_zero)
from .channels import (Dmc, LinearGaussianChannel, LtiPoissonChannel,
                       dmc_compose, dmc_from_json, dmc_power, dmc_to_json,
                       intensity_grid, ligand_binomial_dmc, make_bsc,
                       make_erasure, make_z, poisson_dmc, poisson_y_max,
                       simulate_linear_gaussian, simulate_lti_poisson)
from .diffusion import (INVERSE_GAUSSIAN, LEVY, DiffusionMedium,
                        HittingSample, HittingTimeModel, SlotConfig,
                        green_1d, green_3d, hitting_cdf, hitting_mean,
                        hitting_model, hitting_pdf, sample_hitting,
                        simulate_first_hitting, slot_hit_probs)
from .errors import (AlphabetSizeError, ConvergenceError, EstimationError,
                     MolcapError, QuadratureError)
from .estimation import (MiEstimate, histogram_mi, ks_distance,
                         mi_with_bootstrap)
from .timing import (AignParams, DelaySelector, aign_bounds,
                     delay_selector_iid_lower, delay_selector_root,
                     delay_selector_zero_error, ig_entropy,
                     levy_truncated_entropy, sample_aign,
                     simulate_delay_selector)

__version__ = "0.1.0"

__all__ = [
    "AignParams", "AlphabetSizeError", "BOUND_METHODS", "BaResult",
    "BoundReport", "ChainStructure", "ConvergenceError", "DelaySelector",
    "DiffusionMedium", "Dmc", "EstimationError", "HittingSample",
    "HittingTimeModel", "INVERSE_GAUSSIAN", "LEVY", "LinearGaussianChannel",
    "LtiPoissonChannel", "MiEstimate", "MolcapError", "Prior",
    "QuadratureError", "SandwichResult", "SlotConfig", "aign_bounds",
    "analyze_chain", "binary_entropy_bits", "blahut_arimoto",
    "bsc_cascade_capacity", "cascade_mi_curve", "class_phase_messages",
    "decode_class_phase", "delay_selector_iid_lower", "delay_selector_root",
    "delay_selector_zero_error", "dmc_compose", "dmc_from_json", "dmc_power",
    "dmc_to_json", "dobrushin_coefficient", "green_1d", "green_3d",
    "histogram_mi", "hitting_cdf", "hitting_mean", "hitting_model",
    "hitting_pdf", "ig_entropy", "iid_lower_bound", "intensity_grid",
    "ks_distance", "ladder_cascade_mi_bits", "ladder_channel",
    "ladder_survival_default", "levy_truncated_entropy",
    "ligand_binomial_dmc", "lti_poisson_iid_lower", "make_bsc",
    "make_erasure", "make_z", "mi_with_bootstrap", "mutual_information",
    "poisson_dmc", "poisson_sym_kl_cov", "poisson_sym_kl_max",
    "poisson_two_point_prior", "poisson_y_max", "prior_entropy",
    "deep_cascade_limit", "rll_growth_rate_bits", "rll_no_double_zero_count",
    "sample_aign", "sample_hitting", "sandwich_lower", "sandwich_upper",
    "simulate_class_phase_signaling", "simulate_delay_selector",
    "simulate_first_hitting", "simulate_linear_gaussian",
    "simulate_lti_poisson", "slot_hit_probs", "strong_dpi_envelope",
    "sym_kl_capacity_bound", "sym_kl_value", "topsoe_upper",
    "zero_error_capacity_is_zero",
]
