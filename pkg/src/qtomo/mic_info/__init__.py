"""Measurement information channels, information measures and bound arithmetic."""
from .bounds import LowerBoundRecord, concentration_term, lower_bound_copies
from .channel import (MicMatrix, letters_array, lemma62_certify, mic_channel, mic_matrix,
                      mic_toy_identity, product_mic_matrix, qubit_letter_table,
                      random_product_povm, random_single_qubit_povm, spectral_quantity, unvec, vec,
                      weight_bound)
from .combinatorics import (binom_identity, binomial_prefix_sum, degrees_of_freedom,
                            stirling_bounds, stirling_bracket, tail_prob,
                            ten_power_split_identity)
from .divergences import (DiscreteDistribution, Divergences, binary_entropy, chi_square,
                          divergences, kl_divergence)
from .mutual_info import (BudgetExceededError, MIExperimentResult, exact_mutual_info,
                          fano_bound_check, mi_experiment)
from .report import BoundReport

__all__ = [
    "BoundReport", "BudgetExceededError", "DiscreteDistribution", "Divergences",
    "LowerBoundRecord", "MIExperimentResult", "MicMatrix", "binary_entropy", "binom_identity",
    "binomial_prefix_sum", "chi_square", "concentration_term", "degrees_of_freedom",
    "divergences", "exact_mutual_info", "fano_bound_check", "kl_divergence", "lemma62_certify",
    "letters_array", "lower_bound_copies", "mi_experiment", "mic_channel", "mic_matrix",
    "mic_toy_identity", "product_mic_matrix", "qubit_letter_table", "random_product_povm",
    "random_single_qubit_povm", "spectral_quantity", "stirling_bounds", "stirling_bracket",
    "tail_prob", "ten_power_split_identity", "unvec", "vec", "weight_bound",
]
