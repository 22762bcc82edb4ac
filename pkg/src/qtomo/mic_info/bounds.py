"""Copy-count lower bound for single-qubit measurements, term by term.

Combining the mutual-information upper and lower bounds gives

    1/100 <= 8 n c^2 eps^2 (S / l^2 + 2 Pr[z not good])
          <= 16 n c^2 eps^2 (sqrt(N) / 10^N + Pr[z not good])

with ``S = sum_{m <= N/10} C(N, m)`` and ``l`` the number of weight
``>= ceil(9N/10)`` Paulis. :func:`lower_bound_copies` evaluates every
intermediate quantity so each inequality can be audited on its own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..hard_instance import default_min_weight
from ..pauli import count_by_min_weight
from .combinatorics import binomial_prefix_sum, stirling_bounds, ten_power_split_identity
from .divergences import binary_entropy

MI_LOWER = 1 / 100


@dataclass
class LowerBoundRecord:
    n_qubits: int
    eps: float
    c: float
    n_lower: float
    n_lower_exact_terms: float
    chain: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def plain(v):
            if isinstance(v, bool) or v is None:
                return v
            if isinstance(v, int) and abs(v) > 2 ** 53:
                return str(v)
            return v
        return {"n_qubits": self.n_qubits, "eps": self.eps, "c": self.c,
                "n_lower": self.n_lower, "n_lower_exact_terms": self.n_lower_exact_terms,
                "chain": {k: plain(v) for k, v in self.chain.items()}}


def _ratio(num: int, den: int) -> float:
    """``num / den`` for big integers without overflow."""
    return math.exp(math.log(num) - math.log(den)) if num and den else 0.0


def _log_concentration_term(n_qubits, ell):
    return n_qubits * math.log(2) - math.exp(math.log(ell) / 4)


def concentration_term(n_qubits: int, ell: int) -> float:
    """``d exp(-l^{1/4})``, the failure probability bound for the good set."""
    return math.exp(_log_concentration_term(n_qubits, ell))


def lower_bound_copies(n_qubits: int, eps: float, c: float = 1 / 200,
                       pr_not_good: float | None = None) -> LowerBoundRecord:
    """Smallest ``n`` compatible with the mutual-information chain.

    ``pr_not_good`` defaults to ``min(1, d exp(-l^{1/4}))``. Two answers are
    returned: ``n_lower`` from the simplified last line of the chain and
    ``n_lower_exact_terms`` from its first line.
    """
    if n_qubits < 1:
        raise ValueError("N must be at least 1")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    n = n_qubits
    w = default_min_weight(n)
    ell = count_by_min_weight(n, w)
    s = binomial_prefix_sum(n, n // 10)
    conc = concentration_term(n, ell)
    pr = min(1.0, conc) if pr_not_good is None else float(pr_not_good)

    stirling_lower, stirling_upper = stirling_bounds(n, 0.1)
    s_over_ell_sq = _ratio(s, ell * ell)
    loose_bound = _ratio(2, 9 ** w * s)
    sqrt_n_term = math.exp(0.5 * math.log(n) - 0.9 * n * math.log(9)
                           - n * binary_entropy(0.1) * math.log(2))
    log_first = 0.5 * math.log(n) - n * math.log(10)
    first_term = math.exp(log_first)
    scale = c ** 2 * eps ** 2
    # n_lower in log space; both terms can underflow for large N
    log_pr = _log_concentration_term(n, ell) if pr_not_good is None else (
        math.log(pr) if pr > 0 else -math.inf)
    log_pr = min(log_pr, 0.0)
    hi = max(log_first, log_pr)
    log_rhs = math.log(16 * scale) + hi + math.log1p(math.exp(min(log_first, log_pr) - hi))
    log10_n_lower = (math.log(MI_LOWER) - log_rhs) / math.log(10)

    chain = {
        "min_weight": w,
        "ell": ell,
        "ell_lower_3w_times_sum": 3 ** w * s,
        "ell_at_least_d_3_2": ell * ell >= 8 ** n,
        "binomial_sum": s,
        "stirling_lower": stirling_lower,
        "stirling_upper": stirling_upper,
        "stirling_lower_holds": s >= stirling_lower,
        "stirling_upper_holds": s <= stirling_upper,
        "mi_lower": MI_LOWER,
        "spectral_over_ell_sq": s_over_ell_sq,
        "bound_2_over_9w_sum": loose_bound,
        "step_ell_sq_to_9w_holds": s_over_ell_sq <= loose_bound,
        "sqrt_n_over_9_0.9n_2_nh": sqrt_n_term,
        "ten_power_split_exact": ten_power_split_identity(n).verdict,
        "entropy_split_log2": n * binary_entropy(0.1),
        "entropy_split_log2_expanded": 0.1 * n * math.log2(10) + 0.9 * n * math.log2(10 / 9),
        "sqrt_n_over_10_n": first_term,
        "concentration_term": conc,
        "concentration_below_first_term": _log_concentration_term(n, ell) < log_first,
        "pr_not_good": pr,
        "rhs_per_copy_final": 16 * scale * (first_term + pr),
        "rhs_per_copy_exact": 8 * scale * (s_over_ell_sq + 2 * pr),
    }
    n_lower = 10 ** log10_n_lower if log10_n_lower < 308 else math.inf
    exact_rhs = chain["rhs_per_copy_exact"]
    n_exact = MI_LOWER / exact_rhs if exact_rhs > 0 else math.inf
    chain["log10_n_lower"] = log10_n_lower
    return LowerBoundRecord(n, eps, c, n_lower, n_exact, chain)
