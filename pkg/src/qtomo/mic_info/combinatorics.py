"""Exact binomial arithmetic behind the copy-count estimates.

Identities and tails use Python integers and :class:`fractions.Fraction`,
so nothing overflows or rounds. Only the entropy-based brackets in
:func:`stirling_bounds` are floating point.
"""
from __future__ import annotations

import math
from fractions import Fraction

from .divergences import binary_entropy
from .report import BoundReport


def _as_fraction(p) -> Fraction:
    # str() keeps 0.9 as 9/10 instead of its binary expansion
    return p if isinstance(p, Fraction) else Fraction(str(p))


def binom_identity(n_qubits: int) -> BoundReport:
    """``10^N = sum_m C(N, m) 9^m``, checked with integers."""
    if n_qubits < 0:
        raise ValueError("N must be non-negative")
    total = sum(math.comb(n_qubits, m) * 9 ** m for m in range(n_qubits + 1))
    return BoundReport("ten_to_the_n_binomial", total, 10 ** n_qubits, relation="eq",
                       terms={"n_qubits": n_qubits, "exact_match": total == 10 ** n_qubits})


def tail_prob(n: int, p, k: int) -> Fraction:
    """Exact ``Pr[Bin(n, p) >= k]``."""
    p = _as_fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if n < 0:
        raise ValueError("n must be non-negative")
    return sum((math.comb(n, m) * p ** m * (1 - p) ** (n - m)
                for m in range(max(k, 0), n + 1)), Fraction(0))


def binomial_prefix_sum(n: int, k: int) -> int:
    """``sum_{m=0}^{k} C(n, m)``."""
    return sum(math.comb(n, m) for m in range(0, min(k, n) + 1))


def degrees_of_freedom(n_qubits: int, min_weight: int) -> int:
    """Number of Pauli observables of weight at least ``w``: ``sum_{m>=w} C(N, m) 3^m``."""
    if not 0 <= min_weight <= n_qubits:
        raise ValueError("min_weight must lie in [0, N]")
    return sum(math.comb(n_qubits, m) * 3 ** m for m in range(min_weight, n_qubits + 1))


def stirling_bounds(n: int, frac: float) -> tuple[float, float]:
    """``(2^{n h(f)} / sqrt(n), 2^{n h(f)})``, the entropy bracket for ``sum_{m<=fn} C(n, m)``."""
    if n < 1 or not 0 < frac <= 0.5:
        raise ValueError("need n >= 1 and 0 < frac <= 1/2")
    exponent = n * binary_entropy(frac)
    upper = 2.0 ** exponent if exponent < 1024 else math.inf
    return upper / math.sqrt(n), upper


def stirling_bracket(n: int, frac: float = 0.1) -> BoundReport:
    """Whether ``2^{nh}/sqrt(n) <= sum_{m<=floor(fn)} C(n, m) <= 2^{nh}``.

    The verdict reports both sides; ``lhs`` is the exact sum and ``rhs`` the
    upper end. The lower end is a separate term because it is the side that
    can fail when ``fn`` is not an integer.
    """
    lower, upper = stirling_bounds(n, frac)
    k = math.floor(Fraction(str(frac)) * n)
    exact = binomial_prefix_sum(n, k)
    lower_ok = exact >= lower
    upper_ok = exact <= upper
    report = BoundReport("binomial_sum_entropy_bracket", float(exact), upper, relation="le",
                         terms={"n": n, "frac": frac, "floor_fn": k, "exact_sum": exact,
                                "lower": lower, "upper": upper,
                                "lower_holds": lower_ok, "upper_holds": upper_ok,
                                "both_hold": lower_ok and upper_ok})
    return report


def ten_power_split_identity(n_qubits: int) -> BoundReport:
    """``9^{0.9N} 10^{0.1N} (10/9)^{0.9N} = 10^N``, checked exactly on tenth powers."""
    n = n_qubits
    lhs = Fraction(9) ** (9 * n) * Fraction(10) ** n * Fraction(10, 9) ** (9 * n)
    lhs = int(lhs) if lhs.denominator == 1 else str(lhs)
    return BoundReport("ten_power_split_tenth_powers", lhs, 10 ** (10 * n), relation="eq",
                       terms={"n_qubits": n, "exact_match": lhs == 10 ** (10 * n)})
