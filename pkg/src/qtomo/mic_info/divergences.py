"""Divergences between discrete distributions (natural log) and binary entropy (bits)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CHAIN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def support_size(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class Divergences:
    tv: float
    kl: float
    kl_sym: float
    chi2: float
    l2: float


def _probs(p):
    return p.probs if isinstance(p, DiscreteDistribution) else DiscreteDistribution(p).probs


def kl_divergence(p, q) -> float:
    p, q = _probs(p), _probs(q)
    if p.shape != q.shape:
        raise ValueError("distributions have different supports")
    mask = p > 0
    if np.any(q[mask] == 0):
        return float("inf")
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def chi_square(p, q) -> float:
    p, q = _probs(p), _probs(q)
    if p.shape != q.shape:
        raise ValueError("distributions have different supports")
    if np.any((q == 0) & (p > 0)):
        return float("inf")
    mask = q > 0
    return float(np.sum((p[mask] - q[mask]) ** 2 / q[mask]))


def divergences(p, q) -> Divergences:
    """TV, KL(p||q), symmetric KL, chi^2(p||q) and l2 distance.

    Raises ``ArithmeticError`` if ``2 TV^2 <= KL <= chi^2`` fails, which
    would indicate a numerical bug rather than bad input.
    """
    p, q = _probs(p), _probs(q)
    if p.shape != q.shape:
        raise ValueError("distributions have different supports")
    tv = 0.5 * float(np.sum(np.abs(p - q)))
    kl = kl_divergence(p, q)
    out = Divergences(tv=tv, kl=kl, kl_sym=0.5 * (kl + kl_divergence(q, p)),
                      chi2=chi_square(p, q), l2=float(np.linalg.norm(p - q)))
    if not (2 * tv ** 2 <= kl + CHAIN_TOL and kl <= out.chi2 + CHAIN_TOL):
        raise ArithmeticError(f"divergence chain violated: {out}")
    return out


def binary_entropy(t):
    """``-t log2 t - (1-t) log2 (1-t)``, with ``h(0) = h(1) = 0``."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.where(t > 0, t * np.log2(t), 0.0) - np.where(t < 1, (1 - t) * np.log2(1 - t), 0.0)
    return out if out.ndim else float(out)
