"""Pauli-basis tomography with linear inversion.

The ``n`` copies are split evenly over the ``3^N`` Pauli bases. A Pauli
observable ``Q`` is estimated from every basis that agrees with ``Q`` on its
support by averaging the product of the +/-1 outcomes on that support, and
the state estimate is ``I/d + sum_Q E(Q) Q / d``.

Internally the data for one run is a count table ``counts[b, k]`` (basis
``b``, outcome bitstring ``k``). A Walsh-Hadamard transform of a row gives
the sign-product sums for all ``2^N`` supports at once, so a full set of
``4^N - 1`` estimates costs O(3^N 2^N N).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .measurement import PauliBasisMeasurement, basis_distribution, pauli_bases
from .pauli import PauliString, pauli_expectations, pauli_sum_matrix, walsh_hadamard
from .state import DensityMatrix, hs_distance, project_to_states, trace_distance


class InsufficientCopiesError(ValueError):
    pass


class MissingDataError(ValueError):
    pass


@dataclass(frozen=True)
class ObservableEstimate:
    observable: PauliString
    e_value: float
    sample_count: int


@dataclass
class TomographyResult:
    estimate: np.ndarray
    per_observable: list = field(repr=False)
    copies_used: int
    projected: np.ndarray | None = None

    @property
    def n_qubits(self) -> int:
        return self.estimate.shape[0].bit_length() - 1

    def errors(self, truth: DensityMatrix) -> dict:
        out = {"hs_error": hs_distance(self.estimate, truth),
               "trace_distance": trace_distance(self.estimate, truth)}
        if self.projected is not None:
            out["projected_hs_error"] = hs_distance(self.projected, truth)
            out["projected_trace_distance"] = trace_distance(self.projected, truth)
        return out

    def to_dict(self, truth: DensityMatrix | None = None) -> dict:
        out = {
            "n_qubits": self.n_qubits,
            "copies_used": self.copies_used,
            "estimate": {"re": self.estimate.real.tolist(), "im": self.estimate.imag.tolist()},
            "observables": [{"observable": e.observable.label, "e_value": e.e_value,
                             "sample_count": e.sample_count} for e in self.per_observable],
        }
        if self.projected is not None:
            out["projected"] = {"re": self.projected.real.tolist(),
                                "im": self.projected.imag.tolist()}
        if truth is not None:
            out["errors"] = self.errors(truth)
        return out


def allocate_copies(n_qubits: int, n: int) -> dict[PauliBasisMeasurement, int]:
    """Even split of ``n`` copies over the ``3^N`` bases.

    The remainder goes one copy each to the lexicographically first bases.
    """
    n_bases = 3 ** n_qubits
    if n < n_bases:
        raise InsufficientCopiesError(f"need at least 3^N = {n_bases} copies, got {n}")
    m, extra = divmod(n, n_bases)
    return {b: m + (i < extra) for i, b in enumerate(pauli_bases(n_qubits))}


@lru_cache(maxsize=16)
def _basis_masks(n_qubits):
    """x/z masks of every basis, shape (3^N,), in ``pauli_bases`` order."""
    bases = pauli_bases(n_qubits)
    return (np.array([b.basis.x for b in bases], dtype=np.int64),
            np.array([b.basis.z for b in bases], dtype=np.int64))


@lru_cache(maxsize=16)
def _scatter_plan(n_qubits):
    """Sort order and segment starts grouping (basis, support) pairs by observable.

    Pair ``(b, S)`` carries information about the observable equal to basis
    ``b`` restricted to support ``S``; its dense index is ``(x_b & S) * d + (z_b & S)``.
    """
    d = 1 << n_qubits
    bx, bz = _basis_masks(n_qubits)
    supports = np.arange(d, dtype=np.int64)
    target = (((bx[:, None] & supports) << n_qubits) | (bz[:, None] & supports)).reshape(-1)
    order = np.argsort(target, kind="stable")
    starts = np.flatnonzero(np.r_[True, np.diff(target[order]) != 0])
    assert len(starts) == d * d
    return order, starts


def estimates_from_counts(counts: np.ndarray, sizes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Empirical ``E(Q)`` for every Pauli from basis count tables.

    Parameters
    ----------
    counts : array, shape (..., 3^N, 2^N)
        Outcome counts per basis in ``pauli_bases`` order.
    sizes : array, shape (3^N,)
        Copies measured in each basis.

    Returns
    -------
    e_values : array, shape (..., 4^N)
        Estimates in the dense ``x * d + z`` layout (identity entry is 1).
    sample_counts : array, shape (4^N,)
        Number of +/-1 samples pooled into each estimate.
    """
    counts = np.asarray(counts)
    n_bases, d = counts.shape[-2:]
    n_qubits = d.bit_length() - 1
    order, starts = _scatter_plan(n_qubits)
    signed = walsh_hadamard(counts.astype(float)).reshape(*counts.shape[:-2], n_bases * d)
    numer = np.add.reduceat(signed[..., order], starts, axis=-1)
    weights = np.repeat(np.asarray(sizes, dtype=float), d)
    denom = np.add.reduceat(weights[order], starts)
    return numer / denom, denom.astype(np.int64)


def basis_probabilities(rho: DensityMatrix) -> np.ndarray:
    """Outcome distributions of all ``3^N`` bases, shape ``(3^N, 2^N)``."""
    probs = np.array([basis_distribution(b, rho) for b in pauli_bases(rho.n_qubits)])
    probs = np.clip(probs, 0, None)
    return probs / probs.sum(axis=1, keepdims=True)


def simulate_counts(rho: DensityMatrix, n: int, seed, reps: int | None = None) -> np.ndarray:
    """Multinomial basis count tables for ``reps`` independent runs.

    Basis ``b`` draws from its own stream ``default_rng([seed, b])``, so the
    result does not depend on the order in which bases are processed.
    """
    sizes = np.array(list(allocate_copies(rho.n_qubits, n).values()))
    probs = basis_probabilities(rho)
    seed = list(np.atleast_1d(seed).astype(np.int64))
    shape = (1 if reps is None else reps,)
    counts = np.empty(shape + probs.shape, dtype=np.int64)
    for b, (size, p) in enumerate(zip(sizes, probs)):
        counts[:, b, :] = np.random.default_rng(seed + [b]).multinomial(size, p, size=shape)
    return counts[0] if reps is None else counts


def true_expectations(rho: DensityMatrix) -> np.ndarray:
    """``Tr[rho Q]`` in the dense ``x * d + z`` layout."""
    return pauli_expectations(rho.data).real.reshape(-1)


def simulate_estimates(rho: DensityMatrix, n: int, seed, reps: int) -> tuple[np.ndarray, np.ndarray]:
    """``(reps, 4^N)`` estimates plus per-observable sample counts."""
    sizes = np.array(list(allocate_copies(rho.n_qubits, n).values()))
    return estimates_from_counts(simulate_counts(rho, n, seed, reps), sizes)


def hs_error_sq(e_values: np.ndarray, rho: DensityMatrix) -> np.ndarray:
    """``||rho_hat - rho||_2^2 = sum_Q (E(Q) - Tr[rho Q])^2 / d`` without building rho_hat."""
    diff = np.asarray(e_values) - true_expectations(rho)
    return np.sum(diff ** 2, axis=-1) / rho.dim


def matrix_from_estimates(e_values: np.ndarray) -> np.ndarray:
    """Dense linear-inversion estimate from a ``4^N`` estimate vector (identity entry ignored)."""
    e = np.array(e_values, dtype=float)
    d = int(round(np.sqrt(len(e))))
    e[0] = 1.0
    return pauli_sum_matrix(e.reshape(d, d) / d)


def _as_label(basis):
    if isinstance(basis, PauliBasisMeasurement):
        return basis.label
    if isinstance(basis, PauliString):
        return basis.label
    return str(basis)


def estimate_observable(q: PauliString,
                        outcomes: Mapping[object, np.ndarray]) -> ObservableEstimate:
    """Pooled sign-product mean of ``q`` over all matching bases.

    ``outcomes`` maps each basis (label, ``PauliString`` or
    ``PauliBasisMeasurement``) to an ``(m, N)`` array of outcome indices as
    returned by :func:`qtomo.measurement.sample_outcomes`.
    """
    if q.weight == 0:
        raise ValueError("the identity needs no estimate")
    data = {_as_label(k): np.asarray(v) for k, v in outcomes.items()}
    total = 0.0
    count = 0
    for b in pauli_bases(q.n_qubits):
        if any(q.letter(i) not in ("I", b.label[i]) for i in range(q.n_qubits)):
            continue
        if b.label not in data:
            raise MissingDataError(f"no samples for basis {b.label}, needed for {q.label}")
        samples = data[b.label].reshape(-1, q.n_qubits)
        signs = np.prod(1 - 2 * samples[:, list(q.support)], axis=1)
        total += float(signs.sum())
        count += len(samples)
    if count == 0:
        raise MissingDataError(f"no samples for {q.label}")
    return ObservableEstimate(q, total / count, count)


def reconstruct(estimates: Iterable[ObservableEstimate], n_qubits: int) -> TomographyResult:
    """Linear inversion ``I/d + sum_Q E(Q) Q / d``; PSD is not enforced."""
    d = 1 << n_qubits
    estimates = list(estimates)
    coeffs = np.zeros((d, d))
    coeffs[0, 0] = 1 / d
    seen = set()
    for est in estimates:
        q = est.observable
        if q.n_qubits != n_qubits or q.weight == 0:
            raise ValueError(f"unexpected observable {q}")
        if q in seen:
            raise ValueError(f"duplicate estimate for {q}")
        seen.add(q)
        coeffs[q.x, q.z] = est.e_value / d
    if len(seen) != d * d - 1:
        raise MissingDataError(f"{d * d - 1 - len(seen)} observables have no estimate")
    return TomographyResult(pauli_sum_matrix(coeffs), estimates, 0)


def run_tomography(rho: DensityMatrix, n: int, seed, project: bool = False) -> TomographyResult:
    """Allocate, sample, estimate and reconstruct.

    With ``project`` the result also carries the closest density matrix in
    HS norm; ``estimate`` stays the raw linear-inversion matrix.
    """
    n_qubits = rho.n_qubits
    sizes = np.array(list(allocate_copies(n_qubits, n).values()))
    counts = simulate_counts(rho, n, seed)
    e_values, sample_counts = estimates_from_counts(counts, sizes)
    estimates = [ObservableEstimate(PauliString.from_index(n_qubits, k), float(e_values[k]),
                                    int(sample_counts[k]))
                 for k in range(1, len(e_values))]
    result = reconstruct(estimates, n_qubits)
    result.copies_used = int(sizes.sum())
    if project:
        result.projected = project_to_states(result.estimate)
    return result
