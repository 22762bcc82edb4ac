"""Measurement information channels (MIC) of product POVMs.

For a POVM ``{M_x}`` the channel is ``H(A) = sum_x M_x Tr[M_x A] / Tr[M_x]``
and its ``d^2 x d^2`` matrix is ``C = sum_x |M_x)(M_x| / Tr[M_x]`` with the
column-stacking convention ``vec(|i><j|) = |j> (x) |i>``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce

import numpy as np

from ..measurement import (Measurement, PauliBasisMeasurement, ProductPovm, SingleQubitPovm,
                           as_product_povm, povm_elements)
from ..pauli import LETTERS, PAULI_MATRICES, PauliString, materialize
from .report import BoundReport

ZERO_TRACE_TOL = 1e-14


def vec(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d, order="F")


@dataclass(frozen=True, eq=False)
class MicMatrix:
    data: np.ndarray

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return int(round(np.sqrt(self.dim)))

    def apply(self, a: np.ndarray) -> np.ndarray:
        return unvec(self.data @ vec(a), self.d)

    def quadratic_form(self, a: np.ndarray) -> float:
        v = vec(a)
        return float(np.real(v.conj() @ self.data @ v))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.data)[0])


def _nondegenerate(elements):
    traces = np.real(np.trace(elements, axis1=1, axis2=2))
    keep = traces > ZERO_TRACE_TOL
    if not np.any(keep):
        raise ValueError("every POVM element has zero trace")
    return elements[keep], traces[keep]


def mic_matrix(m: Measurement) -> MicMatrix:
    """Dense MIC matrix; zero-trace elements are skipped."""
    elements, traces = _nondegenerate(povm_elements(m))
    vecs = elements.transpose(0, 2, 1).reshape(len(elements), -1)
    data = np.einsum("k,ki,kj->ij", 1 / traces, vecs, vecs.conj())
    return MicMatrix(data)


def single_qubit_mic(q: SingleQubitPovm) -> np.ndarray:
    return mic_matrix(ProductPovm((q,))).data


def _kron_to_vec_permutation(n_qubits):
    """Index map from ``(x)_k vec(A_k)`` to ``vec((x)_k A_k)``."""
    d = 1 << n_qubits
    f = np.arange(d * d)
    i, j = f % d, f // d
    out = np.zeros_like(f)
    for k in range(n_qubits):
        shift = n_qubits - 1 - k
        out += (((i >> shift) & 1) + 2 * ((j >> shift) & 1)) * 4 ** shift
    return out


def product_mic_matrix(m: Measurement) -> MicMatrix:
    """MIC of a product POVM assembled from per-qubit MICs."""
    m = as_product_povm(m)
    kron = reduce(np.kron, [single_qubit_mic(q) for q in m.per_qubit])
    perm = _kron_to_vec_permutation(m.n_qubits)
    return MicMatrix(kron[np.ix_(perm, perm)])


def mic_channel(m: Measurement, a: np.ndarray) -> np.ndarray:
    """``H_M(A) = sum_x M_x Tr[M_x A] / Tr[M_x]`` (Kraus form)."""
    elements, traces = _nondegenerate(povm_elements(m))
    weights = np.einsum("kab,ba->k", elements, np.asarray(a)) / traces
    return np.einsum("k,kab->ab", weights, elements)


def mic_toy_identity(m: Measurement, alpha: float, atol: float = 1e-10) -> BoundReport:
    """Average post-measurement HS distance between ``I/2`` and ``I/2 + alpha z.sigma``.

    Exact average over the eight sign vectors ``z``; the prediction is
    ``2 alpha^2`` for every rank-one single-qubit basis.
    """
    povm = as_product_povm(m)
    if povm.n_qubits != 1 or not povm.per_qubit[0].is_rank_one_basis:
        raise ValueError("the toy identity needs a rank-one two-outcome single-qubit basis")
    sigma = np.stack([PAULI_MATRICES[c] for c in "XYZ"])
    values = []
    for z in itertools.product((-1, 1), repeat=3):
        diff = -alpha * np.einsum("k,kab->ab", np.array(z, dtype=float), sigma)
        values.append(np.sum(np.abs(mic_channel(povm, diff)) ** 2))
    return BoundReport("mic_toy_identity", float(np.mean(values)), 2 * alpha ** 2,
                       relation="eq", atol=atol, terms={"alpha": alpha})


def qubit_letter_table(m: Measurement) -> np.ndarray:
    """``table[i, k] = (tau_k/sqrt2| C_i |tau_k/sqrt2)`` for ``tau`` in I, X, Y, Z."""
    m = as_product_povm(m)
    paulis = np.stack([PAULI_MATRICES[c] for c in LETTERS])
    table = np.empty((m.n_qubits, 4))
    for i, q in enumerate(m.per_qubit):
        elements, traces = _nondegenerate(q.elements())
        overlaps = np.einsum("oab,kba->ok", elements, paulis)  # Tr[M_o tau_k]
        table[i] = np.sum(np.abs(overlaps) ** 2 / (2 * traces[:, None]), axis=0)
    return table


def letters_array(observables) -> np.ndarray:
    """Observables as an integer array ``(L, N)`` of letter codes (I=0, X=1, Y=2, Z=3)."""
    code = {c: k for k, c in enumerate(LETTERS)}
    return np.array([[code[ch] for ch in p.label] for p in observables], dtype=np.int64)


def spectral_quantity(m: Measurement, observables, method: str = "factorized") -> float:
    """``sum_i (V_i| C_M |V_i)`` over normalized Paulis ``V_i = P_i / sqrt(d)``.

    ``factorized`` multiplies per-qubit MIC entries; ``dense`` builds the
    full ``d^2 x d^2`` matrix. ``observables`` may be a list of
    :class:`PauliString` or a letters array from :func:`letters_array`.
    """
    povm = as_product_povm(m)
    if len(observables) == 0:
        return 0.0
    if method == "factorized":
        letters = observables if isinstance(observables, np.ndarray) else letters_array(observables)
        if letters.shape[1] != povm.n_qubits:
            raise ValueError("observables and POVM act on different numbers of qubits")
        table = qubit_letter_table(povm)
        return float(np.sum(np.prod(table[np.arange(povm.n_qubits), letters], axis=1)))
    if method == "dense":
        if any(p.n_qubits != povm.n_qubits for p in observables):
            raise ValueError("observables and POVM act on different numbers of qubits")
        mic = mic_matrix(povm)
        return float(sum(mic.quadratic_form(materialize(p, normalized=True)) for p in observables))
    raise ValueError(f"unknown method {method!r}")


# random POVMs --------------------------------------------------------------

def random_single_qubit_povm(rng: np.random.Generator) -> SingleQubitPovm:
    """Random valid POVM with 2-4 outcomes.

    alpha ~ flat Dirichlet; betas uniform in the unit ball, shifted so that
    ``sum alpha beta = 0`` and then rescaled into the ball. Half of the
    draws are rescaled so the longest beta touches the sphere.
    """
    while True:
        k = int(rng.integers(2, 5))
        alphas = rng.dirichlet(np.ones(k))
        directions = rng.standard_normal((k, 3))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        betas = directions * rng.random((k, 1)) ** (1 / 3)
        betas -= alphas @ betas
        longest = np.linalg.norm(betas, axis=1).max()
        if longest < 1e-9:
            continue
        if longest > 1 or rng.random() < 0.5:
            betas /= longest
        alphas = alphas / alphas.sum()
        return SingleQubitPovm(alphas, betas)


def random_product_povm(n_qubits: int, rng: np.random.Generator) -> ProductPovm:
    return ProductPovm(tuple(random_single_qubit_povm(rng) for _ in range(n_qubits)))


def weight_bound(n_qubits: int, min_weight: int) -> int:
    """``sum_{m=w}^{N} C(N, m)``."""
    from math import comb
    return sum(comb(n_qubits, m) for m in range(min_weight, n_qubits + 1))


def lemma62_certify(trials: int, n_qubits: int, min_weight: int, seed: int,
                    atol: float = 1e-9) -> BoundReport:
    """Largest spectral quantity over random product POVMs versus ``sum_{m>=w} C(N, m)``."""
    from ..pauli import enumerate_by_min_weight
    if trials < 1:
        raise ValueError("trials must be at least 1")
    letters = letters_array(enumerate_by_min_weight(n_qubits, min_weight))
    rng = np.random.default_rng([seed, n_qubits, min_weight])
    worst = -np.inf
    for _ in range(trials):
        worst = max(worst, spectral_quantity(random_product_povm(n_qubits, rng), letters))
    basis_value = spectral_quantity(PauliBasisMeasurement.from_label("Z" * n_qubits), letters)
    return BoundReport("single_qubit_spectral_bound", worst, weight_bound(n_qubits, min_weight),
                       relation="le", atol=atol,
                       terms={"n_qubits": n_qubits, "min_weight": min_weight, "trials": trials,
                              "seed": seed, "pauli_basis_value": basis_value,
                              "n_observables": len(letters)})
