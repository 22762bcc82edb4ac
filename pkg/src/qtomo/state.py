"""Dense density matrices, Schatten norms and state distances."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .pauli import (PauliCoeffVector, PauliString, coefficient_array,
                    pauli_expectations, pauli_sum_matrix)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10


class InvalidStateError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A ``2^N x 2^N`` Hermitian unit-trace matrix.

    Hermiticity and trace are enforced at construction. Positivity is only
    *reported* (``is_psd``) so that raw linear-inversion estimates can be
    carried around; call :meth:`validate` to demand a physical state.
    """

    data: np.ndarray
    n_qubits: int = field(default=None)

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise InvalidStateError("density matrix must be square")
        d = data.shape[0]
        n = d.bit_length() - 1
        if d < 2 or (1 << n) != d:
            raise InvalidStateError(f"dimension {d} is not a power of two")
        if self.n_qubits is not None and self.n_qubits != n:
            raise InvalidStateError(f"n_qubits={self.n_qubits} inconsistent with dimension {d}")
        if np.max(np.abs(data - data.conj().T)) > HERMITIAN_TOL:
            raise InvalidStateError("matrix is not Hermitian")
        if abs(np.trace(data) - 1) > TRACE_TOL:
            raise InvalidStateError(f"trace {np.trace(data).real:.15g} != 1")
        data = (data + data.conj().T) / 2
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "n_qubits", n)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.data)

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def is_psd(self) -> bool:
        return self.min_eigenvalue >= -PSD_TOL

    def validate(self) -> "DensityMatrix":
        if not self.is_psd:
            raise InvalidStateError(f"not positive semidefinite (min eigenvalue {self.min_eigenvalue:.3e})")
        return self

    def to_json(self) -> str:
        return json.dumps({"n_qubits": self.n_qubits,
                           "re": self.data.real.tolist(),
                           "im": self.data.imag.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "DensityMatrix":
        obj = json.loads(text)
        data = np.array(obj["re"], dtype=float) + 1j * np.array(obj["im"], dtype=float)
        return cls(data, n_qubits=int(obj["n_qubits"])).validate()


def maximally_mixed(n_qubits: int) -> DensityMatrix:
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    d = 1 << n_qubits
    return DensityMatrix(np.eye(d) / d)


def pure_state(vector) -> DensityMatrix:
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))


def basis_state(n_qubits: int, index: int = 0) -> DensityMatrix:
    v = np.zeros(1 << n_qubits)
    v[index] = 1
    return pure_state(v)


def random_state(n_qubits: int, rng: np.random.Generator | int | None = None,
                 rank: int | None = None) -> DensityMatrix:
    """Random mixed state ``G G^dagger / Tr`` from a complex Ginibre matrix ``G``."""
    rng = np.random.default_rng(rng)
    d = 1 << n_qubits
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def from_pauli_coeffs(v: PauliCoeffVector) -> DensityMatrix:
    """``sum_P alpha_P P``; the identity coefficient must equal ``1/d``."""
    d = 1 << v.n_qubits
    alpha_id = v[PauliString.identity(v.n_qubits)]
    if abs(alpha_id - 1 / d) > 1e-12:
        raise InvalidStateError(f"identity coefficient {alpha_id!r} != 1/d = {1 / d!r}")
    return DensityMatrix(pauli_sum_matrix(coefficient_array(v.n_qubits, v.coeffs)))


def to_pauli_coeffs(rho: DensityMatrix, atol: float = 1e-14) -> PauliCoeffVector:
    """``alpha_P = Tr[rho P] / d``, dropping entries below ``atol``."""
    alphas = pauli_expectations(rho.data).real / rho.dim
    xs, zs = np.nonzero(np.abs(alphas) >= atol)
    coeffs = {PauliString(rho.n_qubits, int(x), int(z)): float(alphas[x, z])
              for x, z in zip(xs, zs)}
    return PauliCoeffVector(rho.n_qubits, coeffs)


def _as_matrix(a):
    return a.data if isinstance(a, DensityMatrix) else np.asarray(a)


def schatten_norm(a, p) -> float:
    """Schatten-p norm of a Hermitian matrix for ``p`` in ``{1, 2, inf}``.

    p=1 and p=inf use the eigenvalues; p=2 is the entrywise (Frobenius) sum.
    """
    a = _as_matrix(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(a - a.conj().T), initial=0.0) > 1e-10:
        raise ValueError("schatten_norm expects a Hermitian matrix")
    if p == 2:
        return float(np.sqrt(np.sum(np.abs(a) ** 2)))
    eig = np.abs(np.linalg.eigvalsh(a))
    if p == 1:
        return float(eig.sum())
    if p in (np.inf, "inf", float("inf")):
        return float(eig.max())
    raise ValueError(f"unsupported Schatten index {p!r}")


def trace_distance(rho, sigma) -> float:
    """``||rho - sigma||_1`` (no factor 1/2)."""
    a, b = _as_matrix(rho), _as_matrix(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    return schatten_norm(a - b, 1)


def hs_distance(rho, sigma) -> float:
    a, b = _as_matrix(rho), _as_matrix(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    return schatten_norm(a - b, 2)


def project_to_states(a) -> np.ndarray:
    """Closest density matrix in HS norm: eigenvalues projected onto the simplex."""
    a = _as_matrix(a)
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1
    k = np.nonzero(u - css / np.arange(1, len(u) + 1) > 0)[0][-1]
    theta = css[k] / (k + 1)
    w = np.clip(w - theta, 0, None)
    return (v * w) @ v.conj().T
