"""Single-qubit and product POVMs, Born-rule distributions and sampling.

A single-qubit element is parameterized as ``alpha * (I + beta . (X, Y, Z))``
with ``sum alpha = 1`` and ``sum alpha * beta = 0`` so the elements sum to
the identity, and ``|beta| <= 1`` so each element is PSD.

Outcomes of an N-qubit product measurement are multi-indices
``(o_0, ..., o_{N-1})``; flattened distributions are row-major with qubit 0
most significant. For a Pauli basis, index 0 is the +1 eigenvalue.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Sequence, Union

import numpy as np

from .pauli import PAULI_MATRICES, PauliString
from .state import DensityMatrix

POVM_TOL = 1e-12
PROB_CLAMP_TOL = 1e-12
PROB_ERROR_TOL = 1e-9

_SIGMA = np.stack([PAULI_MATRICES[c] for c in "XYZ"])
_AXIS = {"X": 0, "Y": 1, "Z": 2}

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S_DAG = np.diag([1, -1j])
# u sigma u^dagger = Z, so the computational readout of u rho u^dagger
# is the sigma-basis measurement.
_ROTATIONS = {"X": _H, "Y": _H @ _S_DAG, "Z": np.eye(2, dtype=complex)}


class InvalidPovmError(ValueError):
    pass


def _readonly(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SingleQubitPovm:
    """Finite single-qubit POVM ``M_o = alpha_o (I + beta_o . sigma)``."""

    alphas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        alphas = _readonly(self.alphas).reshape(-1)
        betas = _readonly(self.betas).reshape(-1, 3)
        if len(alphas) == 0 or len(alphas) != len(betas):
            raise InvalidPovmError("need one beta 3-vector per outcome")
        if np.any(alphas < -POVM_TOL) or np.any(alphas > 1 + POVM_TOL):
            raise InvalidPovmError("alphas must lie in [0, 1]")
        if abs(alphas.sum() - 1) > POVM_TOL:
            raise InvalidPovmError(f"alphas sum to {alphas.sum():.15g}, not 1")
        if np.max(np.abs(alphas @ betas)) > POVM_TOL:
            raise InvalidPovmError("sum of alpha * beta must vanish for the elements to sum to I")
        norms = np.linalg.norm(betas, axis=1)
        if np.any(norms > 1 + POVM_TOL):
            raise InvalidPovmError(f"|beta| = {norms.max():.15g} > 1 gives a non-PSD element")
        object.__setattr__(self, "alphas", _readonly(alphas))
        object.__setattr__(self, "betas", _readonly(betas))

    @property
    def n_outcomes(self) -> int:
        return len(self.alphas)

    def elements(self) -> np.ndarray:
        """Array ``(n_outcomes, 2, 2)`` of the POVM elements."""
        return self.alphas[:, None, None] * (
            np.eye(2) + np.einsum("ok,kab->oab", self.betas, _SIGMA))

    @property
    def is_rank_one_basis(self) -> bool:
        return (self.n_outcomes == 2 and np.allclose(self.alphas, 0.5, atol=1e-12)
                and np.allclose(np.linalg.norm(self.betas, axis=1), 1, atol=1e-12))

    @classmethod
    def pauli_basis(cls, letter: str) -> "SingleQubitPovm":
        e = np.zeros(3)
        e[_AXIS[letter]] = 1
        return cls([0.5, 0.5], [e, -e])

    @classmethod
    def along(cls, direction) -> "SingleQubitPovm":
        """Projective measurement onto the Bloch direction ``+/- u``."""
        u = np.asarray(direction, dtype=float)
        u = u / np.linalg.norm(u)
        return cls([0.5, 0.5], [u, -u])

    @classmethod
    def trivial(cls) -> "SingleQubitPovm":
        return cls([1.0], [[0.0, 0.0, 0.0]])

    @classmethod
    def uniform_pauli(cls) -> "SingleQubitPovm":
        """Six-outcome POVM: a uniformly random Pauli basis with the basis recorded."""
        betas = [s * np.eye(3)[k] for k in range(3) for s in (1, -1)]
        return cls(np.full(6, 1 / 6), betas)


@dataclass(frozen=True)
class PauliBasisMeasurement:
    """Projective measurement in the eigenbasis of a full-weight Pauli string."""

    basis: PauliString

    def __post_init__(self):
        if isinstance(self.basis, str):
            object.__setattr__(self, "basis", PauliString.from_label(self.basis))
        if self.basis.weight != self.basis.n_qubits:
            raise InvalidPovmError(f"basis {self.basis} has an identity letter")

    @classmethod
    def from_label(cls, label: str) -> "PauliBasisMeasurement":
        return cls(PauliString.from_label(label))

    @property
    def n_qubits(self) -> int:
        return self.basis.n_qubits

    @property
    def label(self) -> str:
        return self.basis.label

    @property
    def shape(self) -> tuple[int, ...]:
        return (2,) * self.n_qubits

    def rotations(self) -> list[np.ndarray]:
        return [_ROTATIONS[c] for c in self.label]

    def to_povm(self) -> "ProductPovm":
        return ProductPovm(tuple(SingleQubitPovm.pauli_basis(c) for c in self.label))

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class ProductPovm:
    """Tensor product of single-qubit POVMs, one per qubit."""

    per_qubit: tuple

    def __post_init__(self):
        per_qubit = tuple(self.per_qubit)
        if not per_qubit:
            raise InvalidPovmError("need at least one qubit")
        for q in per_qubit:
            if not isinstance(q, SingleQubitPovm):
                raise InvalidPovmError(f"expected SingleQubitPovm, got {type(q).__name__}")
        object.__setattr__(self, "per_qubit", per_qubit)

    @property
    def n_qubits(self) -> int:
        return len(self.per_qubit)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(q.n_outcomes for q in self.per_qubit)

    @property
    def n_outcomes(self) -> int:
        return int(np.prod(self.shape))

    @classmethod
    def from_basis(cls, label: str) -> "ProductPovm":
        return PauliBasisMeasurement.from_label(label).to_povm()

    @classmethod
    def repeat(cls, povm: SingleQubitPovm, n_qubits: int) -> "ProductPovm":
        return cls((povm,) * n_qubits)

    def to_povm(self) -> "ProductPovm":
        return self


Measurement = Union[ProductPovm, PauliBasisMeasurement]
MeasurementStrategy = Callable[[int, tuple], Measurement]


def as_product_povm(m: Measurement) -> ProductPovm:
    if isinstance(m, (ProductPovm, PauliBasisMeasurement)):
        return m.to_povm()
    raise InvalidPovmError(f"not a measurement: {type(m).__name__}")


def _check_outcome(shape, outcome):
    outcome = tuple(int(o) for o in np.atleast_1d(outcome))
    if len(outcome) != len(shape) or any(not 0 <= o < k for o, k in zip(outcome, shape)):
        raise IndexError(f"outcome {outcome} outside alphabet {shape}")
    return outcome


def povm_element_matrix(m: Measurement, outcome) -> np.ndarray:
    """Dense element ``M_x`` for a multi-index outcome."""
    m = as_product_povm(m)
    outcome = _check_outcome(m.shape, outcome)
    return reduce(np.kron, [q.elements()[o] for q, o in zip(m.per_qubit, outcome)])


def povm_elements(m: Measurement) -> np.ndarray:
    """All dense elements, shape ``(n_outcomes, d, d)`` in row-major outcome order."""
    m = as_product_povm(m)
    out = np.ones((1, 1, 1), dtype=complex)
    for q in m.per_qubit:
        e = q.elements()
        out = np.einsum("iab,jcd->ijacbd", out, e).reshape(
            out.shape[0] * e.shape[0], out.shape[1] * 2, out.shape[2] * 2)
    return out


def _rotate_locally(rho, unitaries):
    n = len(unitaries)
    t = rho.reshape((2,) * (2 * n))
    for i, u in enumerate(unitaries):
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [i])), 0, i)
        t = np.moveaxis(np.tensordot(t, u.conj(), axes=([n + i], [1])), -1, n + i)
    return t.reshape(rho.shape)


def _clean(p):
    if p.min(initial=0.0) < -PROB_ERROR_TOL:
        raise ValueError(f"negative outcome probability {p.min():.3e}; is the state valid?")
    p = np.where(p < 0, 0.0, p)
    total = p.sum()
    if abs(total - 1) > 1e-8:
        raise ValueError(f"outcome probabilities sum to {total:.12g}")
    return p / total


def basis_distribution(m: PauliBasisMeasurement, rho) -> np.ndarray:
    """Born-rule distribution of a Pauli basis by local basis rotation, O(d^2 N)."""
    data = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
    rotated = _rotate_locally(data, m.rotations())
    return np.real(np.diagonal(rotated)).copy()


def product_distribution(m: Measurement, rho) -> np.ndarray:
    """Born-rule distribution by contracting each qubit's elements with ``rho``."""
    m = as_product_povm(m)
    data = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
    n = m.n_qubits
    t = data.reshape((2,) * (2 * n))
    for i, q in enumerate(m.per_qubit):
        # Tr[M rho] = sum_{a,b} M[b, a] rho[a, b]
        t = np.moveaxis(np.tensordot(t, q.elements(), axes=([i, n], [2, 1])), -1, i)
    return np.real(t).reshape(-1)


def outcome_distribution(m: Measurement, rho: DensityMatrix) -> np.ndarray:
    """Probability vector ``Tr[M_x rho]`` over the flattened outcome alphabet."""
    n = rho.n_qubits if isinstance(rho, DensityMatrix) else int(np.log2(len(rho)))
    if m.n_qubits != n:
        raise ValueError(f"measurement on {m.n_qubits} qubits, state on {n}")
    if isinstance(m, PauliBasisMeasurement):
        p = basis_distribution(m, rho)
    else:
        p = product_distribution(m, rho)
    p[(p < 0) & (p > -PROB_CLAMP_TOL)] = 0.0
    return _clean(p)


def sample_outcomes(m: Measurement, rho: DensityMatrix, count: int,
                    seed=None) -> np.ndarray:
    """``count`` i.i.d. outcomes as an integer array of shape ``(count, N)``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = np.random.default_rng(seed)
    p = outcome_distribution(m, rho)
    flat = rng.choice(len(p), size=count, p=p)
    return np.stack(np.unravel_index(flat, m.shape), axis=-1).astype(np.int64)


def outcome_signs(outcomes) -> np.ndarray:
    """Map basis outcome indices (0, 1) to eigenvalues (+1, -1)."""
    return 1 - 2 * np.asarray(outcomes)


# strategies ---------------------------------------------------------------

def constant_strategy(m: Measurement) -> MeasurementStrategy:
    def strategy(i, history):
        return m
    return strategy


def random_basis_strategy(n_qubits: int, seed: int) -> MeasurementStrategy:
    """Fresh uniformly random Pauli basis for every copy, fixed by ``(seed, i)``."""
    def strategy(i, history):
        letters = np.random.default_rng([seed, i]).integers(0, 3, size=n_qubits)
        return PauliBasisMeasurement.from_label("".join("XYZ"[k] for k in letters))
    return strategy


def flip_strategy() -> MeasurementStrategy:
    """Single qubit: Z first, then X after a +1 outcome and Z after a -1 outcome."""
    x_basis = PauliBasisMeasurement.from_label("X")
    z_basis = PauliBasisMeasurement.from_label("Z")

    def strategy(i, history):
        if not history:
            return z_basis
        return x_basis if history[-1][0] == 0 else z_basis
    return strategy


def _checked(m, i, n_qubits):
    try:
        povm = as_product_povm(m)
        if povm.n_qubits != n_qubits:
            raise InvalidPovmError(f"acts on {povm.n_qubits} qubits, state has {n_qubits}")
        for q in povm.per_qubit:
            q.__post_init__()
    except InvalidPovmError as exc:
        raise InvalidPovmError(f"copy {i}: strategy returned an invalid POVM ({exc})") from exc
    return m


def run_strategy(s: MeasurementStrategy, rho: DensityMatrix, n: int, seed=None) -> list[tuple]:
    """Measure ``n`` copies one at a time, asking ``s(i, history)`` for each POVM."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    history: list[tuple] = []
    for i in range(n):
        m = _checked(s(i, tuple(history)), i, rho.n_qubits)
        p = outcome_distribution(m, rho)
        flat = rng.choice(len(p), p=p)
        history.append(tuple(int(k) for k in np.unravel_index(flat, m.shape)))
    return history


# JSON ---------------------------------------------------------------------

def povm_to_dict(m: Measurement) -> dict:
    if isinstance(m, PauliBasisMeasurement):
        return {"basis": m.label}
    return {"qubits": [{"outcomes": [{"alpha": float(a), "beta": [float(b) for b in beta]}
                                     for a, beta in zip(q.alphas, q.betas)]}
                       for q in m.per_qubit]}


def povm_from_dict(obj: dict) -> Measurement:
    if "basis" in obj:
        return PauliBasisMeasurement.from_label(obj["basis"])
    qubits = []
    for q in obj["qubits"]:
        outcomes = q["outcomes"]
        qubits.append(SingleQubitPovm([o["alpha"] for o in outcomes],
                                      [o["beta"] for o in outcomes]))
    return ProductPovm(tuple(qubits))


def load_povm(path) -> Measurement:
    with open(path) as fh:
        return povm_from_dict(json.load(fh))


def pauli_bases(n_qubits: int) -> list[PauliBasisMeasurement]:
    """All ``3^N`` bases in lexicographic order (X < Y < Z)."""
    import itertools
    return [PauliBasisMeasurement.from_label("".join(t))
            for t in itertools.product("XYZ", repeat=n_qubits)]


def product_of(povms: Sequence[SingleQubitPovm]) -> ProductPovm:
    return ProductPovm(tuple(povms))
