"""N-qubit Pauli strings in a two-bit-per-qubit (x|z) encoding.

A string is stored as two integers ``x`` and ``z`` of ``n_qubits`` bits each.
Qubit 0 is the leftmost letter and occupies the most significant bit, which
matches the row-major (``np.kron``) ordering of the dense matrices:

    I = (0, 0),  X = (1, 0),  Y = (1, 1),  Z = (0, 1)

With this encoding the Hermitian Pauli matrix acts on computational basis
states as

    P(x, z) |j> = i^{|x & z|} (-1)^{|z & j|} |j ^ x>

so every Pauli (and every real combination of Paulis) can be built or
decomposed with a Walsh-Hadamard transform instead of Kronecker products.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

LETTERS = "IXYZ"
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {bits: letter for letter, bits in _LETTER_BITS.items()}

#: Default largest qubit count for dense materialization (d^2 = 16M entries).
MAX_DENSE_QUBITS = 12

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class MaterializationError(ValueError):
    """Requested a dense matrix above the configured qubit cap."""


def _popcount(a):
    """Bit count, elementwise for integer arrays."""
    if isinstance(a, (int, np.integer)):
        return int(a).bit_count()
    a = np.asarray(a, dtype=np.int64)
    out = np.zeros(a.shape, dtype=np.int64)
    while np.any(a):
        out += a & 1
        a = a >> 1
    return out


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, e.g. ``PauliString.from_label("XIZ")``."""

    n_qubits: int
    x: int
    z: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        limit = 1 << self.n_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("x/z masks exceed n_qubits bits")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        label = label.strip().upper()
        if not label or any(ch not in _LETTER_BITS for ch in label):
            raise ValueError(f"invalid Pauli label {label!r}")
        x = z = 0
        for ch in label:
            bx, bz = _LETTER_BITS[ch]
            x = (x << 1) | bx
            z = (z << 1) | bz
        return cls(len(label), x, z)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0)

    def letter(self, qubit: int) -> str:
        shift = self.n_qubits - 1 - qubit
        return _BITS_LETTER[((self.x >> shift) & 1, (self.z >> shift) & 1)]

    @property
    def label(self) -> str:
        return "".join(self.letter(q) for q in range(self.n_qubits))

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def support_mask(self) -> int:
        return self.x | self.z

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n_qubits) if self.letter(q) != "I")

    @property
    def index(self) -> int:
        """Position in the dense ``(x, z)`` coefficient layout, ``x * d + z``."""
        return (self.x << self.n_qubits) | self.z

    @classmethod
    def from_index(cls, n_qubits: int, index: int) -> "PauliString":
        return cls(n_qubits, index >> n_qubits, index & ((1 << n_qubits) - 1))

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"


def weight(p: PauliString) -> int:
    """Number of non-identity letters."""
    return p.weight


def _check_cap(n_qubits, cap):
    cap = MAX_DENSE_QUBITS if cap is None else cap
    if n_qubits > cap:
        raise MaterializationError(
            f"{n_qubits} qubits exceeds the dense materialization cap of {cap}")


def materialize(p: PauliString, normalized: bool = False, cap: int | None = None) -> np.ndarray:
    """Dense ``d x d`` matrix of ``p``; divided by ``sqrt(d)`` if ``normalized``."""
    _check_cap(p.n_qubits, cap)
    d = 1 << p.n_qubits
    j = np.arange(d)
    phase = 1j ** (p.x & p.z).bit_count()
    out = np.zeros((d, d), dtype=complex)
    out[j ^ p.x, j] = phase * (1 - 2 * (_popcount(j & p.z) & 1))
    if normalized:
        out /= np.sqrt(d)
    return out


def hs_inner(p: PauliString, q: PauliString, normalized: bool = False) -> float:
    """Hilbert-Schmidt inner product ``Tr[P^dagger Q]`` computed from the bit masks."""
    if p.n_qubits != q.n_qubits:
        raise ValueError("Pauli strings act on different numbers of qubits")
    if p != q:
        return 0.0
    return 1.0 if normalized else float(1 << p.n_qubits)


def count_by_min_weight(n_qubits: int, min_weight: int) -> int:
    """``sum_{m >= min_weight} C(N, m) 3^m`` without enumerating."""
    return sum(comb(n_qubits, m) * 3 ** m for m in range(min_weight, n_qubits + 1))


def enumerate_by_min_weight(n_qubits: int, min_weight: int) -> list[PauliString]:
    """All strings of weight ``>= min_weight``, by decreasing weight then label.

    Labels compare lexicographically in the order I < X < Y < Z.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    if not 0 <= min_weight <= n_qubits:
        raise ValueError(f"min_weight must lie in [0, {n_qubits}], got {min_weight}")
    out = []
    for m in range(n_qubits, min_weight - 1, -1):
        labels = []
        for support in itertools.combinations(range(n_qubits), m):
            for letters in itertools.product("XYZ", repeat=m):
                chars = ["I"] * n_qubits
                for q, ch in zip(support, letters):
                    chars[q] = ch
                labels.append("".join(chars))
        labels.sort()
        out.extend(PauliString.from_label(s) for s in labels)
    return out


def all_paulis(n_qubits: int) -> list[PauliString]:
    return enumerate_by_min_weight(n_qubits, 0)


def walsh_hadamard(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis.

    ``out[..., k] = sum_j (-1)^{|k & j|} a[..., j]`` (Sylvester ordering).
    """
    a = np.array(a, copy=True)
    lead, d = a.shape[:-1], a.shape[-1]
    if d & (d - 1):
        raise ValueError("last axis must be a power of two")
    h = 1
    while h < d:
        a = a.reshape(*lead, d // (2 * h), 2, h)
        u = a[..., 0, :].copy()
        v = a[..., 1, :]
        a[..., 0, :] = u + v
        a[..., 1, :] = u - v
        h *= 2
    return a.reshape(*lead, d)


def _xz_phase(n_qubits):
    d = 1 << n_qubits
    xs = np.arange(d)[:, None]
    zs = np.arange(d)[None, :]
    return 1j ** (_popcount(xs & zs) % 4)


def pauli_sum_matrix(coeffs: np.ndarray, cap: int | None = None) -> np.ndarray:
    """Dense ``sum_{x,z} coeffs[x, z] P(x, z)`` for a ``(d, d)`` coefficient array.

    Runs in O(d^2 log d) via one Walsh-Hadamard transform per x-row.
    """
    coeffs = np.asarray(coeffs)
    d = coeffs.shape[-1]
    n_qubits = d.bit_length() - 1
    if coeffs.shape != (d, d) or (1 << n_qubits) != d:
        raise ValueError("coefficients must be a (d, d) array with d a power of two")
    _check_cap(n_qubits, cap)
    rows = walsh_hadamard(coeffs * _xz_phase(n_qubits))
    j = np.arange(d)
    out = np.empty((d, d), dtype=complex)
    out[np.arange(d)[:, None] ^ j[None, :], np.broadcast_to(j, (d, d))] = rows
    return out


def pauli_expectations(a: np.ndarray) -> np.ndarray:
    """All traces ``Tr[A P(x, z)]`` as a ``(d, d)`` array indexed ``[x, z]``."""
    a = np.asarray(a)
    d = a.shape[0]
    n_qubits = d.bit_length() - 1
    j = np.arange(d)
    # shifted[x, j] = A[j, j ^ x]
    shifted = a[np.broadcast_to(j, (d, d)), np.arange(d)[:, None] ^ j[None, :]]
    return walsh_hadamard(shifted) * _xz_phase(n_qubits)


def coefficient_array(n_qubits: int, coeffs: dict[PauliString, float]) -> np.ndarray:
    """Scatter a sparse ``{PauliString: coefficient}`` map into the ``(d, d)`` layout."""
    d = 1 << n_qubits
    out = np.zeros((d, d), dtype=float)
    for p, value in coeffs.items():
        if p.n_qubits != n_qubits:
            raise ValueError(f"{p} does not act on {n_qubits} qubits")
        out[p.x, p.z] = value
    return out


@dataclass(frozen=True)
class PauliCoeffVector:
    """Sparse real coefficients ``alpha_P`` with ``A = sum_P alpha_P P``."""

    n_qubits: int
    coeffs: dict

    def __post_init__(self):
        for p, value in self.coeffs.items():
            if p.n_qubits != self.n_qubits:
                raise ValueError(f"{p} does not act on {self.n_qubits} qubits")
            if abs(complex(value).imag) > 1e-12:
                raise ValueError(f"coefficient of {p} is not real")

    def __getitem__(self, p: PauliString | str) -> float:
        if isinstance(p, str):
            p = PauliString.from_label(p)
        return float(self.coeffs.get(p, 0.0))

    def to_array(self) -> np.ndarray:
        return coefficient_array(self.n_qubits, self.coeffs)

    @classmethod
    def from_labels(cls, mapping: dict[str, float]) -> "PauliCoeffVector":
        coeffs = {PauliString.from_label(k): float(v) for k, v in mapping.items()}
        sizes = {p.n_qubits for p in coeffs}
        if len(sizes) != 1:
            raise ValueError("labels must share one length")
        return cls(sizes.pop(), coeffs)
