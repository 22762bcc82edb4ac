"""Random-sign high-weight Pauli perturbations of the maximally mixed state.

For signs ``z`` in {-1, 1}^l and the ``l`` normalized Paulis ``V_i`` of weight
at least ``w``::

    W       = sum_i z_i V_i
    Delta_z = c * eps / sqrt(d * l) * W
    sigma_z = I/d + clip * Delta_z,   clip = min(1, 1 / (2 d ||Delta_z||_op))

Clipping keeps ``||sigma_z - I/d||_op <= 1/(2d)``, so every instance is a
valid state. Operator norms are exact (Hermitian eigensolver).
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .pauli import MAX_DENSE_QUBITS, count_by_min_weight, enumerate_by_min_weight, pauli_sum_matrix
from .state import DensityMatrix, maximally_mixed, trace_distance


def default_min_weight(n_qubits: int) -> int:
    return math.ceil(9 * n_qubits / 10)


@dataclass(frozen=True)
class HardInstanceParams:
    n_qubits: int
    min_weight: int | None = None
    c: float = 1 / 200
    eps: float = 0.1

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if self.min_weight is None:
            object.__setattr__(self, "min_weight", default_min_weight(self.n_qubits))
        if not 0 <= self.min_weight <= self.n_qubits:
            raise ValueError(f"min_weight must lie in [0, {self.n_qubits}]")
        if not 0 <= self.eps <= 1:
            raise ValueError("eps must lie in [0, 1]")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.ell > self.d ** 2 - 1:
            raise ValueError(f"l = {self.ell} exceeds d^2 - 1 = {self.d ** 2 - 1}")
        if not self.meets_size_condition:
            warnings.warn(f"l = {self.ell} < d^(3/2) = {self.d ** 1.5:.1f}: the concentration "
                          "guarantee for the construction does not apply", stacklevel=3)

    @property
    def d(self) -> int:
        return 1 << self.n_qubits

    @property
    def ell(self) -> int:
        return count_by_min_weight(self.n_qubits, self.min_weight)

    @property
    def scale(self) -> float:
        """``c * eps / sqrt(d * l)``, the factor in front of ``W``."""
        return self.c * self.eps / math.sqrt(self.d * self.ell)

    @property
    def norm_unit(self) -> float:
        """``sqrt(l / d)``, the predicted scale of ``||W||_op``."""
        return math.sqrt(self.ell / self.d)

    @property
    def meets_size_condition(self) -> bool:
        return self.ell >= self.d ** 1.5

    def regime(self) -> dict:
        """Which validity argument applies to these parameters."""
        return {"l_at_least_d_3_2": self.meets_size_condition,
                "eps_below_1_over_log_d": self.eps <= 1 / math.log(self.d),
                "bernstein_scale": self.norm_unit * math.log(self.d)}

    @cached_property
    def observables(self):
        return enumerate_by_min_weight(self.n_qubits, self.min_weight)

    @cached_property
    def _xz(self):
        xs = np.array([p.x for p in self.observables], dtype=np.int64)
        zs = np.array([p.z for p in self.observables], dtype=np.int64)
        return xs, zs

    def signed_sum(self, z) -> np.ndarray:
        """Dense ``W = sum_i z_i V_i``."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.ell,):
            raise ValueError(f"expected {self.ell} signs, got shape {z.shape}")
        xs, zs = self._xz
        coeffs = np.zeros((self.d, self.d))
        coeffs[xs, zs] = z / math.sqrt(self.d)
        return pauli_sum_matrix(coeffs)


@dataclass(frozen=True, eq=False)
class HardInstance:
    params: HardInstanceParams
    z: np.ndarray
    clip: float
    w_eigenvalues: np.ndarray = field(repr=False)
    state: DensityMatrix = field(repr=False)

    @property
    def w_opnorm(self) -> float:
        return float(np.max(np.abs(self.w_eigenvalues)))

    @property
    def delta_opnorm(self) -> float:
        """``||Delta_z||_op`` before clipping."""
        return self.params.scale * self.w_opnorm

    @property
    def normalized_constant(self) -> float:
        """``||W||_op / sqrt(l/d)``."""
        return self.w_opnorm / self.params.norm_unit

    @property
    def trace_distance_to_mm(self) -> float:
        """``||sigma_z - I/d||_1`` from the spectrum of ``W``."""
        return float(self.clip * self.params.scale * np.sum(np.abs(self.w_eigenvalues)))

    @property
    def perturbation(self) -> np.ndarray:
        return self.state.data - np.eye(self.params.d) / self.params.d


def instance_from_signs(params: HardInstanceParams, z) -> HardInstance:
    if params.n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"N = {params.n_qubits} exceeds the dense cap {MAX_DENSE_QUBITS}")
    z = np.asarray(z, dtype=np.int8)
    if not np.all(np.abs(z) == 1):
        raise ValueError("signs must be +/-1")
    w = params.signed_sum(z)
    eig = np.linalg.eigvalsh(w)
    delta_op = params.scale * np.max(np.abs(eig))
    clip = 1.0 if delta_op == 0 else min(1.0, 1 / (2 * params.d * delta_op))
    sigma = np.eye(params.d) / params.d + clip * params.scale * w
    z = z.copy()
    z.setflags(write=False)
    return HardInstance(params, z, clip, eig, DensityMatrix(sigma))


def draw_signs(params: HardInstanceParams, seed) -> np.ndarray:
    return 2 * np.random.default_rng(seed).integers(0, 2, size=params.ell, dtype=np.int8) - 1


def build_instance(params: HardInstanceParams, seed) -> HardInstance:
    """Instance with uniformly random signs from ``default_rng(seed)``."""
    return instance_from_signs(params, draw_signs(params, seed))


def is_good(h: HardInstance) -> bool:
    """Whether ``||sigma_z - I/d||_1 >= eps``."""
    return trace_distance(h.state, maximally_mixed(h.params.n_qubits)) >= h.params.eps


@dataclass
class ConcentrationStats:
    """Per-trial results of an operator-norm sweep plus summaries."""

    params: HardInstanceParams
    seed: int
    opnorms: np.ndarray
    clips: np.ndarray
    trace_dists: np.ndarray
    min_state_eigs: np.ndarray
    candidates: tuple = (1.5, 2.0, 2.5, 3.0)

    @property
    def trials(self) -> int:
        return len(self.opnorms)

    @property
    def normalized(self) -> np.ndarray:
        return self.opnorms / self.params.norm_unit

    @property
    def good(self) -> np.ndarray:
        return self.trace_dists >= self.params.eps

    @property
    def good_frequency(self) -> float:
        return float(np.mean(self.good))

    def quantiles(self, qs=(0.5, 0.9, 0.99, 0.999)) -> dict:
        return {q: float(np.quantile(self.normalized, q)) for q in qs}

    def exceed_fractions(self) -> dict:
        return {c: float(np.mean(self.normalized > c)) for c in self.candidates}

    def c_estimate(self, q: float = 0.999) -> float:
        return float(np.quantile(self.normalized, q))

    def summary(self) -> dict:
        p = self.params
        return {
            "n_qubits": p.n_qubits, "min_weight": p.min_weight, "ell": p.ell,
            "c": p.c, "eps": p.eps, "seed": self.seed, "trials": self.trials,
            "normalized_C_mean": float(np.mean(self.normalized)),
            "normalized_C_median": float(np.median(self.normalized)),
            "normalized_C_quantiles": {str(k): v for k, v in self.quantiles().items()},
            "exceed_fraction": {str(k): v for k, v in self.exceed_fractions().items()},
            "median_opnorm": float(np.median(self.opnorms)),
            "bernstein_scale": p.regime()["bernstein_scale"],
            "clip_min": float(np.min(self.clips)),
            "clip_fraction_below_one": float(np.mean(self.clips < 1)),
            "good_frequency": self.good_frequency,
            "min_state_eigenvalue": float(np.min(self.min_state_eigs)),
            "regime": p.regime(),
        }

    def rows(self):
        for t in range(self.trials):
            yield {"trial": t, "opnorm": float(self.opnorms[t]),
                   "normalized_C": float(self.normalized[t]), "clip": float(self.clips[t]),
                   "trace_dist": float(self.trace_dists[t]), "is_good": bool(self.good[t])}


def _seed_key(seed, *extra):
    return tuple(int(s) for s in np.atleast_1d(seed)) + extra


def opnorm_concentration_sweep(params: HardInstanceParams, trials: int, seed,
                               candidates=(1.5, 2.0, 2.5, 3.0),
                               workers: int = 1) -> ConcentrationStats:
    """Sample ``trials`` sign vectors; trial ``t`` is seeded by ``(*seed, t)``.

    ``workers > 1`` spreads trials over threads. Results do not depend on it.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")

    def one(t):
        h = build_instance(params, _seed_key(seed, t))
        return (h.w_opnorm, h.clip, h.trace_distance_to_mm,
                1 / params.d + h.clip * params.scale * h.w_eigenvalues[0])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            out = list(pool.map(one, range(trials)))
    else:
        out = [one(t) for t in range(trials)]
    opnorms, clips, dists, mins = (np.array(col) for col in zip(*out))
    return ConcentrationStats(params, seed, opnorms, clips, dists, mins, tuple(candidates))


def free_probability_diagnostics(params: HardInstanceParams) -> dict:
    """Parameters of the sharp matrix-concentration bound for ``X = sum z_i V_i``.

    ``E X^2 = (l/d) I`` and ``Cov(X) = sum |V_i)(V_i|`` is a projector, so
    ``sigma = sqrt(l/d)``, ``v = 1``, ``sigma_* <= 1`` and ``R = 1/sqrt(d)``;
    the deviation scale uses ``t = l^(1/4)``.
    """
    d, ell = params.d, params.ell
    sigma = math.sqrt(ell / d)
    v, sigma_star, r = 1.0, 1.0, 1 / math.sqrt(d)
    t = ell ** 0.25
    deviation = (math.sqrt(v * sigma) * math.log(d) ** 0.75 + sigma_star * math.sqrt(t)
                 + r ** (1 / 3) * sigma ** (2 / 3) * t ** (2 / 3) + r * t)
    return {"sigma": sigma, "v": v, "sigma_star_upper": sigma_star, "R": r,
            "free_norm_upper": 2 * sigma, "t": t, "deviation_terms": deviation,
            "deviation_over_free": deviation / (2 * sigma),
            "failure_probability_bound": d * math.exp(-t)}


@dataclass(frozen=True)
class HammingRecord:
    lhs: float
    rhs: float
    hamming: int
    holds: bool


def hamming_separation_check(h: HardInstance, zhat, c_est: float) -> HammingRecord:
    """Compare ``||sigma_z - sigma_zhat||_1`` with ``c eps / (2 C l) * ham(z, zhat)``.

    ``h`` must satisfy the concentration event ``||W_z||_op <= C sqrt(l/d)``
    for the supplied constant; that is what the separation argument uses.
    """
    p = h.params
    zhat = np.asarray(zhat)
    if zhat.shape != h.z.shape:
        raise ValueError(f"zhat has length {zhat.size}, expected {h.z.size}")
    if h.w_opnorm > c_est * p.norm_unit * (1 + 1e-12):
        raise ValueError(f"||W_z|| = {h.w_opnorm:.4f} exceeds C sqrt(l/d) = "
                         f"{c_est * p.norm_unit:.4f}; z is outside the concentration event")
    other = instance_from_signs(p, zhat)
    ham = int(np.sum(h.z != zhat))
    lhs = trace_distance(h.state, other.state)
    rhs = p.c * p.eps / (2 * c_est * p.ell) * ham
    return HammingRecord(lhs, rhs, ham, bool(lhs >= rhs - 1e-15))
