"""Mutual information between hard-instance signs and measurement outcomes.

``mi_experiment`` either enumerates every sign vector and every outcome
history (exact mode, tiny instances only) or samples histories and uses the
plug-in estimator (Monte Carlo mode). The average per-sign information is
compared with the MIC-based upper bound

    (1/l) sum_i I(z_i; x^n) <= 8 n c^2 eps^2 / l^2 * S + 16 n c^2 eps^2 Pr[z not good]

where ``S`` is the largest spectral quantity among the POVMs used.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..hard_instance import HardInstanceParams, draw_signs, instance_from_signs
from ..measurement import MeasurementStrategy, _checked, as_product_povm, povm_elements, run_strategy
from .channel import letters_array, spectral_quantity, weight_bound
from .divergences import binary_entropy
from .report import BoundReport

MAX_EXACT_CELLS = 2 ** 28


class BudgetExceededError(RuntimeError):
    pass


def exact_mutual_info(joint) -> float:
    """``I(X; Y)`` in bits for a joint probability table ``joint[x, y]``."""
    joint = np.asarray(joint, dtype=float)
    if joint.ndim != 2:
        raise ValueError("joint table must be two-dimensional")
    if np.any(joint < -1e-15) or abs(joint.sum() - 1) > 1e-9:
        raise ValueError("joint table must be non-negative and sum to 1")
    joint = np.clip(joint, 0, None)
    joint = joint / joint.sum()
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    mask = joint > 0
    value = np.sum(joint[mask] * np.log2(joint[mask] / (px @ py)[mask]))
    return max(float(value), 0.0)


def fano_bound_check(error_probs, mi, atol: float = 1e-12) -> BoundReport:
    """Check ``I(z_i; x^n) >= 1 - h(p_i)`` per coordinate and the averaged form.

    The averaged chain is ``mean I >= 1 - mean h(p_i) >= 1 - h(mean p_i)``,
    the second step by concavity of ``h``.
    """
    p = np.atleast_1d(np.asarray(error_probs, dtype=float))
    mi = np.atleast_1d(np.asarray(mi, dtype=float))
    if p.shape != mi.shape:
        raise ValueError("error_probs and mi must have equal lengths")
    if np.any(p < 0) or np.any(p > 0.5):
        raise ValueError("error probabilities must lie in [0, 1/2]")
    per_coord = 1 - binary_entropy(p)
    avg_lower = float(np.mean(per_coord))
    concave_lower = float(1 - binary_entropy(np.mean(p)))
    per_coord_ok = bool(np.all(mi >= per_coord - atol))
    report = BoundReport("fano_mi_lower", float(np.mean(mi)), avg_lower, relation="ge", atol=atol,
                         terms={"per_coordinate_lower": per_coord.tolist(),
                                "per_coordinate_holds": per_coord_ok,
                                "concavity_lower": concave_lower,
                                "concavity_step_holds": bool(avg_lower >= concave_lower - atol)})
    return report


@dataclass
class MIExperimentResult:
    per_coordinate: np.ndarray
    report: BoundReport
    mode: str
    pr_not_good: float
    spectral: float
    extra: dict = field(default_factory=dict)

    @property
    def average(self) -> float:
        return float(np.mean(self.per_coordinate))

    def to_dict(self) -> dict:
        return {"mode": self.mode, "per_coordinate_mi_bits": self.per_coordinate.tolist(),
                "average_mi_bits": self.average, "pr_not_good": self.pr_not_good,
                "spectral_quantity": self.spectral, "report": self.report.to_dict(), **self.extra}


def _all_signs(ell):
    return np.array(list(itertools.product((1, -1), repeat=ell)), dtype=np.int8)


def _enumerate_histories(params, strategy, n, states, budget):
    """Probability of every outcome history for every state: ``(n_states, n_histories)``."""
    n_states = len(states)
    histories = [()]
    probs = np.ones((n_states, 1))
    used = {}
    dist_cache = {}
    for i in range(n):
        new_hist, new_cols = [], []
        for h_idx, h in enumerate(histories):
            m = _checked(strategy(i, h), i, params.n_qubits)
            key = id(m)
            if key not in dist_cache:
                povm = as_product_povm(m)
                elements = povm_elements(povm)
                p = np.real(np.einsum("kab,sba->sk", elements, states))
                p = np.clip(p, 0, None)
                # holding m keeps its id from being reused
                dist_cache[key] = (m, povm.shape, p / p.sum(axis=1, keepdims=True))
                used[key] = povm
            _, shape, p = dist_cache[key]
            for k in range(p.shape[1]):
                new_hist.append(h + (tuple(int(o) for o in np.unravel_index(k, shape)),))
                new_cols.append(probs[:, h_idx] * p[:, k])
        if n_states * len(new_hist) > budget:
            raise BudgetExceededError(
                f"exact enumeration needs {n_states * len(new_hist)} cells, budget is {budget}")
        histories = new_hist
        probs = np.stack(new_cols, axis=1)
    return probs, list(used.values())


def _plugin_mi(z_col, hist_ids, n_hist, miller_madow):
    table = np.zeros((2, n_hist))
    np.add.at(table, ((1 - z_col) // 2, hist_ids), 1)
    total = table.sum()
    value = exact_mutual_info(table / total)
    if miller_madow:
        k_joint = np.count_nonzero(table)
        k_z = np.count_nonzero(table.sum(axis=1))
        k_x = np.count_nonzero(table.sum(axis=0))
        # first-order bias of the plug-in estimate is (K_zx - K_z - K_x + 1) / (2 N ln 2)
        value -= (k_joint - k_z - k_x + 1) / (2 * total * math.log(2))
    return value


def mi_experiment(params: HardInstanceParams, strategy: MeasurementStrategy, n: int,
                  mode: str = "exact", budget: int | None = None, seed: int = 0,
                  miller_madow: bool = False) -> MIExperimentResult:
    """Per-coordinate ``I(z_i; x^n)`` (bits) and the MIC upper bound.

    ``budget`` caps the joint-table size in exact mode (default ``2^28``
    cells) and is the number of sampled histories in Monte Carlo mode
    (default ``10^4``). The strategy must be deterministic given its inputs.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    ell, c, eps = params.ell, params.c, params.eps
    letters = letters_array(params.observables)
    extra = {"n": n, "ell": ell, "c": c, "eps": eps, "n_qubits": params.n_qubits}

    if mode == "exact":
        budget = MAX_EXACT_CELLS if budget is None else min(budget, MAX_EXACT_CELLS)
        if 2 ** ell > budget:
            raise BudgetExceededError(f"2^l = {2 ** ell} sign vectors exceed the budget {budget}")
        signs = _all_signs(ell)
        instances = [instance_from_signs(params, z) for z in signs]
        states = np.stack([h.state.data for h in instances])
        good = np.array([h.trace_distance_to_mm >= eps for h in instances])
        probs, used = _enumerate_histories(params, strategy, n, states, budget)
        joint = probs / len(signs)
        mi = np.array([exact_mutual_info(np.stack([joint[signs[:, i] == 1].sum(axis=0),
                                                   joint[signs[:, i] == -1].sum(axis=0)]))
                       for i in range(ell)])
        pr_not_good = float(np.mean(~good))
        extra["cells"] = int(probs.size)
    elif mode == "monte_carlo":
        budget = 10_000 if budget is None else budget
        warnings.warn("plug-in mutual information is biased upward", stacklevel=2)
        cache, used_map = {}, {}
        z_rows, hist_keys, good = [], [], []
        for s in range(budget):
            z = draw_signs(params, (seed, s))
            key = z.tobytes()
            if key not in cache:
                cache[key] = instance_from_signs(params, z)
            h = cache[key]
            good.append(h.trace_distance_to_mm >= eps)
            if n:
                def recording(i, hist, _s=strategy):
                    m = _s(i, hist)
                    used_map[id(m)] = m
                    return m
                history = tuple(run_strategy(recording, h.state, n, seed=(seed, s, 1)))
            else:
                history = ()
            z_rows.append(z)
            hist_keys.append(history)
        index = {}
        hist_ids = np.array([index.setdefault(k, len(index)) for k in hist_keys])
        z_rows = np.array(z_rows)
        mi = np.array([_plugin_mi(z_rows[:, i].astype(int), hist_ids, len(index), miller_madow)
                       for i in range(ell)])
        used = [as_product_povm(m) for m in used_map.values()]
        pr_not_good = float(1 - np.mean(good))
        extra.update(samples=budget, miller_madow=miller_madow, distinct_histories=len(index))
    else:
        raise ValueError(f"unknown mode {mode!r}")

    spectral = max((spectral_quantity(m, letters) for m in used), default=0.0)
    envelope = weight_bound(params.n_qubits, params.min_weight)
    first = 8 * n * c ** 2 * eps ** 2 / ell ** 2
    rhs = first * spectral + 16 * n * c ** 2 * eps ** 2 * pr_not_good
    report = BoundReport(
        "average_mi_upper", float(np.mean(mi)), rhs, relation="le", atol=1e-12,
        terms={"spectral_sup_used": spectral, "spectral_envelope": envelope,
               "first_term": first * spectral,
               "second_term": 16 * n * c ** 2 * eps ** 2 * pr_not_good,
               "pr_not_good": pr_not_good,
               "rhs_envelope": first * envelope + 16 * n * c ** 2 * eps ** 2 * pr_not_good,
               # second term without the factor n, as it appears in the final chain
               "rhs_chain_normalization": first * spectral + 16 * c ** 2 * eps ** 2 * pr_not_good})
    return MIExperimentResult(mi, report, mode, pr_not_good, spectral, extra)
