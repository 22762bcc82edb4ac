import json
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtomo.measurement import (InvalidPovmError, PauliBasisMeasurement, ProductPovm,
                               SingleQubitPovm, basis_distribution, constant_strategy,
                               flip_strategy, load_povm, outcome_distribution, pauli_bases,
                               povm_element_matrix, povm_elements, povm_from_dict, povm_to_dict,
                               product_distribution, run_strategy, sample_outcomes)
from qtomo.mic_info.channel import random_product_povm
from qtomo.pauli import PauliString, all_paulis
from qtomo.state import basis_state, maximally_mixed, random_state

SIGMA = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
         "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
seeds = st.integers(0, 2 ** 32 - 1)


def oracle_basis_elements(label):
    """Eigenprojectors (I + s sigma)/2 tensored in row-major sign order (+ first)."""
    per_qubit = [[(np.eye(2) + s * SIGMA[c]) / 2 for s in (1, -1)] for c in label]
    out = [np.ones((1, 1))]
    for projs in per_qubit:
        out = [np.kron(a, b) for a in out for b in projs]
    return np.array(out)


def test_element_examples():
    z = PauliBasisMeasurement.from_label("Z")
    assert np.allclose(povm_element_matrix(z, (0,)), np.diag([1, 0]))
    assert np.allclose(povm_element_matrix(ProductPovm((SingleQubitPovm.trivial(),)), (0,)),
                       np.eye(2))
    assert np.allclose(povm_element_matrix(PauliBasisMeasurement.from_label("ZZ"), (0, 0)),
                       np.diag([1, 0, 0, 0]))


def test_element_invalid_outcome():
    with pytest.raises(IndexError):
        povm_element_matrix(PauliBasisMeasurement.from_label("Z"), (2,))


@pytest.mark.parametrize("label", ["X", "Y", "Z", "XY", "ZYX"])
def test_basis_elements_match_oracle(label):
    assert np.allclose(povm_elements(PauliBasisMeasurement.from_label(label)),
                       oracle_basis_elements(label))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), seeds)
def test_random_povm_complete_and_psd(n, seed):
    m = random_product_povm(n, np.random.default_rng(seed))
    elements = povm_elements(m)
    assert np.allclose(elements.sum(axis=0), np.eye(2 ** n), atol=1e-10)
    assert min(np.linalg.eigvalsh(e).min() for e in elements) >= -1e-10


def test_distribution_examples():
    for b in pauli_bases(2):
        assert np.allclose(outcome_distribution(b, maximally_mixed(2)), 0.25)
    zero = basis_state(1, 0)
    assert np.allclose(outcome_distribution(PauliBasisMeasurement.from_label("Z"), zero), [1, 0])
    assert np.allclose(outcome_distribution(PauliBasisMeasurement.from_label("X"), zero),
                       [0.5, 0.5])


def test_distribution_dimension_mismatch():
    with pytest.raises(ValueError):
        outcome_distribution(PauliBasisMeasurement.from_label("ZZ"), maximally_mixed(1))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), seeds)
def test_rotation_and_element_routes_agree(n, seed):
    rng = np.random.default_rng(seed)
    rho = random_state(n, rng)
    label = "".join(rng.choice(list("XYZ"), n))
    b = PauliBasisMeasurement.from_label(label)
    rot = basis_distribution(b, rho)
    direct = np.real(np.einsum("kab,ba->k", oracle_basis_elements(label), rho.data))
    assert np.allclose(rot, direct, atol=1e-10)
    assert np.allclose(product_distribution(b.to_povm(), rho), direct, atol=1e-10)
    m = random_product_povm(n, rng)
    direct = np.real(np.einsum("kab,ba->k", povm_elements(m), rho.data))
    assert np.allclose(outcome_distribution(m, rho), direct, atol=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_sign_products_recover_matching_paulis(n):
    rho = random_state(n, 11)
    for b in pauli_bases(n):
        p = outcome_distribution(b, rho)
        outcomes = np.array(np.unravel_index(np.arange(2 ** n), b.shape)).T
        signs = 1 - 2 * outcomes
        for q in all_paulis(n):
            if q.weight == 0:
                continue
            value = p @ np.prod(signs[:, list(q.support)], axis=1)
            matches = all(q.letter(i) in ("I", b.label[i]) for i in range(n))
            q_mat = reduce(np.kron, [SIGMA[c] for c in q.label])
            if matches:
                assert np.isclose(value, np.trace(rho.data @ q_mat).real)
            else:
                # the basis element traces against q vanish, so the data carry no information
                assert np.allclose(np.einsum("kab,ba->k", oracle_basis_elements(b.label), q_mat),
                                   0)


def test_sample_examples():
    z = PauliBasisMeasurement.from_label("Z")
    assert sample_outcomes(z, maximally_mixed(1), 0, seed=1).shape == (0, 1)
    draws = sample_outcomes(z, maximally_mixed(1), 100_000, seed=3)
    assert abs(np.mean(draws[:, 0] == 0) - 0.5) <= 0.01
    assert np.array_equal(sample_outcomes(z, maximally_mixed(1), 50, seed=9),
                          sample_outcomes(z, maximally_mixed(1), 50, seed=9))


def test_constant_strategy_matches_sampling_distribution():
    rho = random_state(1, 4)
    b = PauliBasisMeasurement.from_label("X")
    counts = np.zeros(2)
    for s in range(4000):
        counts[run_strategy(constant_strategy(b), rho, 1, seed=s)[0][0]] += 1
    p = outcome_distribution(b, rho)
    assert abs(counts[0] / 4000 - p[0]) < 4 * np.sqrt(p[0] * p[1] / 4000)


def test_flip_strategy_basis_frequencies():
    rho = maximally_mixed(1)
    strategy = flip_strategy()
    used_x = 0
    for s in range(10_000):
        history = run_strategy(strategy, rho, 2, seed=s)
        used_x += strategy(1, tuple(history[:1])).label == "X"
    assert abs(used_x / 10_000 - 0.5) <= 0.02


def test_run_strategy_errors():
    with pytest.raises(ValueError):
        run_strategy(constant_strategy(PauliBasisMeasurement.from_label("Z")),
                     maximally_mixed(1), 0)
    bad = constant_strategy(PauliBasisMeasurement.from_label("ZZ"))
    with pytest.raises(InvalidPovmError, match="copy 0"):
        run_strategy(bad, maximally_mixed(1), 1)


@pytest.mark.parametrize("alphas,betas", [
    ([0.5, 0.5], [[0, 0, 1.1], [0, 0, -1.1]]),
    ([0.6, 0.6], [[0, 0, 1], [0, 0, -1]]),
    ([0.5, 0.5], [[0, 0, 1], [0, 0, 0.5]]),
    ([1.2, -0.2], [[0, 0, 0], [0, 0, 0]]),
])
def test_invalid_povm_rejected(alphas, betas):
    with pytest.raises(InvalidPovmError):
        SingleQubitPovm(alphas, betas)


def test_basis_must_be_full_weight():
    with pytest.raises(InvalidPovmError):
        PauliBasisMeasurement(PauliString.from_label("XI"))


def test_uniform_pauli_povm_is_mixture_of_bases():
    u = SingleQubitPovm.uniform_pauli()
    assert u.n_outcomes == 6
    expected = np.concatenate([oracle_basis_elements(c) / 3 for c in "XYZ"])
    assert np.allclose(u.elements(), expected)


def test_json_round_trip(tmp_path):
    m = random_product_povm(2, np.random.default_rng(0))
    back = povm_from_dict(json.loads(json.dumps(povm_to_dict(m))))
    assert np.allclose(povm_elements(back), povm_elements(m))
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"basis": "XZY"}))
    assert load_povm(path).label == "XZY"


def test_pauli_bases_order():
    assert [b.label for b in pauli_bases(1)] == ["X", "Y", "Z"]
    assert len(pauli_bases(3)) == 27 and pauli_bases(2)[1].label == "XY"
