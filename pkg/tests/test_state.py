import numpy as np
import pytest
import scipy.linalg

from qsynapse.errors import InvariantViolation, ZeroProbabilityOutcome
from qsynapse.state import (BasisLabel, basis_state, check_density_matrix, collapse_q1, negativity,
                            partial_transpose_q1, population, pure_state, purity)


def reference_negativity(rho):
    pt = rho.reshape(2, 2, 2, 2).transpose(2, 1, 0, 3).reshape(4, 4)
    eigvals = scipy.linalg.eigvalsh(pt)
    return -eigvals[eigvals < 0].sum()


def test_basis_labels():
    assert BasisLabel.parse('01') is BasisLabel.GE
    assert BasisLabel.parse('10') is BasisLabel.EG
    assert (BasisLabel.EG.b1, BasisLabel.EG.b2) == (1, 0)
    assert str(BasisLabel.EE) == '11'
    for text in ('2', '012', 'ab', ''):
        with pytest.raises(ValueError):
            BasisLabel.parse(text)


@pytest.mark.parametrize('label, p1, p2', [('00', 0., 0.), ('01', 0., 1.), ('10', 1., 0.), ('11', 1., 1.)])
def test_basis_state_populations(label, p1, p2):
    rho = basis_state(label)
    assert population(rho, 1) == p1
    assert population(rho, 2) == p2
    assert negativity(rho) == 0.
    check_density_matrix(rho)


def test_population_rejects_bad_qubit():
    with pytest.raises(ValueError):
        population(basis_state('01'), 3)


def test_population_clamps_rounding():
    rho = basis_state('10')
    rho[2, 2] += 1e-12
    assert population(rho, 1) == 1.


def test_purity():
    assert purity(basis_state('11')) == pytest.approx(1.)
    assert purity(np.eye(4) / 4) == pytest.approx(0.25)


def test_partial_transpose_matches_reshape():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    expected = a.reshape(2, 2, 2, 2).transpose(2, 1, 0, 3).reshape(4, 4)
    np.testing.assert_array_equal(partial_transpose_q1(a), expected)


def test_bell_state_is_maximally_entangled(bell_state):
    assert negativity(bell_state) == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(partial_transpose_q1(bell_state))),
                               [-0.5, 0.5, 0.5, 0.5], atol=1e-12)


def test_maximally_mixed_state_is_separable():
    assert negativity(np.eye(4) / 4) == pytest.approx(0., abs=1e-12)


def test_werner_mixture(bell_state):
    rho = 0.5 * bell_state + 0.5 * np.eye(4) / 4
    assert negativity(rho) == pytest.approx(0.125, abs=1e-12)


def test_single_excitation_superposition():
    theta = 0.3
    rho = pure_state([0, np.cos(theta), -1j * np.sin(theta), 0])
    assert negativity(rho) == pytest.approx(abs(np.sin(2 * theta)) / 2, abs=1e-12)


@pytest.mark.parametrize('seed', range(10))
def test_negativity_matches_reference(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    assert negativity(rho) == pytest.approx(reference_negativity(rho), abs=1e-10)


def test_negativity_tolerates_admissible_asymmetry():
    rho = np.diag([0., 0.5, 0.5, 0.]).astype(np.complex128)
    rho[1, 2] = 0.25 + 5e-10j
    rho[2, 1] = 0.25
    check_density_matrix(rho)
    assert negativity(rho) == pytest.approx(0.25, abs=1e-9)


@pytest.mark.parametrize('qubit', [1, 2])
def test_negativity_is_invariant_under_local_phases(qubit, bell_state):
    rng = np.random.default_rng(5)
    phase = np.diag([1., np.exp(0.7j)])
    u = np.kron(phase, np.eye(2)) if qubit == 1 else np.kron(np.eye(2), phase)
    states = [bell_state]
    for _ in range(5):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = a @ a.conj().T
        states.append(rho / np.trace(rho).real)
    for rho in states:
        rotated = u @ rho @ u.conj().T
        assert negativity(rotated) == pytest.approx(negativity(rho), abs=1e-12)


def test_negativity_is_bounded():
    rng = np.random.default_rng(11)
    for _ in range(20):
        rho = pure_state(rng.normal(size=4) + 1j * rng.normal(size=4))
        assert 0. <= negativity(rho) <= 0.5 + 1e-12


def test_collapse_bell_state(bell_state):
    rho, prob = collapse_q1(bell_state, 1)
    assert prob == pytest.approx(0.5)
    np.testing.assert_allclose(rho, basis_state('10'), atol=1e-15)
    rho, prob = collapse_q1(bell_state, 0)
    assert prob == pytest.approx(0.5)
    np.testing.assert_allclose(rho, basis_state('01'), atol=1e-15)


def test_collapse_keeps_qubit_2_coherence():
    rho = pure_state([0, 0, 1, 1])
    collapsed, prob = collapse_q1(rho, 1)
    assert prob == pytest.approx(1.)
    np.testing.assert_allclose(collapsed, rho, atol=1e-15)
    check_density_matrix(collapsed)


def test_collapse_zero_probability():
    with pytest.raises(ZeroProbabilityOutcome):
        collapse_q1(basis_state('01'), 1)
    with pytest.raises(ValueError):
        collapse_q1(basis_state('01'), 2)


def test_check_density_matrix_rejects_invalid():
    rho = basis_state('01')
    rho[0, 1] = 0.1
    with pytest.raises(InvariantViolation):
        check_density_matrix(rho)
    with pytest.raises(InvariantViolation):
        check_density_matrix(2 * basis_state('01'))
    with pytest.raises(InvariantViolation, match='negative eigenvalue') as info:
        check_density_matrix(np.diag([1.5, -0.5, 0., 0.]).astype(np.complex128), t=3.)
    assert info.value.t == 3.
    with pytest.raises(InvariantViolation):
        check_density_matrix(np.eye(3) / 3)
