"""
Density matrices of the qubit pair are 4x4 complex128 arrays in the product
basis |00>, |01>, |10>, |11>, the first digit being qubit 1 and 1 meaning
excited, so the basis index is 2 * b1 + b2.
"""
from enum import Enum
import numpy as np
import numba as nb

from .errors import InvariantViolation, ZeroProbabilityOutcome
from .utils.smallmat import dagger, hermitian_eigenvalues, hermitian_deviation, mat_mul, trace


HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-9
PSD_TOL = -1e-8
POPULATION_TOL = 1e-9
MIN_OUTCOME_PROB = 1e-12


class BasisLabel(Enum):
    GG = 0  # |00>
    GE = 1  # |01>
    EG = 2  # |10>
    EE = 3  # |11>

    def __str__(self):
        return f'{self.b1}{self.b2}'

    @property
    def b1(self):
        return self.value >> 1

    @property
    def b2(self):
        return self.value & 1

    @property
    def index(self):
        return self.value

    @classmethod
    def parse(cls, text):
        """Parses labels of the form '01' (qubit 1 first)."""
        text = str(text).strip()
        if len(text) != 2 or any(bit not in '01' for bit in text):
            raise ValueError(f'Invalid basis label: {text!r}')
        return cls(2 * int(text[0]) + int(text[1]))


def basis_state(label):
    """Returns the projector onto a product basis state.

    Parameters
    ----------
    label : BasisLabel or str
        Basis state, e.g. `BasisLabel.GE` or '01'.

    Returns
    -------
    ndarray
        4x4 rank-1 density matrix.
    """
    if not isinstance(label, BasisLabel):
        label = BasisLabel.parse(label)
    rho = np.zeros((4, 4), np.complex128)
    rho[label.index, label.index] = 1.
    return rho


def pure_state(amplitudes):
    """Builds |psi><psi| from 4 amplitudes, normalizing them."""
    psi = np.asarray(amplitudes, dtype=np.complex128)
    assert psi.shape == (4,)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


@nb.njit(cache=True, nogil=True)
def excited_population(rho, qubit):
    if qubit == 1:
        return rho[2, 2].real + rho[3, 3].real
    return rho[1, 1].real + rho[3, 3].real


def population(rho, qubit):
    """Population <sigma_i^+ sigma_i^-> of one qubit.

    Parameters
    ----------
    rho : ndarray
        Density matrix.
    qubit : {1, 2}
        Which qubit.

    Returns
    -------
    float
        Sum of the diagonal entries with that qubit excited. Values within
        `POPULATION_TOL` outside [0, 1] are clamped.
    """
    if qubit not in (1, 2):
        raise ValueError(f'Invalid qubit: {qubit}')
    pop = excited_population(rho, qubit)
    if -POPULATION_TOL <= pop < 0.:
        return 0.
    if 1. < pop <= 1. + POPULATION_TOL:
        return 1.
    return pop


def purity(rho):
    """Returns tr(rho^2)."""
    return trace(mat_mul(rho, rho)).real


@nb.njit(cache=True, nogil=True)
def _partial_transpose_q1(rho):
    out = np.empty((4, 4), np.complex128)
    for b1 in range(2):
        for b2 in range(2):
            for c1 in range(2):
                for c2 in range(2):
                    out[2 * b1 + b2, 2 * c1 + c2] = rho[2 * c1 + b2, 2 * b1 + c2]
    return out


def partial_transpose_q1(rho):
    """Transposes the qubit-1 indices: <b1 b2|rho^T1|c1 c2> = <c1 b2|rho|b1 c2>."""
    return _partial_transpose_q1(np.asarray(rho, dtype=np.complex128))


def negativity(rho):
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose.
    Zero for separable states and 0.5 for maximally entangled ones.
    """
    pt = partial_transpose_q1(rho)
    # rho is only Hermitian to HERMITIAN_TOL, looser than the eigensolver accepts
    eigvals = hermitian_eigenvalues(0.5 * (pt + dagger(pt)))
    return float(-eigvals[eigvals < 0.].sum())


def collapse_q1(rho, outcome):
    """Projective measurement of qubit 1 in the {|0>, |1>} basis.

    Parameters
    ----------
    rho : ndarray
        Density matrix before the measurement.
    outcome : {0, 1}
        Measured value of qubit 1.

    Returns
    -------
    ndarray, float
        Post-measurement state P rho P / p and the outcome probability p.

    Raises
    ------
    ZeroProbabilityOutcome
        If p does not exceed `MIN_OUTCOME_PROB`.
    """
    if outcome not in (0, 1):
        raise ValueError(f'Invalid outcome: {outcome}')
    # qubit 1 is the leading bit, so each outcome owns a 2x2 diagonal block
    block = slice(2 * outcome, 2 * outcome + 2)
    prob = float(np.trace(rho[block, block]).real)
    if prob <= MIN_OUTCOME_PROB:
        raise ZeroProbabilityOutcome(f'Outcome {outcome} of qubit 1 has probability {prob:.3e}')
    collapsed = np.zeros((4, 4), np.complex128)
    collapsed[block, block] = rho[block, block] / prob
    return collapsed, prob


def check_density_matrix(rho, t=None):
    """Raises `InvariantViolation` unless rho is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise InvariantViolation(f'Density matrix must be 4x4, got {rho.shape}', t)
    if not np.all(np.isfinite(rho)):
        raise InvariantViolation('Density matrix has non-finite entries', t)
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    dev = hermitian_deviation(rho)
    if dev >= HERMITIAN_TOL:
        raise InvariantViolation(f'Density matrix is not Hermitian (deviation {dev:.3e})', t)
    tr = trace(rho).real
    if abs(tr - 1.) >= TRACE_TOL:
        raise InvariantViolation(f'Density matrix trace is {tr!r}', t)
    # symmetrize so tolerance-level asymmetry does not trip the eigensolver
    min_eig = hermitian_eigenvalues(0.5 * (rho + dagger(rho)))[0]
    if min_eig <= PSD_TOL:
        raise InvariantViolation(f'Density matrix has negative eigenvalue {min_eig:.3e}', t)
