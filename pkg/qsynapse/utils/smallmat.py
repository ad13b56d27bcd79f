import numpy as np
import numba as nb

from ..errors import NotHermitian


HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 50


@nb.njit(cache=True, nogil=True)
def mat_mul(a, b):
    """Numba product of two 4x4 complex matrices."""
    out = np.zeros((4, 4), np.complex128)
    for i in range(4):
        for k in range(4):
            aik = a[i, k]
            for j in range(4):
                out[i, j] += aik * b[k, j]
    return out


@nb.njit(cache=True, nogil=True)
def commutator(a, b):
    """Returns ab - ba."""
    return mat_mul(a, b) - mat_mul(b, a)


@nb.njit(cache=True, nogil=True)
def dagger(a):
    out = np.empty((4, 4), np.complex128)
    for i in range(4):
        for j in range(4):
            out[i, j] = a[j, i].conjugate()
    return out


@nb.njit(cache=True, nogil=True)
def trace(a):
    return a[0, 0] + a[1, 1] + a[2, 2] + a[3, 3]


@nb.njit(cache=True, nogil=True)
def hermitian_deviation(a):
    """Max entry of |a - a^H|."""
    dev = 0.
    for i in range(4):
        for j in range(i, 4):
            d = abs(a[i, j] - a[j, i].conjugate())
            if d > dev:
                dev = d
    return dev


@nb.njit(cache=True, nogil=True)
def _off_norm(a):
    norm = 0.
    for i in range(4):
        for j in range(4):
            if i != j:
                norm += a[i, j].real**2 + a[i, j].imag**2
    return np.sqrt(norm)


@nb.njit(cache=True, nogil=True)
def _jacobi_eigenvalues(a, tol, max_sweeps):
    # cyclic sweeps of complex Jacobi rotations G = D P, where D removes the
    # phase of a[p, q] and P is the real rotation annihilating it
    for _ in range(max_sweeps):
        if _off_norm(a) < tol:
            break
        for p in range(3):
            for q in range(p + 1, 4):
                mag = abs(a[p, q])
                if mag == 0.:
                    continue
                phase = a[p, q] / mag
                cphase = phase.conjugate()
                theta = (a[q, q].real - a[p, p].real) / (2. * mag)
                t = 1. / (abs(theta) + np.sqrt(theta * theta + 1.))
                if theta < 0.:
                    t = -t
                c = 1. / np.sqrt(t * t + 1.)
                s = t * c
                # A <- A G
                for i in range(4):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = c * aip - s * cphase * aiq
                    a[i, q] = s * aip + c * cphase * aiq
                # A <- G^H A
                for j in range(4):
                    apj = a[p, j]
                    aqj = a[q, j]
                    a[p, j] = c * apj - s * phase * aqj
                    a[q, j] = s * apj + c * phase * aqj
                a[p, q] = 0.
                a[q, p] = 0.
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    eigvals = np.empty(4)
    for i in range(4):
        eigvals[i] = a[i, i].real
    return np.sort(eigvals)


def hermitian_eigenvalues(m):
    """Computes the eigenvalues of a 4x4 Hermitian matrix with cyclic Jacobi rotations.

    Parameters
    ----------
    m : array_like
        A 4x4 complex matrix, Hermitian within `HERMITIAN_TOL`.

    Returns
    -------
    ndarray
        The 4 real eigenvalues in ascending order.

    Raises
    ------
    NotHermitian
        If the largest entry of |m - m^H| exceeds `HERMITIAN_TOL`.
    """
    m = np.array(m, dtype=np.complex128)
    if m.shape != (4, 4):
        raise ValueError(f'Expected a 4x4 matrix, got shape {m.shape}')
    dev = hermitian_deviation(m)
    if not dev <= HERMITIAN_TOL:
        raise NotHermitian(f'Matrix deviates from its adjoint by {dev:.3e}')
    return _jacobi_eigenvalues(m, JACOBI_TOL, JACOBI_MAX_SWEEPS)
