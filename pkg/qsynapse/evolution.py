from multiprocessing.pool import ThreadPool
import logging
import numpy as np
import numba as nb

from .errors import InvariantViolation
from .state import BasisLabel, basis_state, check_density_matrix, excited_population
from .state import negativity, population
from .synapse import SynapseParams, depression_rate
from .utils import Profiler
from .utils.smallmat import commutator, trace


LOGGER = logging.getLogger(__name__)
TRACE_DRIFT_TOL = 1e-6
R_TOL = 1e-12
# factor multiplying eps_i sigma^z_i in the Hamiltonian
SPLITTINGS = {'literal': 1., 'half': 0.5}


SERIES_DTYPE = np.dtype(
    [('t', float),
     ('p1', float),
     ('p2', float),
     ('r', float),
     ('negativity', float)],
    align=True
)


SWEEP_DTYPE = np.dtype(
    [('tau', float),
     ('omega', float),
     ('r_min', float),
     ('r_min_ratio', float)],
    align=True
)


class ModelParams:
    def __init__(self, eps1=0., eps2=0., omega=0.05, synapse=None, driver=1, splitting='literal'):
        """Constants of the depressed two-qubit XY model (hbar = 1).

        Parameters
        ----------
        eps1 : float, optional
            On-site energy of qubit 1.
        eps2 : float, optional
            On-site energy of qubit 2.
        omega : float, optional
            Interaction strength; the coupling is (omega / 2) r(t).
        synapse : SynapseParams, optional
            Depression constants.
        driver : {1, 2}, optional
            Qubit whose population depresses the coupling in the
            deterministic model.
        splitting : {'literal', 'half'}, optional
            On-site term eps_i sigma^z_i ('literal') or eps_i sigma^z_i / 2
            ('half').
        """
        self.eps1 = float(eps1)
        self.eps2 = float(eps2)
        assert omega >= 0
        self.omega = float(omega)
        self.synapse = SynapseParams() if synapse is None else synapse
        assert driver in (1, 2)
        self.driver = int(driver)
        if splitting not in SPLITTINGS:
            raise ValueError(f'Unknown splitting convention: {splitting!r}')
        self.splitting = splitting

    def __repr__(self):
        return (f'ModelParams(eps1={self.eps1!r}, eps2={self.eps2!r}, omega={self.omega!r}, '
                f'synapse={self.synapse!r}, driver={self.driver}, splitting={self.splitting!r})')

    def replace(self, **kwargs):
        """Copy with some fields changed; `U` and `tau` reach into `synapse`."""
        synapse = SynapseParams(kwargs.pop('U', self.synapse.U), kwargs.pop('tau', self.synapse.tau))
        fields = dict(eps1=self.eps1, eps2=self.eps2, omega=self.omega,
                      synapse=synapse, driver=self.driver, splitting=self.splitting)
        fields.update(kwargs)
        return ModelParams(**fields)

    @property
    def level_shifts(self):
        """Coefficients of sigma^z_1 and sigma^z_2 after the splitting convention."""
        scale = SPLITTINGS[self.splitting]
        return scale * self.eps1, scale * self.eps2

    @property
    def kernel_args(self):
        return (*self.level_shifts, self.omega, self.synapse.U, self.synapse.tau, self.driver)


class IntegratorConfig:
    def __init__(self, dt=0.001, t_end=100., sample_every=100):
        """Fixed-step RK4 settings.

        Parameters
        ----------
        dt : float, optional
            Time step in natural units.
        t_end : float, optional
            Horizon, rounded to a whole number of steps.
        sample_every : int, optional
            Number of steps between output records.
        """
        assert dt > 0
        self.dt = float(dt)
        assert t_end >= dt
        self.t_end = float(t_end)
        assert sample_every >= 1
        self.sample_every = int(sample_every)

    def __repr__(self):
        return (f'IntegratorConfig(dt={self.dt!r}, t_end={self.t_end!r}, '
                f'sample_every={self.sample_every})')

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))

    def sample_steps(self):
        """Step indices that get a record, always including 0 and the last step."""
        steps = list(range(0, self.n_steps, self.sample_every))
        steps.append(self.n_steps)
        return steps


class CoupledState:
    def __init__(self, rho, r=1., t=0.):
        """Joint state (rho, r) of the qubit pair and the synapse at time t."""
        self.rho = np.array(rho, dtype=np.complex128)
        self.r = float(r)
        self.t = float(t)

    def __repr__(self):
        return f'CoupledState(t={self.t:g}, r={self.r:g}, p1={population(self.rho, 1):g})'

    @classmethod
    def from_label(cls, label, r=1.):
        return cls(basis_state(label), r)

    def copy(self):
        return CoupledState(self.rho, self.r, self.t)

    def check(self):
        """Raises `InvariantViolation` if rho is not a density matrix or r leaves (0, 1]."""
        check_density_matrix(self.rho, self.t)
        if not 0. < self.r <= 1. + R_TOL:
            raise InvariantViolation(f'Synapse variable left (0, 1]: r={self.r!r}', self.t)


def build_hamiltonian(params, r):
    """Hamiltonian eps1 sz1 + eps2 sz2 + (omega / 2) r (s1+ s2- + s1- s2+).
    With `params.splitting == 'half'` the on-site terms are halved.

    Parameters
    ----------
    params : ModelParams
        Model constants.
    r : float
        Current synapse value.

    Returns
    -------
    ndarray
        4x4 Hermitian matrix in the |00>, |01>, |10>, |11> basis.
    """
    eps1, eps2 = params.level_shifts
    return _hamiltonian(eps1, eps2, params.omega, float(r))


def rhs_coupled(state, params, s_c=None):
    """Right-hand side of the coupled von Neumann and depression equations,
    evaluated with the dense Hamiltonian.

    Parameters
    ----------
    state : CoupledState
        Current state.
    params : ModelParams
        Model constants.
    s_c : {0, 1}, optional
        Binary measurement drive. When omitted the driver qubit's population
        depresses the coupling.

    Returns
    -------
    ndarray, float
        d rho / dt and dr / dt.
    """
    drive = _drive(s_c)
    if drive < 0.:
        drive = excited_population(state.rho, params.driver)
    drho = -1j * commutator(build_hamiltonian(params, state.r), state.rho)
    return drho, depression_rate(state.r, drive, params.synapse.U, params.synapse.tau)


def rk4_step(state, params, dt, s_c=None):
    """Advances the joint (rho, r) vector by one classical RK4 step.

    Raises
    ------
    InvariantViolation
        If the trace of rho drifts by more than `TRACE_DRIFT_TOL`.
    """
    return integrate_window(state, params, dt, 1, s_c)


def integrate_window(state, params, dt, n_steps, s_c=None):
    """Runs `n_steps` RK4 steps without sampling and returns the new state.

    Raises
    ------
    InvariantViolation
        With the time of the first step whose trace drifted.
    """
    rho, r, failed = _integrate(state.rho, state.r, *params.kernel_args, _drive(s_c),
                                dt, n_steps, TRACE_DRIFT_TOL)
    if failed >= 0:
        t_fail = state.t + (failed + 1) * dt
        raise InvariantViolation(f'Trace drifted to {trace(rho).real!r}; time step too large?',
                                 t_fail)
    return CoupledState(rho, r, state.t + n_steps * dt)


def evolve(initial, params, cfg):
    """Integrates the deterministic model and samples it.

    Parameters
    ----------
    initial : CoupledState
        Initial state, usually at t = 0.
    params : ModelParams
        Model constants.
    cfg : IntegratorConfig
        Step size, horizon and decimation.

    Returns
    -------
    recarray[SERIES_DTYPE]
        One record every `cfg.sample_every` steps, including t = 0 and the
        final step.
    """
    initial.check()
    steps = cfg.sample_steps()
    records = np.recarray(len(steps), SERIES_DTYPE)
    state = initial
    prev = 0
    for i, step in enumerate(steps):
        if step > prev:
            with Profiler('integrate'):
                state = integrate_window(state, params, cfg.dt, step - prev)
            # time from the step counter so long runs do not accumulate rounding
            state.t = initial.t + step * cfg.dt
            if not 0. < state.r <= 1. + R_TOL:
                raise InvariantViolation(f'Synapse variable left (0, 1]: r={state.r!r}', state.t)
        prev = step
        _fill_record(records[i], state)
    return records


def default_transient_window(tau, omega):
    """Start-up time to discard before reading r_min: 5 tau plus one Rabi period."""
    window = 5. * tau
    if omega > 0:
        window += 2. * np.pi / omega
    return window


def r_min_sweep(omega_values, tau_values, p_base, cfg, transient_window=None, r0=1.,
                workers=None, initial=BasisLabel.EG):
    """Minimum of r(t) after the transient, normalized by its omega = 0 value.

    Parameters
    ----------
    omega_values : sequence
        Interaction strengths; must contain 0.
    tau_values : sequence
        Recovery times.
    p_base : ModelParams
        Source of eps1, eps2, U and driver.
    cfg : IntegratorConfig
        Integrator settings shared by all cells.
    transient_window : float, optional
        Fixed time to discard; defaults to `default_transient_window`.
    r0 : float, optional
        Initial synapse value.
    workers : int, optional
        Number of worker threads, defaults to the CPU count.
    initial : BasisLabel, optional
        Basis state every cell starts from.

    Returns
    -------
    recarray[SWEEP_DTYPE]
        One row per (tau, omega), sorted by tau then omega.
    """
    omega_values = sorted({float(omega) for omega in omega_values})
    tau_values = sorted({float(tau) for tau in tau_values})
    if 0. not in omega_values:
        raise ValueError('omega_values must include 0 to normalize r_min')
    cells = [(tau, omega) for tau in tau_values for omega in omega_values]

    def run_cell(cell):
        tau, omega = cell
        params = p_base.replace(omega=omega, tau=tau)
        window = default_transient_window(tau, omega) if transient_window is None \
            else transient_window
        initial_state = CoupledState(basis_state(initial), r0)
        records = evolve(initial_state, params, cfg)
        kept = records.t >= window
        if not kept.any():
            raise ValueError(f'Transient window {window:g} covers the whole run '
                             f'(t_end={cfg.t_end:g}) for tau={tau:g}, omega={omega:g}')
        if kept.sum() < 0.1 * len(records):
            LOGGER.warning('Transient window keeps only %d of %d samples for tau=%g, omega=%g',
                           kept.sum(), len(records), tau, omega)
        r_min = float(records.r[kept].min())
        LOGGER.debug('tau=%g omega=%g r_min=%.6g', tau, omega, r_min)
        return r_min

    LOGGER.info('Sweeping %d (tau, omega) cells...', len(cells))
    with ThreadPool(workers) as pool:
        r_mins = dict(zip(cells, pool.map(run_cell, cells)))

    table = np.recarray(len(cells), SWEEP_DTYPE)
    for row, (tau, omega) in zip(table, cells):
        row.tau = tau
        row.omega = omega
        row.r_min = r_mins[tau, omega]
        row.r_min_ratio = r_mins[tau, omega] / r_mins[tau, 0.]
    return table


def _drive(s_c):
    if s_c is None:
        return -1.
    if s_c not in (0, 1):
        raise ValueError(f'Invalid measurement outcome: {s_c}')
    return float(s_c)


def _fill_record(record, state):
    record.t = state.t
    record.p1 = population(state.rho, 1)
    record.p2 = population(state.rho, 2)
    record.r = state.r
    with Profiler('negativity'):
        record.negativity = negativity(state.rho)


@nb.njit(cache=True, nogil=True)
def _level_energies(eps1, eps2):
    energies = np.empty(4)
    for b1 in range(2):
        for b2 in range(2):
            energies[2 * b1 + b2] = eps1 * (2 * b1 - 1) + eps2 * (2 * b2 - 1)
    return energies


@nb.njit(cache=True, nogil=True)
def _hamiltonian(eps1, eps2, omega, r):
    h = np.zeros((4, 4), np.complex128)
    energies = _level_energies(eps1, eps2)
    for i in range(4):
        h[i, i] = energies[i]
    # exchange term couples |01> and |10> only
    h[1, 2] = 0.5 * omega * r
    h[2, 1] = 0.5 * omega * r
    return h


@nb.njit(cache=True, nogil=True)
def _von_neumann(rho, energies, g, out):
    # -i [H, rho] for H = diag(energies) + g (|01><10| + |10><01|)
    for i in range(4):
        for j in range(4):
            c = (energies[i] - energies[j]) * rho[i, j]
            if i == 1:
                c += g * rho[2, j]
            elif i == 2:
                c += g * rho[1, j]
            if j == 1:
                c -= g * rho[i, 2]
            elif j == 2:
                c -= g * rho[i, 1]
            out[i, j] = -1j * c


@nb.njit(cache=True, nogil=True)
def _rhs(rho, r, energies, half_omega, U, tau, driver, drive, out):
    _von_neumann(rho, energies, half_omega * r, out)
    if drive < 0.:
        drive = excited_population(rho, driver)
    return depression_rate(r, drive, U, tau)


@nb.njit(cache=True, nogil=True)
def _stage(rho, h, k, out):
    for i in range(4):
        for j in range(4):
            out[i, j] = rho[i, j] + h * k[i, j]


@nb.njit(cache=True, nogil=True)
def _rk4_step(rho, r, energies, half_omega, U, tau, driver, drive, dt, k1, k2, k3, k4, tmp):
    # updates rho in place; stage populations come from the stage rho,
    # so (rho, r) advance as one vector
    l1 = _rhs(rho, r, energies, half_omega, U, tau, driver, drive, k1)
    _stage(rho, 0.5 * dt, k1, tmp)
    l2 = _rhs(tmp, r + 0.5 * dt * l1, energies, half_omega, U, tau, driver, drive, k2)
    _stage(rho, 0.5 * dt, k2, tmp)
    l3 = _rhs(tmp, r + 0.5 * dt * l2, energies, half_omega, U, tau, driver, drive, k3)
    _stage(rho, dt, k3, tmp)
    l4 = _rhs(tmp, r + dt * l3, energies, half_omega, U, tau, driver, drive, k4)
    for i in range(4):
        for j in range(4):
            rho[i, j] += (dt / 6.) * (k1[i, j] + 2. * k2[i, j] + 2. * k3[i, j] + k4[i, j])
    for i in range(4):
        rho[i, i] = rho[i, i].real
        for j in range(i + 1, 4):
            avg = 0.5 * (rho[i, j] + rho[j, i].conjugate())
            rho[i, j] = avg
            rho[j, i] = avg.conjugate()
    return r + (dt / 6.) * (l1 + 2. * l2 + 2. * l3 + l4)


@nb.njit(cache=True, nogil=True)
def _integrate(rho, r, eps1, eps2, omega, U, tau, driver, drive, dt, n_steps, trace_tol):
    rho = rho.copy()
    energies = _level_energies(eps1, eps2)
    half_omega = 0.5 * omega
    k1 = np.empty((4, 4), np.complex128)
    k2 = np.empty((4, 4), np.complex128)
    k3 = np.empty((4, 4), np.complex128)
    k4 = np.empty((4, 4), np.complex128)
    tmp = np.empty((4, 4), np.complex128)
    for k in range(n_steps):
        r = _rk4_step(rho, r, energies, half_omega, U, tau, driver, drive, dt, k1, k2, k3, k4, tmp)
        if not abs(trace(rho).real - 1.) <= trace_tol:
            return rho, r, k
    return rho, r, -1
