import logging
import numpy as np
import numba as nb


LOGGER = logging.getLogger(__name__)


CLASSICAL_DTYPE = np.dtype(
    [('t', float),
     ('r', float)],
    align=True
)


class SynapseParams:
    def __init__(self, U=0.5, tau=10.):
        """Short-term depression constants.

        Parameters
        ----------
        U : float, optional
            Release probability, the fraction of available resources consumed
            per presynaptic event.
        tau : float, optional
            Neurotransmitter recovery time in natural units.
        """
        assert 0 < U <= 1
        self.U = float(U)
        assert tau > 0
        self.tau = float(tau)

    def __repr__(self):
        return f'SynapseParams(U={self.U!r}, tau={self.tau!r})'

    def __eq__(self, other):
        if not isinstance(other, SynapseParams):
            return NotImplemented
        return (self.U, self.tau) == (other.U, other.tau)


@nb.njit(cache=True, nogil=True, inline='always')
def depression_rate(r, drive, U, tau):
    """(1 - r) / tau - U r drive, the right-hand side shared by every STD form."""
    return (1. - r) / tau - U * r * drive


def r_rhs_meanfield(r, pop, params):
    """dr/dt when the coupling is depressed by a qubit population.

    Parameters
    ----------
    r : float
        Available-resource fraction in (0, 1].
    pop : float
        Population <sigma_i^+ sigma_i^-> of the depressing qubit, in [0, 1].
    params : SynapseParams
        Depression constants.
    """
    return depression_rate(r, pop, params.U, params.tau)


def r_rhs_binary(r, s_c, params):
    """dr/dt when the coupling is depressed by the last measurement outcome `s_c`."""
    if s_c not in (0, 1):
        raise ValueError(f'Invalid measurement outcome: {s_c}')
    return depression_rate(r, float(s_c), params.U, params.tau)


def r_stationary(params, f):
    """Stationary resource fraction 1 / (1 + tau U f) for a drive `f` >= 0."""
    assert f >= 0
    return 1. / (1. + params.tau * params.U * f)


def periodic_spike_times(rate, t_end):
    """Regular spike train at `rate`, first spike one period after t = 0."""
    assert rate > 0
    n_spikes = int(np.floor(t_end * rate + 1e-9))
    return np.arange(1, n_spikes + 1) / rate


def poisson_spike_times(rate, t_end, rng):
    """Poisson spike train on (0, t_end] drawn from a numpy `Generator`."""
    assert rate > 0
    times = []
    t = 0.
    # draw in blocks sized to cover the expected count
    block = max(int(rate * t_end * 1.1) + 16, 16)
    while t <= t_end:
        gaps = rng.exponential(1. / rate, block)
        arrivals = t + np.cumsum(gaps)
        times.append(arrivals)
        t = arrivals[-1]
    times = np.concatenate(times)
    return times[times <= t_end]


def simulate_classical_spikes(params, spike_times, r0=1., t_end=100., dt=0.01):
    """Integrates the spike-driven depression dynamics exactly.
    Between spikes r relaxes as 1 - (1 - r) exp(-dt / tau); each spike applies
    r <- r (1 - U) to the left limit r(t_sp-).

    Parameters
    ----------
    params : SynapseParams
        Depression constants.
    spike_times : array_like
        Ascending spike times, >= 0.
    r0 : float, optional
        Initial resource fraction in (0, 1].
    t_end : float, optional
        Horizon.
    dt : float, optional
        Output grid spacing.

    Returns
    -------
    recarray[CLASSICAL_DTYPE], ndarray
        r sampled on the grid k * dt (right limits, so a spike at a grid point
        is already applied) and the pre-spike values r(t_sp-) of every spike
        up to `t_end`.
    """
    spike_times = np.ascontiguousarray(spike_times, dtype=np.float64)
    assert 0 < r0 <= 1
    assert dt > 0 and t_end >= 0
    if len(spike_times) > 0:
        assert spike_times[0] >= 0
        assert np.all(np.diff(spike_times) >= 0), 'spike times must be ascending'

    n_steps = int(round(t_end / dt))
    r_grid, r_pre = _integrate_spikes(spike_times, r0, n_steps, dt, params.U, params.tau)
    series = np.empty(n_steps + 1, CLASSICAL_DTYPE).view(np.recarray)
    series.t = np.arange(n_steps + 1) * dt
    series.r = r_grid
    LOGGER.debug('Integrated %d spikes over %d grid points', len(r_pre), n_steps + 1)
    return series, r_pre


@nb.njit(cache=True, nogil=True)
def _integrate_spikes(spike_times, r0, n_steps, dt, U, tau):
    r_grid = np.empty(n_steps + 1)
    r_pre = np.empty(len(spike_times))
    r = r0
    t = 0.
    j = 0
    for k in range(n_steps + 1):
        t_k = k * dt
        while j < len(spike_times) and spike_times[j] <= t_k:
            t_sp = spike_times[j]
            r = 1. - (1. - r) * np.exp(-(t_sp - t) / tau)
            t = t_sp
            r_pre[j] = r
            r *= 1. - U
            j += 1
        r = 1. - (1. - r) * np.exp(-(t_k - t) / tau)
        t = t_k
        r_grid[k] = r
    return r_grid, r_pre[:j]
