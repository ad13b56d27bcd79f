from multiprocessing.pool import ThreadPool
import logging
import numpy as np

from .evolution import CoupledState, integrate_window
from .state import collapse_q1, negativity, population
from .utils import Profiler


LOGGER = logging.getLogger(__name__)
# fixed so the reduction order never depends on the worker count
ENSEMBLE_CHUNK = 64


TRAJECTORY_DTYPE = np.dtype(
    [('t', float),
     ('p1', float),
     ('p2', float),
     ('r', float),
     ('negativity', float),
     ('s_c', int),
     ('meas', np.bool_)],
    align=True
)


ENSEMBLE_DTYPE = np.dtype(
    [('t', float),
     ('p1', float),
     ('p2', float),
     ('r', float),
     ('p1_stderr', float)],
    align=True
)


class TrajectoryConfig:
    def __init__(self, t_m=30., n_traj=1, master_seed=0, dt=0.001, t_end=300.,
                 sample_every=100, workers=None):
        """Settings of the measurement-based protocol.

        Parameters
        ----------
        t_m : float, optional
            Time between projective measurements of qubit 1. Must be a whole
            number of steps.
        n_traj : int, optional
            Ensemble size.
        master_seed : int, optional
            Seed from which every trajectory seed is derived.
        dt : float, optional
            RK4 step between measurements.
        t_end : float, optional
            Horizon. A final partial window runs without a closing measurement.
        sample_every : int, optional
            Number of steps between regular records. Measurement instants
            always get a record.
        workers : int, optional
            Number of worker threads for ensembles, defaults to the CPU count.
        """
        assert dt > 0
        self.dt = float(dt)
        assert t_m >= dt
        self.t_m = float(t_m)
        assert n_traj >= 1
        self.n_traj = int(n_traj)
        assert master_seed >= 0
        self.master_seed = int(master_seed)
        assert t_end >= dt
        self.t_end = float(t_end)
        assert sample_every >= 1
        self.sample_every = int(sample_every)
        assert workers is None or workers >= 1
        self.workers = workers

        self.window_steps = int(round(self.t_m / self.dt))
        if abs(self.window_steps * self.dt - self.t_m) > 1e-9 * self.t_m:
            raise ValueError(f't_m={self.t_m:g} is not a whole number of steps of dt={self.dt:g}')

    def __repr__(self):
        return (f'TrajectoryConfig(t_m={self.t_m!r}, n_traj={self.n_traj}, '
                f'master_seed={self.master_seed}, dt={self.dt!r}, t_end={self.t_end!r}, '
                f'sample_every={self.sample_every})')

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))

    def measurement_steps(self):
        """Steps k * t_m / dt with k >= 1, strictly before the horizon."""
        return list(range(self.window_steps, self.n_steps, self.window_steps))

    def record_steps(self):
        steps = set(range(0, self.n_steps, self.sample_every))
        steps.update(self.measurement_steps())
        steps.add(self.n_steps)
        return sorted(steps)


def sample_outcome(p1, u):
    """Outcome of measuring qubit 1 given a uniform draw `u`; the tie u == p1 gives 0."""
    return 1 if u < p1 else 0


def trajectory_seed(master_seed, index):
    """Derives the 64-bit seed of trajectory `index` from the master seed."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(seq.generate_state(1, np.uint64)[0])


def run_trajectory(initial, params, cfg, seed):
    """Simulates one trajectory of the measurement-based protocol.
    The drive s_c starts at 1, the system evolves for t_m, qubit 1 is measured
    and the outcome sets both the collapsed state and the new s_c.

    Parameters
    ----------
    initial : CoupledState
        Initial state at t = 0.
    params : ModelParams
        Model constants; `params.driver` must be 1 since qubit 1 is measured.
    cfg : TrajectoryConfig
        Protocol settings.
    seed : int
        Seed of the counter-based stream; the k-th draw decides the k-th
        measurement.

    Returns
    -------
    recarray[TRAJECTORY_DTYPE]
        Records on the regular grid plus one flagged record right after each
        measurement.
    """
    if params.driver != 1:
        raise ValueError('The measurement protocol depresses the coupling through qubit 1 only')
    initial.check()
    rng = np.random.Generator(np.random.Philox(seed))
    measurement_steps = set(cfg.measurement_steps())
    steps = cfg.record_steps()
    records = np.recarray(len(steps), TRAJECTORY_DTYPE)

    state = initial
    s_c = 1
    prev = 0
    for i, step in enumerate(steps):
        if step > prev:
            state = integrate_window(state, params, cfg.dt, step - prev, s_c)
            state.t = initial.t + step * cfg.dt
        measured = step in measurement_steps
        if measured:
            s_c = sample_outcome(population(state.rho, 1), rng.random())
            rho, _ = collapse_q1(state.rho, s_c)
            state = CoupledState(rho, state.r, state.t)
        prev = step

        record = records[i]
        record.t = state.t
        record.p1 = population(state.rho, 1)
        record.p2 = population(state.rho, 2)
        record.r = state.r
        record.negativity = negativity(state.rho)
        record.s_c = s_c
        record.meas = measured
    return records


def ensemble_average(initial, params, cfg):
    """Averages `cfg.n_traj` independent trajectories pointwise.

    Trajectory i is seeded with `trajectory_seed(cfg.master_seed, i)`.
    Trajectories run in parallel but sums are accumulated in index order, so
    the output is bit-identical for any number of workers.

    Returns
    -------
    recarray[ENSEMBLE_DTYPE]
        Mean p1, p2 and r, and the standard error of p1, on the shared grid.
    """
    n_records = len(cfg.record_steps())
    sum_p1 = np.zeros(n_records)
    sum_p1_sq = np.zeros(n_records)
    sum_p2 = np.zeros(n_records)
    sum_r = np.zeros(n_records)
    t = None

    def run(index):
        return run_trajectory(initial, params, cfg, trajectory_seed(cfg.master_seed, index))

    LOGGER.info('Running ensemble of %d trajectories...', cfg.n_traj)
    with ThreadPool(cfg.workers) as pool:
        for start in range(0, cfg.n_traj, ENSEMBLE_CHUNK):
            indices = range(start, min(start + ENSEMBLE_CHUNK, cfg.n_traj))
            with Profiler('ensemble_chunk'):
                chunk = pool.map(run, indices)
            for records in chunk:
                sum_p1 += records.p1
                sum_p1_sq += records.p1 * records.p1
                sum_p2 += records.p2
                sum_r += records.r
                t = records.t
            LOGGER.debug('Finished %d/%d trajectories', indices.stop, cfg.n_traj)

    n = cfg.n_traj
    result = np.recarray(n_records, ENSEMBLE_DTYPE)
    result.t = t
    result.p1 = sum_p1 / n
    result.p2 = sum_p2 / n
    result.r = sum_r / n
    if n > 1:
        var = np.maximum(sum_p1_sq - sum_p1 * sum_p1 / n, 0.) / (n - 1)
        result.p1_stderr = np.sqrt(var / n)
    else:
        result.p1_stderr = 0.
    return result
