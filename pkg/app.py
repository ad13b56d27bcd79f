#!/usr/bin/env python3

from pathlib import Path
import argparse
import logging
import os
import sys
import numpy as np

import qsynapse
from qsynapse.config import MODES, parse_config
from qsynapse.evolution import SPLITTINGS, CoupledState, evolve, r_min_sweep
from qsynapse.metrics import classical_report, format_metrics, report_metrics
from qsynapse.series import write_series
from qsynapse.synapse import periodic_spike_times, poisson_spike_times, simulate_classical_spikes
from qsynapse.trajectories import ensemble_average, run_trajectory, trajectory_seed
from qsynapse.utils import Profiler


LOGGER = logging.getLogger(qsynapse.__name__)
OUTPUT_DIR_ENV = 'QSYNAPSE_OUTPUT_DIR'

# flag -> (path in the experiment document, modes it applies to or None for all)
FLAG_FIELDS = {
    'eps1': ('model.eps1', None),
    'eps2': ('model.eps2', None),
    'omega': ('model.omega', None),
    'driver': ('model.driver', None),
    'splitting': ('model.splitting', None),
    'u': ('model.synapse.U', None),
    'tau': ('model.synapse.tau', None),
    'dt': ('integrator.dt', None),
    't_end': ('integrator.t_end', None),
    'sample_every': ('integrator.sample_every', None),
    't_m': ('trajectory.t_m', ('trajectory', 'ensemble')),
    'n_traj': ('trajectory.n_traj', ('trajectory', 'ensemble')),
    'seed': ('trajectory.master_seed', ('trajectory', 'ensemble')),
    'transient_window': ('sweep.transient_window', ('sweep-rmin',)),
    'rate': ('spikes.rate', ('classical-synapse',)),
    'process': ('spikes.process', ('classical-synapse',)),
    'initial': ('initial_state', None),
    'r0': ('r0', None),
    'neg_threshold': ('neg_threshold', None),
    'out': ('out', None),
}


def build_parser():
    parser = argparse.ArgumentParser(prog='qsynapse', formatter_class=argparse.RawTextHelpFormatter)
    optional = parser._action_groups.pop()
    required = parser.add_argument_group('required arguments')
    group = parser.add_mutually_exclusive_group()
    required.add_argument('mode', choices=MODES, help=
                          'experiment to run\n'
                          '1) evolve: deterministic mean-field dynamics\n'
                          '2) sweep-rmin: r_min over an (omega, tau) grid\n'
                          '3) trajectory: one measurement-driven trajectory\n'
                          '4) ensemble: average of measurement-driven trajectories\n'
                          '5) classical-synapse: spike-driven depression alone\n')
    optional.add_argument('-p', '--preset', metavar='NAME', help='named preset from cfg/presets.json')
    optional.add_argument('-c', '--config', metavar='FILE', help='path to JSON experiment document')
    optional.add_argument('-o', '--out', metavar='FILE',
                          help=f'output CSV (default: ${OUTPUT_DIR_ENV}/<mode>.csv)')
    optional.add_argument('--seed', type=int, metavar='N',
                          help='master seed of trajectories or spike trains')
    optional.add_argument('--eps1', type=float, metavar='X', help='on-site energy of qubit 1')
    optional.add_argument('--eps2', type=float, metavar='X', help='on-site energy of qubit 2')
    optional.add_argument('--omega', type=float, metavar='X', help='interaction strength')
    optional.add_argument('--driver', type=int, choices=(1, 2),
                          help='qubit whose population depresses the coupling')
    optional.add_argument('--splitting', choices=tuple(SPLITTINGS),
                          help='on-site term eps sigma^z (literal) or eps sigma^z / 2 (half)')
    optional.add_argument('--u', type=float, metavar='X', help='release probability U')
    optional.add_argument('--tau', type=float, metavar='X', help='recovery time')
    optional.add_argument('--dt', type=float, metavar='X', help='RK4 time step')
    optional.add_argument('--t-end', type=float, metavar='X', help='horizon')
    optional.add_argument('--sample-every', type=int, metavar='N', help='steps between records')
    optional.add_argument('--t-m', type=float, metavar='X', help='time between measurements')
    optional.add_argument('--n-traj', type=int, metavar='N', help='number of trajectories')
    optional.add_argument('--initial', choices=('00', '01', '10', '11'), help='initial basis state')
    optional.add_argument('--r0', type=float, metavar='X', help='initial synapse value')
    optional.add_argument('--neg-threshold', type=float, metavar='X',
                          help='negativity above which the pair counts as entangled')
    optional.add_argument('--transient-window', type=float, metavar='X',
                          help='time discarded before reading r_min')
    optional.add_argument('--rate', type=float, metavar='X', help='presynaptic spike rate')
    optional.add_argument('--process', choices=('periodic', 'poisson'), help='spike process')
    optional.add_argument('--workers', type=int, metavar='N', help='number of worker threads')
    group.add_argument('-q', '--quiet', action='store_true', help='reduce output verbosity')
    group.add_argument('-v', '--verbose', action='store_true', help='increase output verbosity')
    parser._action_groups.append(optional)
    return parser


def flag_overrides(args):
    """Nested document holding the flags that were given."""
    overrides = {'mode': args.mode}
    fields = dict(FLAG_FIELDS)
    if args.mode == 'classical-synapse':
        fields['seed'] = ('spikes.seed', None)
    if args.mode == 'sweep-rmin':
        fields['workers'] = ('sweep.workers', None)
    elif args.mode in ('trajectory', 'ensemble'):
        fields['workers'] = ('trajectory.workers', None)
    for flag, (field, modes) in fields.items():
        value = getattr(args, flag)
        if value is None or modes is not None and args.mode not in modes:
            continue
        node = overrides
        *parents, key = field.split('.')
        for parent in parents:
            node = node.setdefault(parent, {})
        node[key] = value
    return overrides


def run(config):
    """Runs one experiment and returns its records and metrics."""
    model, integrator = config.model, config.integrator
    if config.mode == 'evolve':
        initial = CoupledState.from_label(config.initial_state, config.r0)
        records = evolve(initial, model, integrator)
        return records, report_metrics(records, config.neg_threshold)

    if config.mode == 'sweep-rmin':
        sweep = config.sweep
        table = r_min_sweep(sweep.omega_values, sweep.tau_values, model, integrator,
                            sweep.transient_window, config.r0, sweep.workers,
                            config.initial_state)
        metrics = {'n_cells': len(table),
                   'min_r_min': float(table.r_min.min()),
                   'min_r_min_ratio': float(table.r_min_ratio.min())}
        return table, metrics

    if config.mode == 'trajectory':
        initial = CoupledState.from_label(config.initial_state, config.r0)
        seed = trajectory_seed(config.trajectory.master_seed, 0)
        records = run_trajectory(initial, model, config.trajectory, seed)
        metrics = report_metrics(records, config.neg_threshold)
        outcomes = records.s_c[records.meas]
        metrics['n_measurements'] = len(outcomes)
        metrics['excited_outcome_fraction'] = float(outcomes.mean()) if len(outcomes) > 0 else None
        return records, metrics

    if config.mode == 'ensemble':
        initial = CoupledState.from_label(config.initial_state, config.r0)
        records = ensemble_average(initial, model, config.trajectory)
        metrics = report_metrics(records, config.neg_threshold)
        metrics['n_traj'] = config.trajectory.n_traj
        return records, metrics

    spikes = config.spikes
    if spikes.process == 'periodic':
        spike_times = periodic_spike_times(spikes.rate, integrator.t_end)
    else:
        spike_times = poisson_spike_times(spikes.rate, integrator.t_end,
                                          np.random.default_rng(spikes.seed))
    series, r_pre = simulate_classical_spikes(model.synapse, spike_times, config.r0,
                                              integrator.t_end, integrator.dt)
    metrics = classical_report(series, r_pre, model.synapse, spikes.rate)
    return series[::integrator.sample_every], metrics


def output_path(config):
    if config.output_path is not None:
        return config.output_path
    return Path(os.environ.get(OUTPUT_DIR_ENV, '.')) / f'{config.mode}.csv'


def print_timing_info():
    LOGGER.debug('=================Timing Stats=================')
    for name in Profiler.names():
        LOGGER.debug(f"{name + ' time:':<37}{Profiler.get_avg_millis(name):>9.3f} ms "
                     f"({Profiler.get_call_count(name)} calls)")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    # set up logging
    logging.basicConfig(format='%(asctime)s [%(levelname)8s] %(message)s', datefmt='%Y-%m-%d %H:%M:%S')
    if args.quiet:
        LOGGER.setLevel(logging.WARNING)
    elif args.verbose:
        LOGGER.setLevel(logging.DEBUG)
    else:
        LOGGER.setLevel(logging.INFO)

    try:
        text = ''
        if args.config is not None:
            with open(args.config) as cfg_file:
                text = cfg_file.read()
        config = parse_config(text, args.preset, flag_overrides(args))

        LOGGER.info('Running %s...', config.mode)
        with Profiler('app') as prof:
            records, metrics = run(config)
        LOGGER.info('Finished %s in %.2f s', config.mode, prof.duration)
        write_series(records, output_path(config))
    except qsynapse.ParseError as err:
        for field, message, line in err.diagnostics:
            where = field if line is None else f'{field} (line {line})'
            LOGGER.error('%s: %s', where, message)
        return 1
    except (qsynapse.QSynapseError, ValueError, OSError) as err:
        LOGGER.error('%s', err)
        return 1

    print(format_metrics(metrics))
    print_timing_info()
    return 0


if __name__ == '__main__':
    sys.exit(main())
