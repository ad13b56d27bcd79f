import json
import numpy as np
import pytest

import app
from qsynapse.series import read_series


def run_app(capsys, *argv):
    code = app.main(list(argv))
    out = capsys.readouterr().out
    metrics = dict(line.split('=', 1) for line in out.splitlines() if '=' in line)
    return code, metrics


def test_evolve_writes_series_and_metrics(tmp_path, capsys):
    out = tmp_path / 'evolve.csv'
    code, metrics = run_app(capsys, 'evolve', '--preset', 'symmetric-tau10', '--dt', '0.01',
                            '--t-end', '20', '--sample-every', '10', '--out', str(out), '-q')
    assert code == 0
    records = read_series(out)
    assert len(records) == 201
    assert records.t[-1] == pytest.approx(20.)
    assert records.p1[0] == 0.
    assert set(metrics) >= {'return_time', 'entangled_lifetime', 'final_p1_mean', 'final_r_mean'}
    assert metrics['return_time'] == 'none'


def test_flags_override_config_file(tmp_path, capsys):
    config = tmp_path / 'exp.json'
    config.write_text(json.dumps({
        'mode': 'evolve',
        'model': {'eps1': 0., 'eps2': 0., 'omega': 0., 'synapse': {'U': 0.5, 'tau': 1.}},
        'integrator': {'dt': 0.01, 't_end': 10., 'sample_every': 100},
        'initial_state': '10',
        'out': str(tmp_path / 'from_config.csv'),
    }))
    out = tmp_path / 'from_flags.csv'
    code, _ = run_app(capsys, 'evolve', '--config', str(config), '--tau', '10', '--out', str(out), '-q')
    assert code == 0
    assert not (tmp_path / 'from_config.csv').exists()
    records = read_series(out)
    # tau = 10 relaxes at rate 0.6, tau = 1 at rate 1.5
    assert records.r[-1] == pytest.approx(1. / 6. + 5. / 6. * np.exp(-6.), rel=1e-6)


def test_output_directory_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(app.OUTPUT_DIR_ENV, str(tmp_path))
    code, _ = run_app(capsys, 'evolve', '--preset', 'symmetric-tau10', '--dt', '0.01',
                      '--t-end', '1', '-q')
    assert code == 0
    assert (tmp_path / 'evolve.csv').exists()


def test_trajectory_mode(tmp_path, capsys):
    out = tmp_path / 'traj.csv'
    code, metrics = run_app(capsys, 'trajectory', '--preset', 'measured-tau1', '--dt', '0.01',
                            '--t-end', '100', '--seed', '4', '--out', str(out), '-q')
    assert code == 0
    records = read_series(out)
    assert records.dtype.names[-2:] == ('s_c', 'meas')
    assert records.meas.sum() == 3
    assert metrics['n_measurements'] == '3'


def test_ensemble_mode(tmp_path, capsys):
    out = tmp_path / 'ens.csv'
    code, metrics = run_app(capsys, 'ensemble', '--preset', 'measured-tau0.01', '--dt', '0.01',
                            '--t-end', '60', '--n-traj', '8', '--workers', '2', '--out', str(out), '-q')
    assert code == 0
    records = read_series(out)
    assert records.dtype.names == ('t', 'p1', 'p2', 'r', 'p1_stderr')
    assert metrics['n_traj'] == '8'


def test_ensemble_output_is_deterministic(tmp_path, capsys):
    paths = []
    for workers in ('1', '3'):
        out = tmp_path / f'ens{workers}.csv'
        code, _ = run_app(capsys, 'ensemble', '--preset', 'measured-tau1', '--dt', '0.01',
                          '--t-end', '60', '--n-traj', '70', '--seed', '9', '--workers', workers,
                          '--out', str(out), '-q')
        assert code == 0
        paths.append(out)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_sweep_mode(tmp_path, capsys):
    out = tmp_path / 'sweep.csv'
    code, metrics = run_app(capsys, 'sweep-rmin', '--preset', 'rmin-sweep', '--dt', '0.01',
                            '--t-end', '100', '--transient-window', '50', '--out', str(out), '-q')
    assert code != 0  # tau = 0.001 is unstable at dt = 0.01
    assert not out.exists()

    config = tmp_path / 'sweep.json'
    config.write_text(json.dumps({'sweep': {'omega_values': [0., 0.1], 'tau_values': [1., 10.]}}))
    code, metrics = run_app(capsys, 'sweep-rmin', '--preset', 'rmin-sweep', '--config', str(config),
                            '--dt', '0.01', '--t-end', '100', '--transient-window', '50',
                            '--out', str(out), '-q')
    assert code == 0
    table = read_series(out)
    assert table.dtype.names == ('tau', 'omega', 'r_min', 'r_min_ratio')
    assert len(table) == 4
    assert metrics['n_cells'] == '4'


def test_classical_mode(tmp_path, capsys):
    out = tmp_path / 'classical.csv'
    code, metrics = run_app(capsys, 'classical-synapse', '--preset', 'classical-periodic',
                            '--t-end', '100', '--out', str(out), '-q')
    assert code == 0
    records = read_series(out)
    assert records.dtype.names == ('t', 'r')
    assert len(records) == 1001
    assert metrics['n_spikes'] == '100'
    assert float(metrics['r_stationary']) == pytest.approx(1. / 6.)


def test_parse_errors_exit_nonzero(tmp_path, capsys, caplog):
    out = tmp_path / 'never.csv'
    code, _ = run_app(capsys, 'evolve', '--out', str(out))
    assert code == 1
    assert not out.exists()
    assert 'model.synapse.tau' in caplog.text


def test_missing_config_file(tmp_path, capsys):
    code, _ = run_app(capsys, 'evolve', '--config', str(tmp_path / 'missing.json'))
    assert code == 1


def test_unknown_mode_is_rejected(capsys):
    with pytest.raises(SystemExit):
        app.main(['simulate'])


def test_splitting_flag():
    args = app.build_parser().parse_args(['evolve', '--splitting', 'half'])
    assert app.flag_overrides(args) == {'mode': 'evolve', 'model': {'splitting': 'half'}}
    with pytest.raises(SystemExit):
        app.build_parser().parse_args(['evolve', '--splitting', 'quarter'])


def test_preset_alias_runs(tmp_path, capsys):
    out = tmp_path / 'alias.csv'
    code, metrics = run_app(capsys, 'evolve', '--preset', 'fig3-right-tau100', '--dt', '0.01',
                            '--t-end', '5', '--sample-every', '100', '--out', str(out), '-q')
    assert code == 0
    assert len(read_series(out)) == 6
    assert 'final_p1_mean' in metrics
