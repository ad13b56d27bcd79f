import numpy as np
import pytest

from qsynapse.evolution import SERIES_DTYPE, SWEEP_DTYPE
from qsynapse.series import read_series, write_series
from qsynapse.trajectories import TRAJECTORY_DTYPE


def make_records(dtype, n, seed=0):
    rng = np.random.default_rng(seed)
    records = np.recarray(n, dtype)
    for name in dtype.names:
        if dtype[name].kind == 'f':
            records[name] = rng.random(n) * 10. ** rng.integers(-20, 20, n)
        elif dtype[name].kind == 'b':
            records[name] = rng.random(n) < 0.5
        else:
            records[name] = rng.integers(0, 2, n)
    return records


def test_header_only_for_empty_list(tmp_path):
    path = tmp_path / 'empty.csv'
    write_series([], path)
    assert path.read_text() == 't,p1,p2,r,negativity\n'
    assert len(read_series(path)) == 0


def test_single_record(tmp_path):
    path = tmp_path / 'one.csv'
    records = np.rec.array([(0., 0., 1., 1., 0.)], dtype=SERIES_DTYPE)
    write_series(records, path)
    assert path.read_text().splitlines() == ['t,p1,p2,r,negativity', '0,0,1,1,0']


def test_trajectory_columns(tmp_path):
    path = tmp_path / 'traj.csv'
    records = np.rec.array([(30., 1., 0., 0.5, 0., 1, True)], dtype=TRAJECTORY_DTYPE)
    write_series(records, path)
    header, row = path.read_text().splitlines()
    assert header == 't,p1,p2,r,negativity,s_c,meas'
    assert row == '30,1,0,0.5,0,1,1'


@pytest.mark.parametrize('dtype', [SERIES_DTYPE, TRAJECTORY_DTYPE, SWEEP_DTYPE])
def test_values_read_back_exactly(tmp_path, dtype):
    path = tmp_path / 'records.csv'
    records = make_records(dtype, 50)
    write_series(records, path)
    loaded = read_series(path)
    assert loaded.dtype.names == dtype.names
    for name in dtype.names:
        np.testing.assert_array_equal(loaded[name], records[name])


def test_creates_parent_directories(tmp_path):
    path = tmp_path / 'a' / 'b' / 'out.csv'
    write_series(make_records(SERIES_DTYPE, 3), path)
    assert path.exists()
    assert [p.name for p in path.parent.iterdir()] == ['out.csv']


def test_replaces_existing_file(tmp_path):
    path = tmp_path / 'out.csv'
    path.write_text('stale\n')
    write_series(make_records(SERIES_DTYPE, 2), path)
    assert path.read_text().startswith('t,p1,p2,r,negativity\n')


def test_write_error_names_path(tmp_path):
    blocker = tmp_path / 'file'
    blocker.write_text('')
    with pytest.raises(OSError, match='out.csv'):
        write_series(make_records(SERIES_DTYPE, 2), blocker / 'out.csv')


def test_unknown_header_reads_as_floats(tmp_path):
    path = tmp_path / 'other.csv'
    path.write_text('a,b\n1,2\n3,4.5\n')
    loaded = read_series(path)
    assert loaded.dtype.names == ('a', 'b')
    np.testing.assert_array_equal(loaded.b, [2., 4.5])


def test_column_count_mismatch(tmp_path):
    path = tmp_path / 'bad.csv'
    path.write_text('t,p1,p2,r,negativity\n1,2,3\n')
    with pytest.raises(ValueError):
        read_series(path)
