from pathlib import Path
import logging
import os
import tempfile
import warnings
import numpy as np

from .evolution import SERIES_DTYPE, SWEEP_DTYPE
from .synapse import CLASSICAL_DTYPE
from .trajectories import ENSEMBLE_DTYPE, TRAJECTORY_DTYPE


LOGGER = logging.getLogger(__name__)
KNOWN_DTYPES = (SERIES_DTYPE, TRAJECTORY_DTYPE, ENSEMBLE_DTYPE, SWEEP_DTYPE, CLASSICAL_DTYPE)


def write_series(records, path, dtype=None):
    """Writes records as CSV with a header row of field names.
    Floats are printed with 17 significant digits so they read back bit-exactly.
    The file is written to a temporary sibling and renamed into place, so a
    failed write never leaves a partial CSV behind.

    Parameters
    ----------
    records : recarray or sequence
        Records of one of the known dtypes, in time order.
    path : str or Path
        Destination file. Parent directories are created.
    dtype : np.dtype, optional
        Record dtype, needed only when `records` is an empty list.

    Raises
    ------
    OSError
        With the destination path in the message.
    """
    path = Path(path)
    if dtype is None:
        dtype = getattr(records, 'dtype', SERIES_DTYPE)
    records = np.asarray(records, dtype=dtype)
    fmt = ['%d' if dtype[name].kind in 'biu' else '%.17g' for name in dtype.names]

    tmp_name = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile('w', dir=path.parent, prefix=f'.{path.name}.',
                                         suffix='.tmp', delete=False) as tmp_file:
            tmp_name = tmp_file.name
            np.savetxt(tmp_file, records, fmt=fmt, delimiter=',',
                       header=','.join(dtype.names), comments='')
        os.replace(tmp_name, path)
    except OSError as err:
        if tmp_name is not None and os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise OSError(f'Cannot write {path}: {err.strerror or err}') from err
    LOGGER.info('Wrote %d records to %s', len(records), path)


def read_series(path):
    """Reads a CSV written by `write_series`.

    Returns
    -------
    recarray
        Records with the known dtype matching the header, or an all-float
        dtype for unknown headers.
    """
    path = Path(path)
    with open(path) as csv_file:
        header = csv_file.readline().strip()
    if not header:
        raise ValueError(f'{path} has no header row')
    names = tuple(header.split(','))
    dtype = next((dt for dt in KNOWN_DTYPES if dt.names == names), None)
    if dtype is None:
        dtype = np.dtype([(name, float) for name in names])

    with warnings.catch_warnings():
        # header-only files are valid
        warnings.simplefilter('ignore', UserWarning)
        data = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    if data.size == 0:
        return np.recarray(0, dtype)
    if data.shape[1] != len(names):
        raise ValueError(f'{path} has {data.shape[1]} columns, header names {len(names)}')

    records = np.recarray(len(data), dtype)
    for col, name in enumerate(names):
        records[name] = data[:, col].astype(dtype[name])
    return records
