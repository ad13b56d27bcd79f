import logging
import numpy as np

from .synapse import r_stationary
from .utils.numba import first_local_max, time_above, time_fraction_greater, upward_crossings


LOGGER = logging.getLogger(__name__)


def report_metrics(records, neg_threshold=0.01, return_thresh=0.99, final_fraction=0.1):
    """Derived quantities of a sampled run.

    Parameters
    ----------
    records : recarray
        Series, trajectory or ensemble records with at least `t`, `p1`, `p2`
        and `r`. Negativity metrics are reported when the records carry it.
    neg_threshold : float, optional
        Negativity above which the pair counts as entangled.
    return_thresh : float, optional
        Level p1 must cross upwards to count as a return of the excitation.
    final_fraction : float, optional
        Trailing fraction of the run averaged for the final means.

    Returns
    -------
    Dict[str, float or None]
        `return_time` and `oscillation_period` from upward crossings of p1
        (interpolated between samples), `half_rise_time`, `p1_dominance`
        (time fraction with p1 > p2 minus the reverse), the final-window means
        of p1 and r, and `entangled_lifetime`, `first_negativity_max_time` and
        `max_negativity` when available. Quantities that never occur are None.
    """
    if len(records) < 2:
        raise ValueError(f'Need at least 2 records, got {len(records)}')
    assert 0 < final_fraction <= 1
    t = np.ascontiguousarray(records.t, dtype=np.float64)
    p1 = np.ascontiguousarray(records.p1, dtype=np.float64)
    p2 = np.ascontiguousarray(records.p2, dtype=np.float64)

    metrics = {}
    crossings = [_crossing_time(t, p1, i, return_thresh)
                 for i in upward_crossings(p1, return_thresh)]
    metrics['return_time'] = crossings[0] if crossings else None
    metrics['oscillation_period'] = crossings[1] - crossings[0] if len(crossings) > 1 else None

    above_half = np.flatnonzero(p1 >= 0.5)
    metrics['half_rise_time'] = float(t[above_half[0]]) if len(above_half) > 0 else None
    metrics['p1_dominance'] = time_fraction_greater(t, p1, p2) - time_fraction_greater(t, p2, p1)

    if 'negativity' in records.dtype.names:
        neg = np.ascontiguousarray(records.negativity, dtype=np.float64)
        metrics['entangled_lifetime'] = time_above(t, neg, neg_threshold)
        idx = first_local_max(neg)
        metrics['first_negativity_max_time'] = float(t[idx]) if idx >= 0 else None
        metrics['max_negativity'] = float(neg.max())

    t_start = t[-1] - final_fraction * (t[-1] - t[0])
    final = t >= t_start
    metrics['final_p1_mean'] = float(p1[final].mean())
    metrics['final_r_mean'] = float(np.mean(records.r[final]))
    return metrics


def classical_report(series, r_pre, params, rate):
    """Compares a classical spike-driven run with the rate-based fixed point.

    Returns
    -------
    Dict[str, float or None]
        Time-averaged r, mean pre-spike r (None without spikes), the
        stationary value 1 / (1 + tau U rate) and the spike count.
    """
    t = np.asarray(series.t)
    r = np.asarray(series.r)
    span = t[-1] - t[0]
    if span > 0:
        # left-point rule on the output grid
        time_mean = float(np.sum(r[:-1] * np.diff(t)) / span)
    else:
        time_mean = float(r[0])
    return {
        'time_mean_r': time_mean,
        'pre_spike_mean_r': float(np.mean(r_pre)) if len(r_pre) > 0 else None,
        'r_stationary': r_stationary(params, rate),
        'n_spikes': len(r_pre),
    }


def format_metrics(metrics):
    """Flat key=value lines, 'none' for missing values."""
    lines = []
    for key, value in metrics.items():
        if value is None:
            text = 'none'
        elif isinstance(value, (int, np.integer)):
            text = str(value)
        else:
            text = f'{value:.10g}'
        lines.append(f'{key}={text}')
    return '\n'.join(lines)


def _crossing_time(t, values, i, thresh):
    frac = (thresh - values[i - 1]) / (values[i] - values[i - 1])
    return float(t[i - 1] + frac * (t[i] - t[i - 1]))
