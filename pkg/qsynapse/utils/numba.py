import numpy as np
import numba as nb


@nb.njit(cache=True)
def upward_crossings(values, thresh):
    """Indices where a sampled signal rises strictly above a threshold."""
    indices = []
    for i in range(1, len(values)):
        if values[i] > thresh and values[i - 1] <= thresh:
            indices.append(i)
    return np.array(indices)


@nb.njit(cache=True)
def first_local_max(values):
    """Index of the first interior local maximum, -1 if there is none."""
    for i in range(1, len(values) - 1):
        if values[i] > values[i - 1] and values[i] >= values[i + 1]:
            return i
    return -1


@nb.njit(cache=True)
def time_above(t, values, thresh):
    """Total time a sampled signal spends above a threshold (left-point rule)."""
    total = 0.
    for i in range(len(t) - 1):
        if values[i] > thresh:
            total += t[i + 1] - t[i]
    return total


@nb.njit(cache=True)
def time_fraction_greater(t, a, b):
    """Fraction of sampled time during which a > b."""
    total = 0.
    span = 0.
    for i in range(len(t) - 1):
        dt = t[i + 1] - t[i]
        span += dt
        if a[i] > b[i]:
            total += dt
    if span == 0.:
        return 0.
    return total / span
