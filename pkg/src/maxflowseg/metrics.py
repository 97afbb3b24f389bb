"""Overlap and surface-distance scores for binary masks."""

import math

import numpy as np
from scipy import ndimage

from .errors import EmptyMask, ShapeMismatch


def _pair(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")
    return a.astype(bool), b.astype(bool)


def dice(a, b):
    """Dice overlap ``2|a & b| / (|a| + |b|)``.

    Two empty masks score 1.0; exactly one empty mask scores 0.0.
    """
    a, b = _pair(a, b)
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / total


def nearest_rank(values, percentile):
    """Nearest-rank percentile of a 1-D sample (``percentile`` in (0, 100])."""
    if not 0 < percentile <= 100:
        raise ValueError(f"percentile must lie in (0, 100], got {percentile}")
    values = np.sort(np.asarray(values, dtype=np.float64))
    # round first: 0.95 * 20 is 19.000000000000004 in binary floating point
    rank = max(1, math.ceil(round(percentile * len(values), 9) / 100.0))
    return float(values[rank - 1])


def directed_distances(a, b):
    """Distance from every 1-pixel of ``a`` to the closest 1-pixel of ``b``."""
    a, b = _pair(a, b)
    if not b.any():
        raise EmptyMask("target mask is empty")
    dist = ndimage.distance_transform_edt(~b)
    return dist[a]


def hausdorff95(a, b, percentile=95.0):
    """Symmetric percentile Hausdorff distance in pixels.

    Distances are taken between all 1-pixels of the two regions (not their
    boundaries). ``percentile=100`` gives the classical Hausdorff distance.
    """
    a, b = _pair(a, b)
    if not a.any() or not b.any():
        raise EmptyMask("Hausdorff distance is undefined for an empty mask")
    return max(nearest_rank(directed_distances(a, b), percentile),
               nearest_rank(directed_distances(b, a), percentile))


def boundary_length(mask):
    """Number of 4-neighbour pixel pairs whose labels differ."""
    m = np.asarray(mask).astype(np.int8)
    return int(np.count_nonzero(np.diff(m, axis=0)) + np.count_nonzero(np.diff(m, axis=1)))
