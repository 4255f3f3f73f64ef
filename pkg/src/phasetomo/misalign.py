"""Misalignment and noise simulation for projection data.

Shift sign convention: ``apply_shifts(s, eps)`` displaces column ``m`` so
that the result samples ``r(x - eps[m])`` -- positive shifts move the trace
toward higher detector indices.  The alignment estimators report
displacements in this same convention, so a recovered shift set can be fed
back through ``apply_shifts(data, -recovered)`` to undo the corruption.
"""

from __future__ import annotations

import numpy as np

from .fourier import best_circular_lag, fractional_shift
from .projector import Sinogram

__all__ = ["add_noise", "apply_shifts", "cc_misalign", "random_shifts"]


def random_shifts(n_angles: int, lo: int, hi: int, seed: int) -> np.ndarray:
    """Independent uniform integer shifts on [lo, hi] (inclusive), one per
    projection angle, returned as floats."""
    if lo > hi:
        raise ValueError("need lo <= hi")
    rng = np.random.default_rng(seed)
    return rng.integers(lo, hi + 1, size=n_angles).astype(float)


def apply_shifts(s: Sinogram, shifts) -> Sinogram:
    """Displace every column of a sinogram by its own (possibly fractional)
    number of detector bins; column m becomes ``r(x - shifts[m])``.

    Applying the negated shifts restores the original data to interpolation
    accuracy (exactly, for integer shifts).
    """
    shifts = np.asarray(shifts, dtype=float)
    if shifts.shape != (s.geometry.n_angles,):
        raise ValueError("need exactly one shift per projection angle")
    return Sinogram(s.geometry, fractional_shift(s.data, -shifts))


def cc_misalign(s: Sinogram, max_lag: int):
    """Corrupt a sinogram the way naive sequential registration does.

    Walking the angles in order, each column is circularly rotated by the
    integer lag that maximises its circular cross-correlation with the
    already-processed previous column (ties toward the smaller ``|lag|``).
    Neighbouring projections differ, so the per-step registration errors
    accumulate into a characteristic drift.

    Returns the corrupted sinogram and the net shift per column in the
    :func:`apply_shifts` convention, i.e. ``apply_shifts(s, shifts)``
    reproduces the corrupted data.  Running the corruption again on its own
    output finds nothing left to move.
    """
    n = s.geometry.n_det
    if not 0 <= max_lag < n / 2:
        raise ValueError("max_lag must satisfy 0 <= max_lag < n_det/2")
    data = s.data.copy()
    shifts = np.zeros(s.geometry.n_angles)
    for m in range(1, s.geometry.n_angles):
        lag = best_circular_lag(data[:, m], data[:, m - 1], max_lag)
        data[:, m] = np.roll(data[:, m], -lag)
        shifts[m] = -lag
    return Sinogram(s.geometry, data), shifts


def add_noise(s: Sinogram, snr: float, seed: int) -> Sinogram:
    """Add i.i.d. Gaussian noise with sigma = mean(|data|) / snr."""
    if snr <= 0:
        raise ValueError("snr must be positive")
    rng = np.random.default_rng(seed)
    sigma = np.mean(np.abs(s.data)) / snr
    return Sinogram(s.geometry, s.data + rng.normal(0.0, sigma, size=s.data.shape))
