"""Volume alignment: mass-conservation x-registration followed by
slice-driven phase alignment of the remaining detector shifts.

A tilt series about the x-axis misaligns in two directions.  Shifts along
the rotation axis are recovered first: the mass of each x cross-section is
conserved under rotation, so the per-angle mass profiles register rigidly
against a median reference.  Shifts perpendicular to the axis (detector y)
are then recovered by running phase-based alignment on a small subset of
cross-sections and averaging their per-angle estimates; the whole stack is
realigned by the result before the full volume is reconstructed.
"""

from __future__ import annotations

import numpy as np

from . import recon
from .align import AlignConfig, ShiftHistory, pba_estimate
from .fourier import best_circular_lag
from .misalign import apply_shifts
from .projector import ProjectionStack, Sinogram, forward

__all__ = [
    "cross_section",
    "default_slice_subset",
    "mass_align_x",
    "pba3d",
    "reconstruct_stack",
]


def cross_section(volume: np.ndarray, x: int) -> np.ndarray:
    """The (y, z) plane at ``x`` oriented for the 2-D projector
    (columns = y, the detector coordinate)."""
    return np.asarray(volume, dtype=float)[x].T


def default_slice_subset(nx: int, count: int = 8) -> np.ndarray:
    """``count`` distinct x-indices evenly spaced through the central half
    of the stack."""
    if nx < 4 or count < 1:
        raise ValueError("need nx >= 4 and count >= 1")
    lo = nx // 4
    hi = max(3 * nx // 4 - 1, lo)
    return np.unique(np.linspace(lo, hi, count).round().astype(int))


def mass_align_x(stack: ProjectionStack, max_lag: int | None = None):
    """Register the rotation-axis direction by conservation of mass.

    The per-angle mass profile ``P_m(x) = sum_y data[x, y, m]`` is matched
    against the per-x median profile over angles by integer circular
    cross-correlation, and each projection is rolled in x to cancel the lag
    found.  Returns the corrected stack and the per-angle x-offsets that
    were present (in the same sign convention as the y-shift estimators:
    the corruption ``np.roll(proj, k, axis=0)`` is reported as ``k``).

    The absolute x-position is unobservable -- a common offset on every
    projection is indistinguishable from a shifted object -- so the median
    profile anchors the result: offsets are recovered relative to the median
    corruption, exactly equal to it when the true offsets have median zero.
    """
    data = stack.data
    if not np.any(data):
        raise ValueError("stack carries no mass to align")
    nx = data.shape[0]
    if max_lag is None:
        max_lag = (nx - 1) // 2
    profiles = data.sum(axis=1)                    # (nx, M)
    reference = np.median(profiles, axis=1)
    out = data.copy()
    offsets = np.zeros(stack.geometry.n_angles)
    for m in range(stack.geometry.n_angles):
        lag = best_circular_lag(profiles[:, m], reference, max_lag)
        offsets[m] = lag
        out[:, :, m] = np.roll(data[:, :, m], -lag, axis=0)
    return ProjectionStack(stack.geometry, out), offsets


def _slice_sinogram(stack: ProjectionStack, x: int) -> Sinogram:
    return Sinogram(stack.geometry, stack.data[x])


def reconstruct_stack(stack: ProjectionStack, recon_cfg, n_iters: int) -> np.ndarray:
    """Reconstruct every cross-section independently; returns the volume
    with axes (x, y, z)."""
    nx = stack.data.shape[0]
    n = stack.geometry.n_det
    volume = np.empty((nx, n, n))
    for x in range(nx):
        img = recon.solve(_slice_sinogram(stack, x), recon_cfg, n_iters)
        volume[x] = img.T        # back from (z, y) image axes to (y, z)
    return volume


def pba3d(stack: ProjectionStack, slice_subset, recon_cfg, align_cfg: AlignConfig):
    """Recover per-angle detector-y shifts from a subset of cross-sections.

    Each update reconstructs every subset slice for a few iterations
    (warm-started across updates), estimates the per-angle shift of each
    slice's data against its reprojection, and averages the estimates over
    slices.  The y-shifts apply to whole projection images, so the average
    over cross-sections is an ensemble estimate of one common value.

    After the final update the cumulative estimate realigns the full stack
    and every cross-section is reconstructed with the total iteration budget
    (updates x inner iterations).  Returns ``(history, volume)``.
    """
    subset = np.asarray(slice_subset, dtype=int)
    nx = stack.data.shape[0]
    if subset.size == 0 or np.any(subset < 0) or np.any(subset >= nx):
        raise ValueError("slice subset must be non-empty and inside the stack")
    geometry = stack.geometry
    n = geometry.n_det
    m_count = geometry.n_angles

    cum = np.zeros(m_count)
    history = ShiftHistory()
    images = {int(x): np.zeros((n, n)) for x in subset}
    for _ in range(align_cfg.outer_updates):
        per_slice = np.empty((subset.size, m_count))
        for i, x in enumerate(subset):
            current = apply_shifts(_slice_sinogram(stack, x), -cum)
            images[int(x)] = recon.solve(
                current, recon_cfg, align_cfg.inner_iters, f0=images[int(x)]
            )
            reproj = forward(images[int(x)], geometry)
            per_slice[i] = pba_estimate(current, reproj, align_cfg.freqs)
        eps = per_slice.mean(axis=0)
        cum = cum + eps
        history.append(eps)

    realigned = ProjectionStack(
        geometry,
        np.stack([
            apply_shifts(_slice_sinogram(stack, x), -cum).data for x in range(nx)
        ]),
    )
    total = align_cfg.outer_updates * align_cfg.inner_iters
    volume = reconstruct_stack(realigned, recon_cfg, total)
    return history, volume
