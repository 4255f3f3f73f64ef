"""Discrete parallel-beam Radon transform and its exact adjoint.

The forward operator samples each ray at unit steps along its length and
reads the image by bilinear interpolation, scaling by the (unit) step
length.  The adjoint scatters exactly the same interpolation weights back
onto the pixel grid, so ``<A f, g> == <f, A^T g>`` holds to rounding -- a
property the iterative solvers rely on.

Geometry conventions
--------------------
* The image is square, ``n x n``, and the detector has ``n_det == n`` bins
  of unit spacing centred on the grid: detector coordinate
  ``x = d - (n - 1)/2`` for bin ``d``.
* A projection at angle ``theta`` (degrees, converted to radians internally)
  integrates along the rotated axis: the ray through detector coordinate
  ``x`` visits the points ``(x*cos t - s*sin t, x*sin t + s*cos t)`` for unit
  steps ``s`` spanning the grid.  At ``theta = 0`` the rays are the image
  columns and the interpolation is exact.
* Objects are assumed supported strictly inside the inscribed circle (the
  phantom generators guarantee a 0.95 margin), so rays never clip mass and
  circularly shifting a projection is physically meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

__all__ = [
    "Geometry",
    "ProjectionStack",
    "Sinogram",
    "adjoint",
    "forward",
    "forward3d",
    "operator_sums",
]


@dataclass(frozen=True)
class Geometry:
    """Acquisition geometry: detector bin count and projection angles.

    Angles are in degrees, strictly increasing, each in ``[-90, 180)`` (a
    half-turn parameterisation; tilt-series style ranges such as -75..75 are
    accepted).
    """

    n_det: int
    angles: np.ndarray

    def __post_init__(self):
        angles = np.array(self.angles, dtype=float)
        if angles.ndim != 1 or angles.size < 1:
            raise ValueError("angles must be a non-empty 1-D sequence")
        if angles.size > 1 and np.any(np.diff(angles) <= 0):
            raise ValueError("angles must be strictly increasing")
        if angles[0] < -90.0 or angles[-1] >= 180.0:
            raise ValueError("angles must lie in [-90, 180) degrees")
        if self.n_det < 2:
            raise ValueError("n_det must be at least 2")
        angles.setflags(write=False)
        object.__setattr__(self, "angles", angles)

    @property
    def n_angles(self) -> int:
        return self.angles.size


@dataclass
class Sinogram:
    """Projection data: ``data[:, m]`` holds the detector samples at
    ``geometry.angles[m]``."""

    geometry: Geometry
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        expect = (self.geometry.n_det, self.geometry.n_angles)
        if self.data.shape != expect:
            raise ValueError(f"sinogram data must have shape {expect}, got {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("sinogram values must be finite")

    def copy(self) -> "Sinogram":
        return Sinogram(self.geometry, self.data.copy())


@dataclass
class ProjectionStack:
    """Slice-resolved projections of a volume rotated about the x-axis.

    ``data[x, :, m]`` is the detector-y profile of cross-section ``x`` at
    angle ``m``; every cross-section shares one :class:`Geometry`.
    """

    geometry: Geometry
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 3:
            raise ValueError("stack data must be 3-D (nx, n_det, n_angles)")
        if self.data.shape[1:] != (self.geometry.n_det, self.geometry.n_angles):
            raise ValueError(
                f"stack data must have shape (nx, {self.geometry.n_det}, "
                f"{self.geometry.n_angles}), got {self.data.shape}"
            )
        if not np.all(np.isfinite(self.data)):
            raise ValueError("stack values must be finite")

    def copy(self) -> "ProjectionStack":
        return ProjectionStack(self.geometry, self.data.copy())


class _Tables:
    """Per-geometry sampling tables: flat pixel indices and bilinear weights
    for every (angle, detector bin, ray step, corner) combination."""

    def __init__(self, idx, weights, det_of_sample, row_sums, col_sums):
        self.idx = idx                    # (M, 4, n*n) int32
        self.weights = weights            # (M, 4, n*n) float64
        self.det_of_sample = det_of_sample  # (n*n,) int32
        self.row_sums = row_sums          # (n_det, M)
        self.col_sums = col_sums          # (n, n)


_TABLE_CACHE: dict = {}


def _tables(geometry: Geometry) -> _Tables:
    key = (geometry.n_det, geometry.angles.tobytes())
    tab = _TABLE_CACHE.get(key)
    if tab is None:
        tab = _build_tables(geometry)
        _TABLE_CACHE[key] = tab
    return tab


def _build_tables(geometry: Geometry) -> _Tables:
    n = geometry.n_det
    m_count = geometry.n_angles
    centre = (n - 1) / 2.0
    coords = np.arange(n, dtype=float) - centre  # detector bins and ray steps
    theta = np.radians(geometry.angles)

    samples = n * n
    idx = np.zeros((m_count, 4, samples), dtype=np.int32)
    weights = np.zeros((m_count, 4, samples), dtype=float)

    for m, th in enumerate(theta):
        cos_t = np.cos(th)
        sin_t = np.sin(th)
        x = coords[:, None] * cos_t - coords[None, :] * sin_t
        y = coords[:, None] * sin_t + coords[None, :] * cos_t
        col = (x + centre).ravel()
        row = (y + centre).ravel()
        i0 = np.floor(row).astype(np.int64)
        j0 = np.floor(col).astype(np.int64)
        di = row - i0
        dj = col - j0
        corners = (
            (i0, j0, (1.0 - di) * (1.0 - dj)),
            (i0, j0 + 1, (1.0 - di) * dj),
            (i0 + 1, j0, di * (1.0 - dj)),
            (i0 + 1, j0 + 1, di * dj),
        )
        for c, (ii, jj, wt) in enumerate(corners):
            ok = (ii >= 0) & (ii < n) & (jj >= 0) & (jj < n)
            idx[m, c] = np.where(ok, ii * n + jj, 0).astype(np.int32)
            weights[m, c] = np.where(ok, wt, 0.0)

    det_of_sample = np.repeat(np.arange(n, dtype=np.int32), n)
    row_sums = weights.sum(axis=1).reshape(m_count, n, n).sum(axis=2).T.copy()
    col_sums = np.bincount(
        idx.ravel(), weights=weights.ravel(), minlength=samples
    ).reshape(n, n)
    return _Tables(idx, weights, det_of_sample, row_sums, col_sums)


def operator_sums(geometry: Geometry):
    """Row and column sums of the projection operator.

    Returns
    -------
    row_sums : ndarray, shape (n_det, n_angles)
        Projection of an all-ones image (total weight along each ray).
    col_sums : ndarray, shape (n, n)
        Back projection of an all-ones sinogram (total weight per pixel).
    """
    tab = _tables(geometry)
    return tab.row_sums, tab.col_sums


def forward(image: np.ndarray, geometry: Geometry) -> Sinogram:
    """Project an ``n x n`` image onto the detector at every angle."""
    image = np.asarray(image, dtype=float)
    n = geometry.n_det
    if image.shape != (n, n):
        raise ValueError(f"image must be {n} x {n} to match the geometry")
    if not np.all(np.isfinite(image)):
        raise ValueError("image values must be finite")
    tab = _tables(geometry)
    flat = np.ascontiguousarray(image).ravel()
    out = np.empty((geometry.n_angles, n))
    for m in range(geometry.n_angles):
        acc = np.take(flat, tab.idx[m])
        acc *= tab.weights[m]
        out[m] = acc.sum(axis=0).reshape(n, n).sum(axis=1)
    return Sinogram(geometry, out.T.copy())


def adjoint(sinogram: Sinogram) -> np.ndarray:
    """Exact transpose of :func:`forward` applied to a sinogram."""
    geometry = sinogram.geometry
    n = geometry.n_det
    tab = _tables(geometry)
    total = np.zeros(n * n)
    for m in range(geometry.n_angles):
        vals = tab.weights[m] * np.take(sinogram.data[:, m], tab.det_of_sample)
        total += np.bincount(tab.idx[m].ravel(), weights=vals.ravel(), minlength=n * n)
    return total.reshape(n, n)


def forward3d(volume: np.ndarray, geometry: Geometry) -> ProjectionStack:
    """Project a volume slice by slice, rotating about the x-axis.

    ``volume`` has axes ``(x, y, z)`` with ``ny == nz == geometry.n_det``.
    Each cross-section perpendicular to the rotation axis is an independent
    2-D problem whose detector coordinate is y, so
    ``forward3d(v, g).data[x0]`` equals ``forward(v[x0].T, g).data``.
    """
    volume = np.asarray(volume, dtype=float)
    if volume.ndim != 3:
        raise ValueError("volume must be 3-D (nx, ny, nz)")
    nx, ny, nz = volume.shape
    if ny != geometry.n_det or nz != geometry.n_det:
        raise ValueError("volume cross-sections must be square and match n_det")
    data = np.empty((nx, geometry.n_det, geometry.n_angles))
    for x in range(nx):
        # transpose so columns are the y axis (the detector coordinate)
        data[x] = forward(volume[x].T, geometry).data
    return ProjectionStack(geometry, data)
