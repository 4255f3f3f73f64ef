"""Iterative reconstruction: SIRT and total-variation ADMM.

Both solvers minimise a least-squares data term ``||A f - s||^2`` over
images, optionally constrained to ``f >= 0``.  SIRT is the simultaneous
update ``f <- f + relaxation * C A^T R (s - A f)`` with ``R`` and ``C`` the
inverse row/column sums of the projector.  The TV solver adds an isotropic
total-variation penalty and runs ADMM on the splitting ``d ~= grad f``.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from . import projector
from .projector import Sinogram, adjoint, forward

__all__ = ["ReconConfig", "residual", "sirt_step", "solve", "tv_objective", "tv_solve"]

# Inner conjugate-gradient steps per ADMM iteration (f-subproblem).
CG_STEPS = 5


@dataclass
class ReconConfig:
    """Solver selection and tuning knobs.

    solver : "sirt" or "tv"
    inner_iters : solver iterations between alignment updates
    nonneg : clamp the iterate to f >= 0 after each update
    tv_weight : TV penalty weight (lambda), must be > 0 for the TV solver
    admm_penalty : ADMM coupling weight (mu)
    relaxation : SIRT step size, in (0, 2)
    """

    solver: str = "sirt"
    inner_iters: int = 10
    nonneg: bool = True
    tv_weight: float = 1.0
    admm_penalty: float = 1.0
    relaxation: float = 1.0

    def __post_init__(self):
        if self.solver not in ("sirt", "tv"):
            raise ValueError("solver must be 'sirt' or 'tv'")
        if self.inner_iters < 1:
            raise ValueError("inner_iters must be positive")
        if not 0.0 < self.relaxation < 2.0:
            raise ValueError("relaxation must lie in (0, 2)")
        if self.solver == "tv" and self.tv_weight <= 0:
            raise ValueError("the TV solver needs tv_weight > 0")
        if self.admm_penalty <= 0:
            raise ValueError("admm_penalty must be positive")


def _inverse_or_zero(sums: np.ndarray) -> np.ndarray:
    """Elementwise 1/x with (numerically) empty rows/columns mapped to 0."""
    tiny = 1e-12 * sums.max() if sums.size else 0.0
    out = np.zeros_like(sums)
    mask = sums > tiny
    out[mask] = 1.0 / sums[mask]
    return out


def sirt_step(f: np.ndarray, s: Sinogram, cfg: ReconConfig) -> np.ndarray:
    """One SIRT update from iterate ``f`` toward the data ``s``."""
    f = np.asarray(f, dtype=float)
    row_sums, col_sums = projector.operator_sums(s.geometry)
    inv_rows = _inverse_or_zero(row_sums)
    inv_cols = _inverse_or_zero(col_sums)
    resid = s.data - forward(f, s.geometry).data
    update = adjoint(Sinogram(s.geometry, inv_rows * resid)) * inv_cols
    out = f + cfg.relaxation * update
    if cfg.nonneg:
        np.maximum(out, 0.0, out=out)
    return out


def _grad(f: np.ndarray):
    """Forward differences with periodic boundaries (x along columns)."""
    gx = np.roll(f, -1, axis=1) - f
    gy = np.roll(f, -1, axis=0) - f
    return gx, gy


def _grad_t(ux: np.ndarray, uy: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`_grad` (negative periodic divergence)."""
    return (np.roll(ux, 1, axis=1) - ux) + (np.roll(uy, 1, axis=0) - uy)


def tv_objective(f: np.ndarray, s: Sinogram, cfg: ReconConfig) -> float:
    """Data fidelity plus weighted isotropic TV of the iterate."""
    gx, gy = _grad(np.asarray(f, dtype=float))
    fid = float(np.sum((forward(f, s.geometry).data - s.data) ** 2))
    return fid + cfg.tv_weight * float(np.hypot(gx, gy).sum())


def tv_solve(f0, s: Sinogram, cfg: ReconConfig, iters: int, callback=None) -> np.ndarray:
    """Approximately minimise ``||A f - s||^2 + tv_weight * TV_iso(f)``
    subject to ``f >= 0`` when ``cfg.nonneg`` is set.

    Each of the ``iters`` ADMM rounds takes a handful of conjugate-gradient
    steps on the quadratic f-subproblem (then projects onto the constraint),
    applies isotropic soft-shrinkage to the gradient surrogate ``d``, and
    performs dual ascent on the splitting multiplier.  The splitting and
    dual variables start at zero; ``f0`` seeds the image iterate.
    """
    if cfg.tv_weight <= 0 or cfg.admm_penalty <= 0:
        raise ValueError("tv_solve needs tv_weight > 0 and admm_penalty > 0")
    if iters < 1:
        raise ValueError("iters must be positive")
    geometry = s.geometry
    n = geometry.n_det
    f = np.zeros((n, n)) if f0 is None else np.array(f0, dtype=float)
    if f.shape != (n, n):
        raise ValueError(f"f0 must be {n} x {n}")
    lam = cfg.tv_weight
    mu = cfg.admm_penalty

    dx = np.zeros_like(f)
    dy = np.zeros_like(f)
    bx = np.zeros_like(f)
    by = np.zeros_like(f)
    at_s = adjoint(s)

    def quadratic(v):
        return 2.0 * adjoint(forward(v, geometry)) + mu * _grad_t(*_grad(v))

    for it in range(iters):
        rhs = 2.0 * at_s + mu * _grad_t(dx - bx, dy - by)
        f = _cg(quadratic, rhs, f, CG_STEPS)
        if cfg.nonneg:
            np.maximum(f, 0.0, out=f)
        gx, gy = _grad(f)
        vx = gx + bx
        vy = gy + by
        mag = np.hypot(vx, vy)
        scale = np.maximum(mag - lam / mu, 0.0) / np.where(mag > 0, mag, 1.0)
        dx = vx * scale
        dy = vy * scale
        bx = bx + gx - dx
        by = by + gy - dy
        if callback is not None:
            callback(it, f)
    return f


def _cg(op, rhs, x0, steps):
    """A few conjugate-gradient steps on ``op(x) = rhs`` from ``x0``."""
    x = x0.copy()
    r = rhs - op(x)
    p = r.copy()
    rs = float(np.vdot(r, r).real)
    for _ in range(steps):
        if rs == 0.0:
            break
        ap = op(p)
        alpha = rs / float(np.vdot(p, ap).real)
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.vdot(r, r).real)
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x


def solve(s: Sinogram, cfg: ReconConfig, n_iters: int, f0=None, callback=None) -> np.ndarray:
    """Run ``n_iters`` iterations of the configured solver from ``f0``
    (zeros by default) and return the final image."""
    if n_iters < 1:
        raise ValueError("n_iters must be positive")
    n = s.geometry.n_det
    if cfg.solver == "tv":
        start = np.zeros((n, n)) if f0 is None else np.array(f0, dtype=float)
        return tv_solve(start, s, cfg, n_iters, callback=callback)
    f = np.zeros((n, n)) if f0 is None else np.array(f0, dtype=float)
    if f.shape != (n, n):
        raise ValueError(f"f0 must be {n} x {n}")
    for it in range(n_iters):
        f = sirt_step(f, s, cfg)
        if callback is not None:
            callback(it, f)
    return f


def residual(f: np.ndarray, s: Sinogram) -> float:
    """Relative data residual ``||A f - s|| / ||s||``."""
    denom = float(np.linalg.norm(s.data))
    if denom == 0.0:
        raise ZeroDivisionError("sinogram is identically zero")
    return float(np.linalg.norm(forward(f, s.geometry).data - s.data)) / denom
