"""Alignment engines: phase-based shift recovery and projection matching.

Both engines run the same alternating scheme: a few solver iterations on the
current (partially realigned) data, one shift estimate per angle against the
reprojection of the intermediate image, then realignment of the raw data by
the accumulated estimates.  They differ only in the estimator:

* phase-based alignment (PBA) reads each column displacement from the phase
  of the ratio of low fractional-frequency DFT coefficients, averaged over a
  grid of frequencies -- giving real-valued shifts from a handful of stable
  spectral samples;
* projection matching (PM) picks the integer lag maximising circular
  cross-correlation, optionally after hard low-pass filtering both signals
  (PM works poorly without the filter; see the method comparisons).

Estimates are reported in the :mod:`phasetomo.misalign` sign convention:
``pba_estimate(apply_shifts(s, e), forward(f, g)) ~= e`` for data that is
consistent with the image ``f``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from . import recon
from .fourier import best_circular_lag, freq_grid
from .misalign import apply_shifts
from .projector import Sinogram, forward

__all__ = [
    "AlignConfig",
    "ShiftHistory",
    "pba_estimate",
    "pba_run",
    "pm_run",
    "projection_match",
    "run",
]


@dataclass
class AlignConfig:
    """Alignment method and loop controls.

    method : "pba", "pm", "pm_lpf" or "none"
    outer_updates : number of shift updates (the alternating loop length)
    inner_iters : solver iterations between consecutive shift updates
    freqs : fractional frequency grid for the phase estimator
    pm_max_lag : correlation search half-width for projection matching
    lpf_cutoff : bin frequency (1-based, mirrored) from which integer FFT
        bins are zeroed in the filtered PM variant
    """

    method: str = "pba"
    outer_updates: int = 15
    inner_iters: int = 10
    freqs: np.ndarray = field(default_factory=freq_grid)
    pm_max_lag: int = 20
    lpf_cutoff: float = 3.0

    def __post_init__(self):
        if self.method not in ("pba", "pm", "pm_lpf", "none"):
            raise ValueError("method must be one of pba, pm, pm_lpf, none")
        if self.outer_updates < 1 or self.inner_iters < 1:
            raise ValueError("outer_updates and inner_iters must be positive")
        self.freqs = np.asarray(self.freqs, dtype=float)
        if self.freqs.size == 0 or np.any(self.freqs <= 1.0):
            raise ValueError("frequency grid values must exceed 1")
        if self.pm_max_lag < 1:
            raise ValueError("pm_max_lag must be positive")
        if self.lpf_cutoff <= 1.0:
            raise ValueError("lpf_cutoff must exceed 1")


@dataclass
class ShiftHistory:
    """Per-update shift estimates (detector bins), one array per update."""

    updates: list = field(default_factory=list)

    def append(self, eps):
        self.updates.append(np.asarray(eps, dtype=float))

    def cumulative(self) -> np.ndarray:
        """Net correction per angle accumulated over all updates."""
        if not self.updates:
            raise ValueError("shift history is empty")
        return np.sum(self.updates, axis=0)

    def __len__(self) -> int:
        return len(self.updates)


def pba_estimate(s_data: Sinogram, s_reproj: Sinogram, freqs=None) -> np.ndarray:
    """Per-angle displacement of ``s_data`` relative to ``s_reproj``.

    For each angle the phase of ``F(reference)_k * conj(F(data)_k)`` is read
    on every grid frequency and converted to a shift; the per-frequency
    values are averaged.  Low fractional frequencies keep the phase well
    inside the principal branch for any displacement up to half the detector
    (the default grid tops out at k = 2).

    Frequencies whose reference coefficient is numerically zero are skipped;
    an angle with no usable frequency estimates 0.  Positive values mean the
    data column sits where :func:`phasetomo.misalign.apply_shifts` with the
    same value would have put it.
    """
    if s_data.data.shape != s_reproj.data.shape:
        raise ValueError("data and reprojection must share a geometry")
    freqs = freq_grid() if freqs is None else np.asarray(freqs, dtype=float)
    n = s_data.geometry.n_det
    if np.any(freqs <= 1.0) or np.any(freqs >= n + 1):
        raise ValueError(f"grid frequencies must lie in (1, {n + 1})")

    bins = np.exp(
        -2j * np.pi * np.outer(freqs - 1.0, np.arange(n)) / n
    ) / np.sqrt(n)
    c_data = bins @ s_data.data      # (K, M)
    c_ref = bins @ s_reproj.data
    ref_norms = np.linalg.norm(s_reproj.data, axis=0)
    usable = np.abs(c_ref) >= 1e-12 * ref_norms[None, :]

    per_freq = n * np.angle(c_ref * np.conj(c_data)) / (
        2.0 * np.pi * (freqs - 1.0)[:, None]
    )
    per_freq = np.where(usable, per_freq, 0.0)
    counts = usable.sum(axis=0)
    return per_freq.sum(axis=0) / np.maximum(counts, 1)


def _lowpass(v: np.ndarray, cutoff: float) -> np.ndarray:
    """Zero every integer FFT bin whose mirrored 1-based bin frequency is
    at or above ``cutoff`` (conjugate partners included)."""
    n = v.shape[0]
    spec = np.fft.fft(v)
    j = np.arange(n)
    folded = np.minimum(j, n - j)
    spec[folded + 1.0 >= cutoff] = 0.0
    return np.fft.ifft(spec).real


def projection_match(d: np.ndarray, p: np.ndarray, max_lag: int, lpf: float | None = None) -> int:
    """Integer displacement of ``d`` relative to ``p`` by circular
    cross-correlation over lags in ``[-max_lag, max_lag]``.

    With ``lpf`` set, both signals are hard low-pass filtered first (all
    integer bins with mirrored bin frequency >= ``lpf`` zeroed).  Ties
    resolve toward the smaller ``|lag|``.  The sign matches
    :func:`pba_estimate`: for ``d = np.roll(p, L)`` the result is ``L``.
    """
    d = np.asarray(d, dtype=float)
    p = np.asarray(p, dtype=float)
    if lpf is not None:
        if lpf <= 1.0:
            raise ValueError("lpf cutoff must exceed 1")
        d = _lowpass(d, lpf)
        p = _lowpass(p, lpf)
    return best_circular_lag(d, p, max_lag)


def _run_loop(s_tilde: Sinogram, recon_cfg, align_cfg: AlignConfig, estimator):
    """Alternate solver bursts with shift updates.

    Keeps a cumulative shift estimate and always realigns the pristine input
    by the running total (rather than compounding interpolations), so the
    final data equals ``apply_shifts(s_tilde, -history.cumulative())``.
    """
    geometry = s_tilde.geometry
    f = np.zeros((geometry.n_det, geometry.n_det))
    cum = np.zeros(geometry.n_angles)
    history = ShiftHistory()
    current = s_tilde.copy()
    for _ in range(align_cfg.outer_updates):
        f = recon.solve(current, recon_cfg, align_cfg.inner_iters, f0=f)
        reproj = forward(f, geometry)
        eps = estimator(current, reproj, align_cfg)
        cum = cum + eps
        current = apply_shifts(s_tilde, -cum)
        history.append(eps)
    return f, current, history


def pba_run(s_tilde: Sinogram, recon_cfg, align_cfg: AlignConfig):
    """Phase-based alignment loop.

    Returns ``(image, realigned, history)``: the image from the final solver
    burst, the input realigned by the accumulated shift estimates, and the
    per-update estimates.
    """

    def estimator(current, reproj, cfg):
        return pba_estimate(current, reproj, cfg.freqs)

    return _run_loop(s_tilde, recon_cfg, align_cfg, estimator)


def pm_run(s_tilde: Sinogram, recon_cfg, align_cfg: AlignConfig):
    """Projection-matching loop (filtered when ``method == 'pm_lpf'``).

    Same alternating scheme and return values as :func:`pba_run`, with the
    integer-lag correlation estimator.
    """
    if align_cfg.method not in ("pm", "pm_lpf"):
        raise ValueError("pm_run expects method 'pm' or 'pm_lpf'")
    lpf = align_cfg.lpf_cutoff if align_cfg.method == "pm_lpf" else None

    def estimator(current, reproj, cfg):
        return np.array([
            float(projection_match(current.data[:, m], reproj.data[:, m],
                                   cfg.pm_max_lag, lpf=lpf))
            for m in range(current.geometry.n_angles)
        ])

    return _run_loop(s_tilde, recon_cfg, align_cfg, estimator)


def run(s: Sinogram, recon_cfg, align_cfg: AlignConfig):
    """Dispatch on ``align_cfg.method``; ``"none"`` reconstructs without any
    alignment for the same total iteration count and returns an empty
    history."""
    if align_cfg.method == "pba":
        return pba_run(s, recon_cfg, align_cfg)
    if align_cfg.method in ("pm", "pm_lpf"):
        return pm_run(s, recon_cfg, align_cfg)
    total = align_cfg.outer_updates * align_cfg.inner_iters
    f = recon.solve(s, recon_cfg, total)
    return f, s.copy(), ShiftHistory()
