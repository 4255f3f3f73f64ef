"""Fractional-frequency DFT evaluation and Fourier-domain circular shifts.

The unitary DFT used throughout this package evaluates, for a length-``N``
vector ``g`` and a (possibly fractional) frequency ``k`` in ``[1, N + 1)``,

    F(g)_k = (1 / sqrt(N)) * sum_{n=0}^{N-1} g[n] * exp(-2j*pi*(k - 1)*n / N)

so integer ``k`` lands on the usual FFT bin ``k - 1`` (up to the 1/sqrt(N)
normalisation).  Circularly shifting a vector multiplies its coefficients by
a phase ramp,

    fractional_shift(g, eps)[n] == g[(n + eps) % N]   for integer eps
    F(fractional_shift(g, eps))_k == exp(+2j*pi*(k - 1)*eps / N) * F(g)_k

and every piece of shift bookkeeping in the package follows that single
relation.  Reading the phase of a ratio of coefficients therefore measures a
displacement; see :func:`phase_ratio_shift`.

The ramp relation is an identity at integer ``k`` (below the Nyquist fold
when ``eps`` is fractional).  At fractional ``k`` it additionally requires
that the shift moved no signal mass across the circular boundary: rotating a
sample from index ``N - 1`` to ``0`` multiplies its contribution by
``exp(-2j*pi*(k - 1))``, which is only 1 at integer ``k``.  Signals with zero
margins wider than the shift -- projections of an object lying strictly
inside the detector span, the only place fractional ``k`` is used here --
satisfy this exactly; dense boundary-touching signals do not.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DegenerateFrequencyError",
    "best_circular_lag",
    "dft_at",
    "fractional_shift",
    "freq_grid",
    "phase_ratio_shift",
]

# Reference coefficients smaller than this (relative to the signal norm) carry
# no usable phase and must be skipped by callers.
DEGENERATE_RTOL = 1e-12


class DegenerateFrequencyError(ValueError):
    """The reference spectrum is numerically zero at the requested frequency."""


def freq_grid(k_max: float = 2.0, oversampling: int = 20) -> np.ndarray:
    """Fractional frequency grid ``k = 1 + j / oversampling``, ``j = 1..J``.

    ``J = round((k_max - 1) * oversampling)``, so the default arguments give
    the twenty frequencies 1.05, 1.10, ..., 2.0.  Displacement estimates are
    most reliable on these low frequencies; pushing ``k_max`` much past 3
    runs into phase wrapping for large shifts.
    """
    if oversampling < 1:
        raise ValueError("oversampling must be a positive integer")
    count = int(round((k_max - 1.0) * oversampling))
    if count < 1:
        raise ValueError("k_max must exceed 1 by at least one grid step")
    return 1.0 + np.arange(1, count + 1, dtype=float) / oversampling


def dft_at(g: np.ndarray, k):
    """Unitary DFT of ``g`` at frequency ``k``, by direct summation.

    Parameters
    ----------
    g : array_like, shape (N,)
        Signal to transform.
    k : float or array_like
        Frequency (or frequencies) in ``[1, N + 1)``.  Fractional values
        evaluate the oversampled spectrum between integer FFT bins.

    Returns
    -------
    complex or ndarray of complex
        A scalar when ``k`` is scalar, otherwise one coefficient per entry.
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ValueError("g must be a non-empty 1-D array")
    n = g.shape[0]
    scalar = np.ndim(k) == 0
    k_arr = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(k_arr < 1.0) or np.any(k_arr >= n + 1):
        raise ValueError(f"frequency k must lie in [1, {n + 1})")
    phases = np.exp(-2j * np.pi * np.outer(k_arr - 1.0, np.arange(n)) / n)
    coeff = phases @ g / np.sqrt(n)
    return coeff[0] if scalar else coeff


def fractional_shift(g: np.ndarray, eps) -> np.ndarray:
    """Circularly shift ``g`` by a real number of samples via phase ramps.

    For integer ``eps`` the result is the exact circular shift
    ``out[n] == g[(n + eps) % N]``; fractional values interpolate
    trigonometrically.  ``g`` may be a vector, or a 2-D array whose columns
    are shifted independently when ``eps`` is one value per column.

    Real input maps to real output: bins above ``N/2`` carry the
    conjugate-symmetric (negative-frequency) phase ramp, and for even ``N``
    the Nyquist bin gets the real ramp ``cos(pi * eps)`` -- it has no
    negative-frequency partner to cancel an imaginary part against.
    """
    g = np.asarray(g, dtype=float)
    eps_arr = np.asarray(eps, dtype=float)
    if not np.all(np.isfinite(eps_arr)):
        raise ValueError("shift amounts must be finite")
    if g.ndim not in (1, 2):
        raise ValueError("g must be a vector or a matrix of columns")
    n = g.shape[0]
    freqs = np.fft.fftfreq(n)

    if g.ndim == 1:
        if eps_arr.ndim != 0:
            raise ValueError("a vector takes a single scalar shift")
        ramp = np.exp(2j * np.pi * freqs * eps_arr)
        if n % 2 == 0:
            ramp[n // 2] = np.cos(np.pi * eps_arr)
        return np.fft.ifft(np.fft.fft(g) * ramp).real

    cols = np.broadcast_to(eps_arr, (g.shape[1],))
    ramp = np.exp(2j * np.pi * freqs[:, None] * cols[None, :])
    if n % 2 == 0:
        ramp[n // 2, :] = np.cos(np.pi * cols)
    return np.fft.ifft(np.fft.fft(g, axis=0) * ramp, axis=0).real


def phase_ratio_shift(g_meas: np.ndarray, g_ref: np.ndarray, k: float) -> float:
    """Displacement of ``g_meas`` relative to ``g_ref`` from one spectral ratio.

    Returns ``Re{ N / (2j*pi*(k-1)) * log(F(g_meas)_k / F(g_ref)_k) }`` with
    the principal branch of the logarithm, i.e. the unique shift ``eps`` with
    ``|eps| <= N / (2*(k - 1))`` such that ``fractional_shift(g_ref, eps)``
    matches ``g_meas`` in phase at frequency ``k``.  True displacements of
    larger magnitude alias: the result then differs from the true shift by an
    integer multiple of ``N / (k - 1)``.

    At fractional ``k`` the ratio reads a pure phase only when the
    displacement carried no signal mass around the circular boundary (see the
    module docstring); the estimate is exact for compactly supported signals
    whose zero margins exceed the shift, and biased otherwise.

    Raises
    ------
    DegenerateFrequencyError
        When ``|F(g_ref)_k|`` is below ``1e-12 * ||g_ref||``; such a
        coefficient carries no phase and the caller should skip this ``k``.
    """
    g_ref = np.asarray(g_ref, dtype=float)
    g_meas = np.asarray(g_meas, dtype=float)
    if g_meas.shape != g_ref.shape or g_ref.ndim != 1:
        raise ValueError("signals must be 1-D and of equal length")
    n = g_ref.shape[0]
    k = float(k)
    if not 1.0 < k < n + 1:
        raise ValueError(f"frequency k must lie in (1, {n + 1}) for a shift estimate")
    c_ref = dft_at(g_ref, k)
    if abs(c_ref) <= DEGENERATE_RTOL * np.linalg.norm(g_ref):
        raise DegenerateFrequencyError(
            f"reference spectrum is degenerate at k={k}: |coefficient|={abs(c_ref):.3e}"
        )
    c_meas = dft_at(g_meas, k)
    return n * float(np.angle(c_meas * np.conj(c_ref))) / (2.0 * np.pi * (k - 1.0))


def best_circular_lag(d: np.ndarray, p: np.ndarray, max_lag: int) -> int:
    """Integer lag in ``[-max_lag, max_lag]`` maximising circular correlation.

    The score for lag ``L`` is ``sum_x d[(x + L) % N] * p[x]``; ties resolve
    toward the smaller ``|L|``, negative before positive among equals, so the
    result is deterministic.
    """
    d = np.asarray(d, dtype=float)
    p = np.asarray(p, dtype=float)
    if d.shape != p.shape or d.ndim != 1:
        raise ValueError("signals must be 1-D and of equal length")
    n = d.shape[0]
    if not 0 <= max_lag < n / 2:
        raise ValueError("max_lag must satisfy 0 <= max_lag < N/2")
    corr = np.fft.ifft(np.fft.fft(d) * np.conj(np.fft.fft(p))).real
    best_lag = 0
    best_val = corr[0]
    for mag in range(1, max_lag + 1):
        for lag in (-mag, mag):
            val = corr[lag % n]
            if val > best_val:
                best_val = val
                best_lag = lag
    return best_lag
