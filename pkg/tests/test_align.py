import numpy as np
import pytest
from numpy import testing as npt

from phasetomo import (
    AlignConfig,
    Geometry,
    ReconConfig,
    apply_shifts,
    forward,
    pba_estimate,
    pba_run,
    pm_run,
    random_shifts,
    registered_error,
    shift_totals,
    solve,
)
from phasetomo.align import projection_match, run
from phasetomo.fourier import freq_grid


@pytest.fixture(scope="module")
def disk_sino():
    # small centred disk: sinogram columns keep wide zero margins, so the
    # phase-read shift law is exact for every displacement used here
    n = 64
    g = Geometry(n, np.arange(0.0, 180.0, 7.5))
    c = (n - 1) / 2.0
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    disk = (np.hypot(ii - c, jj - c) <= n / 8.0).astype(float)
    return forward(disk, g)


def test_align_config_validation():
    with pytest.raises(ValueError):
        AlignConfig(method="fancy")
    with pytest.raises(ValueError):
        AlignConfig(method="pba", outer_updates=0)
    with pytest.raises(ValueError):
        AlignConfig(method="pba", freqs=np.array([0.5, 1.5]))
    with pytest.raises(ValueError):
        AlignConfig(method="pba", freqs=np.array([]))
    with pytest.raises(ValueError):
        AlignConfig(method="pm", pm_max_lag=0)
    with pytest.raises(ValueError):
        AlignConfig(method="pm_lpf", lpf_cutoff=1.0)


def test_pba_estimate_recovers_integer_shifts(disk_sino):
    rng = np.random.default_rng(0)
    e = rng.integers(-16, 17, size=disk_sino.geometry.n_angles).astype(float)
    est = pba_estimate(apply_shifts(disk_sino, e), disk_sino)
    npt.assert_allclose(est, e, atol=1e-12)


def test_pba_estimate_recovers_fractional_shifts(disk_sino):
    # fractional shifts interpolate, so the compact support is only
    # approximate; the read is good to a few millipixels
    rng = np.random.default_rng(0)
    e = rng.uniform(-10.0, 10.0, size=disk_sino.geometry.n_angles)
    est = pba_estimate(apply_shifts(disk_sino, e), disk_sino)
    npt.assert_allclose(est, e, atol=0.01)


def test_pba_estimate_shape_check(disk_sino):
    from phasetomo import Sinogram
    other = Sinogram(Geometry(64, [0.0]), disk_sino.data[:, :1])
    with pytest.raises(ValueError):
        pba_estimate(disk_sino, other)


def test_pba_estimate_custom_grid(disk_sino):
    e = np.full(disk_sino.geometry.n_angles, 5.0)
    est = pba_estimate(apply_shifts(disk_sino, e), disk_sino,
                       freqs=freq_grid(k_max=3.0, oversampling=10))
    npt.assert_allclose(est, e, atol=1e-10)


def test_pba_estimate_rejects_out_of_range_grid(disk_sino):
    with pytest.raises(ValueError):
        pba_estimate(disk_sino, disk_sino, freqs=np.array([0.9]))


def test_projection_match_reads_rolls(disk_sino):
    p = disk_sino.data[:, 3]
    for lag in (-9, 0, 6):
        assert projection_match(np.roll(p, lag), p, 12) == lag
        assert projection_match(np.roll(p, lag), p, 12, lpf=3.0) == lag


def test_projection_match_lowpass_kills_high_frequency():
    # a pure Nyquist-rate signal has nothing below the cutoff: the filtered
    # correlation is flat and the tie-break returns lag 0
    d = np.tile([1.0, -1.0], 16)
    assert projection_match(np.roll(d, 3), d, 6, lpf=3.0) == 0
    # mixed content: the low band alone still pins the true lag
    x = np.arange(32)
    base = np.exp(-0.5 * ((x - 15) / 4.0) ** 2)
    mixed = np.roll(base, 4) + 0.8 * np.cos(np.pi * x)
    assert projection_match(mixed, base, 8, lpf=3.0) == 4
    with pytest.raises(ValueError):
        projection_match(d, d, 6, lpf=0.5)


def _loop_setup(seed=1):
    n = 64
    g = Geometry(n, np.arange(0.0, 180.0, 7.5))
    from phasetomo import shepp_logan
    img = shepp_logan(n)
    s = forward(img, g)
    e = random_shifts(g.n_angles, -5, 5, seed=seed)
    return img, s, apply_shifts(s, e), e


def _gauge_removed(dev, angles_deg):
    # a global object translation moves every projection by
    # alpha*cos + beta*sin and is invisible to the data fit; remove the
    # best-fitting such component before judging recovered shifts
    th = np.radians(angles_deg)
    basis = np.stack([np.cos(th), np.sin(th)], axis=1)
    coef, *_ = np.linalg.lstsq(basis, dev, rcond=None)
    return dev - basis @ coef


def test_pba_run_realigns_and_decays():
    img, s, s_tilde, e = _loop_setup()
    rcfg = ReconConfig(solver="sirt")
    acfg = AlignConfig(method="pba", outer_updates=8, inner_iters=5)
    f, realigned, history = pba_run(s_tilde, rcfg, acfg)
    assert len(history) == 8
    totals = shift_totals(history)
    assert totals[-1] < 0.1 * totals[0]
    # realigned data is the pristine input moved by the accumulated estimate
    expect = apply_shifts(s_tilde, -history.cumulative())
    npt.assert_allclose(realigned.data, expect.data, atol=1e-10)
    # shifts are recovered up to the translation ambiguity
    dev = _gauge_removed(history.cumulative() - e, s.geometry.angles)
    assert np.sqrt(np.mean(dev**2)) < 0.35
    # raw realignment still beats the corrupted start by a clear margin
    before = np.linalg.norm(s_tilde.data - s.data)
    after = np.linalg.norm(realigned.data - s.data)
    assert after < 0.6 * before


def test_pm_run_mechanics():
    img, s, s_tilde, e = _loop_setup(seed=2)
    rcfg = ReconConfig(solver="sirt")
    acfg = AlignConfig(method="pm", outer_updates=8, inner_iters=5, pm_max_lag=8)
    f, realigned, history = pm_run(s_tilde, rcfg, acfg)
    cum = history.cumulative()
    # the correlation estimator only ever reports integer lags
    npt.assert_allclose(cum, np.round(cum))
    assert len(history) == 8
    expect = apply_shifts(s_tilde, -cum)
    npt.assert_allclose(realigned.data, expect.data, atol=1e-10)


def test_pm_run_rejects_other_methods():
    img, s, s_tilde, e = _loop_setup()
    with pytest.raises(ValueError):
        pm_run(s_tilde, ReconConfig(), AlignConfig(method="pba"))


def test_run_none_is_plain_reconstruction():
    img, s, s_tilde, e = _loop_setup()
    rcfg = ReconConfig(solver="sirt")
    acfg = AlignConfig(method="none", outer_updates=4, inner_iters=5)
    f, realigned, history = run(s_tilde, rcfg, acfg)
    assert len(history) == 0
    npt.assert_allclose(realigned.data, s_tilde.data)
    npt.assert_allclose(f, solve(s_tilde, rcfg, 20), atol=1e-12)


def test_run_dispatch_matches_direct_calls():
    img, s, s_tilde, e = _loop_setup()
    rcfg = ReconConfig(solver="sirt")
    acfg = AlignConfig(method="pba", outer_updates=3, inner_iters=5)
    f1, r1, h1 = run(s_tilde, rcfg, acfg)
    f2, r2, h2 = pba_run(s_tilde, rcfg, acfg)
    npt.assert_allclose(f1, f2, atol=1e-12)
    npt.assert_allclose(r1.data, r2.data, atol=1e-12)
    npt.assert_allclose(h1.cumulative(), h2.cumulative(), atol=1e-12)


def test_aligned_input_stays_aligned():
    # on clean data the loop may only pick up a harmless global translation
    # (the early blurry reconstruction biases all angles coherently)
    img, s, _, _ = _loop_setup()
    rcfg = ReconConfig(solver="sirt")
    acfg = AlignConfig(method="pba", outer_updates=4, inner_iters=5)
    f, realigned, history = pba_run(s, rcfg, acfg)
    dev = _gauge_removed(history.cumulative(), s.geometry.angles)
    assert np.abs(dev).max() < 0.35
    err = registered_error(f, img, subpixel=True).error
    f_plain = solve(s, rcfg, 20)
    err_plain = registered_error(f_plain, img, subpixel=True).error
    assert err < 1.15 * err_plain
