"""Alignment under noise, and what TV regularization buys back.

The phase estimator averages over a grid of low frequencies, which is
exactly where projection data keeps its energy, so moderate noise barely
perturbs the recovered shifts.  What noise does ruin is the SIRT
reconstruction itself -- and that part a total-variation prior can
repair on piecewise-constant objects.
"""

import numpy as np

from phasetomo import (AlignConfig, Geometry, ReconConfig, add_noise,
                       apply_shifts, forward, pba_run, random_shifts,
                       registered_error, shapes_phantom, solve)

n = 64
img = shapes_phantom(n, 2, 0)
geom = Geometry(n, np.arange(0.0, 180.0, 3.0))
s = forward(img, geom)
e_true = random_shifts(geom.n_angles, -6, 6, seed=4)

rcfg = ReconConfig(solver="sirt")
acfg = AlignConfig(method="pba", outer_updates=10, inner_iters=10)
total = acfg.outer_updates * acfg.inner_iters

print(f"{'snr':>6}  {'aligned':>8}  {'realigned':>9}  {'shift rms dev':>13}")
realigned_low = None
for snr in (3.5, 5.0, 15.0, 1e6):
    s_noisy = add_noise(s, snr, seed=9)
    e_base = registered_error(solve(s_noisy, rcfg, total), img,
                              subpixel=True).error
    _, realigned, hist = pba_run(apply_shifts(s_noisy, e_true), rcfg, acfg)
    e_pba = registered_error(solve(realigned, rcfg, total), img,
                             subpixel=True).error
    dev = hist.cumulative() - e_true
    dev -= dev.mean()          # ignore the common-offset ambiguity
    label = "inf" if snr > 1e5 else f"{snr:g}"
    print(f"{label:>6}  {e_base:8.3f}  {e_pba:9.3f}  {np.sqrt(np.mean(dev**2)):13.2f}")
    if snr == 3.5:
        realigned_low = realigned

print("\nat SNR 3.5, same realigned data, two solvers:")
e_sirt = registered_error(solve(realigned_low, rcfg, total), img,
                          subpixel=True).error
tv_cfg = ReconConfig(solver="tv", tv_weight=30.0, admm_penalty=150.0)
e_tv = registered_error(solve(realigned_low, tv_cfg, total), img,
                        subpixel=True).error
print(f"  sirt {e_sirt:.3f}   tv {e_tv:.3f}")
