"""Phase estimation vs projection matching on drifting projections.

Cross-correlation misalignment simulates the classic failure mode of
sequential acquisition: each projection is registered against its
neighbour, small errors accumulate into a smooth drift, and naive
projection matching against a blurry intermediate reconstruction can't
see it.  Low-pass filtering the correlation helps; reading the shift
from low frequencies as a phase does better still.
"""

import numpy as np

from phasetomo import (AlignConfig, Geometry, ReconConfig, add_noise,
                       cc_misalign, forward, registered_error, shepp_logan,
                       solve)
from phasetomo import align

n = 128
img = shepp_logan(n)
geom = Geometry(n, np.arange(0.0, 180.0, 5.0))
s = forward(img, geom)

s_cc, drift = cc_misalign(add_noise(s, 15.0, seed=101), max_lag=20)
print(f"accumulated drift: max {np.abs(drift).max():.0f} bins, "
      f"total {np.abs(drift).sum():.0f} bins over {geom.n_angles} angles")

rcfg = ReconConfig(solver="sirt")
L, J = 12, 10
rows = []
for method in ("none", "pm", "pm_lpf", "pba"):
    acfg = AlignConfig(method=method, outer_updates=L, inner_iters=J,
                       pm_max_lag=40, lpf_cutoff=4.0)
    _, realigned, hist = align.run(s_cc, rcfg, acfg)
    err = registered_error(solve(realigned, rcfg, L * J), img,
                           subpixel=True).error
    if method == "none":
        recovered = 0.0
    else:
        resid = np.abs(drift - hist.cumulative()).sum()
        recovered = 1.0 - resid / np.abs(drift).sum()
    rows.append((method, err, recovered))

print(f"\n{'method':>8}  {'error':>7}  {'drift recovered':>15}")
for method, err, rec in rows:
    print(f"{method:>8}  {err:7.3f}  {rec:14.0%}")

print("\nPlain correlation matching barely moves (the drift is what it was")
print("registered against); the filtered variant and the phase estimator")
print("both track it, the phase estimator closest.  Part of the residual")
print("in the recovered column is a global translation, which is harmless")
print("and invisible to the registered error.")
