"""Two-axis alignment of a projection stack, slice by slice.

With rotation about the x-axis, shifts along x and along the detector-y
direction behave differently.  Along x every projection of a cross
-section keeps its total mass, so per-angle x-offsets fall out of
matching 1-D mass profiles -- no reconstruction needed.  The remaining
y-shifts are a 2-D alignment problem repeated per slice; a handful of
cross-sections is enough because all slices share the same per-angle
offset.
"""

import numpy as np

import phasetomo as pt
from phasetomo import (AlignConfig, ReconConfig, blob_volume,
                       default_slice_subset, forward3d, mass_align_x, pba3d,
                       reconstruct_stack, registered_error_volume)

nv = 32
vol = blob_volume(nv, nv, nv, seed=2)
geom = pt.Geometry(nv, np.arange(-75.0, 76.0, 15.0))
stack = forward3d(vol, geom)
m_count = geom.n_angles

# median 0 so the unobservable common x-offset is zero; the correlation
# window stays below the blob spacing (~6 voxels at this size)
rng = np.random.default_rng(10)
x_true = rng.integers(-3, 4, size=m_count)
y_true = rng.integers(-4, 5, size=m_count)
corrupt = np.empty_like(stack.data)
for m in range(m_count):
    p = np.roll(stack.data[:, :, m], int(x_true[m]), axis=0)
    corrupt[:, :, m] = np.roll(p, int(y_true[m]), axis=1)

stack_x, x_off = mass_align_x(pt.ProjectionStack(geom, corrupt), max_lag=4)
print(f"x-offsets, {m_count} angles:")
print(f"  true      {x_true}")
print(f"  recovered {x_off.astype(int)}")

subset = default_slice_subset(nv, 4)
rcfg = ReconConfig(solver="sirt")
acfg = AlignConfig(method="pba", outer_updates=3, inner_iters=5)
hist, vol_rec = pba3d(stack_x, subset, rcfg, acfg)
dy = hist.cumulative() - y_true
th = np.radians(geom.angles)
basis = np.stack([np.cos(th), np.sin(th)], axis=1)
coef, *_ = np.linalg.lstsq(basis, dy, rcond=None)
dy_g = dy - basis @ coef
print(f"\ny-shifts from {subset.size} of {nv} cross-sections "
      f"(slices {subset.tolist()}):")
print(f"  rms deviation {np.sqrt(np.mean(dy**2)):.2f} bins raw, "
      f"{np.sqrt(np.mean(dy_g**2)):.2f} after removing the translation part")

total = acfg.outer_updates * acfg.inner_iters
vol_base = reconstruct_stack(stack, rcfg, total)
e_base = np.linalg.norm(vol_base - vol) / np.linalg.norm(vol)
e_rec = registered_error_volume(vol_rec, vol).error
print(f"\nvolume error: aligned baseline {e_base:.3f}   "
      f"two-axis realigned {e_rec:.3f}")
