"""Test objects: the classic head phantom, seeded geometric phantoms, and a
blob volume for slice-resolved experiments.

All generators sample shape membership at pixel centres with no
anti-aliasing, and keep their support strictly inside the inscribed circle
(radius ``0.95 * n / 2``) so that projections carry no mass past the
detector edge and circular shifts of projections stay physically
meaningful.
"""

from __future__ import annotations

import numpy as np

__all__ = ["blob_volume", "shapes_phantom", "shepp_logan"]

# Classic 10-ellipse head phantom: (intensity, a, b, x0, y0, phi_degrees)
# on the unit square; intensities add where ellipses overlap.
HEAD_ELLIPSES = (
    (1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0),
    (0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
)


def shepp_logan(n: int) -> np.ndarray:
    """Classic 10-ellipse head phantom, rescaled to span [0, 1].

    Pixel ``(i, j)`` samples the analytic phantom at
    ``x = (j - c) * 2 / n``, ``y = (c - i) * 2 / n`` with ``c = (n - 1) / 2``
    (pixel centres, +y up).  If the ellipse table ever reached past 0.95 of
    the unit circle the coordinates would be shrunk to restore the margin;
    the classic table needs no shrink (max extent 0.92).
    """
    if n < 16:
        raise ValueError("n must be at least 16")
    extent = max(np.hypot(x0, y0) + max(a, b) for _, a, b, x0, y0, _ in HEAD_ELLIPSES)
    factor = 1.0 if extent <= 0.95 else 0.95 / extent

    c = (n - 1) / 2.0
    x = (np.arange(n) - c) * (2.0 / n)
    y = (c - np.arange(n)) * (2.0 / n)
    xx, yy = np.meshgrid(x, y)

    img = np.zeros((n, n))
    for inten, a, b, x0, y0, phi in HEAD_ELLIPSES:
        a, b, x0, y0 = a * factor, b * factor, x0 * factor, y0 * factor
        ct = np.cos(np.radians(phi))
        st = np.sin(np.radians(phi))
        xs = xx - x0
        ys = yy - y0
        xr = xs * ct + ys * st
        yr = -xs * st + ys * ct
        img += inten * (((xr / a) ** 2 + (yr / b) ** 2) <= 1.0)

    img -= img.min()
    peak = img.max()
    if peak > 0:
        img /= peak
    return img


def _shape_slots(variant: int) -> list[str]:
    # Shape mix per variant; slots are placed on a ring so they never overlap.
    recipes = {
        1: ["rect", "disk"],
        2: ["disk", "annulus", "disk"],
        3: ["rect", "rect", "disk"],
        4: ["annulus", "rect", "disk"],
    }
    if variant not in recipes:
        raise ValueError("variant must be one of 1..4")
    return recipes[variant]


def _shapes_recipe(n: int, variant: int, seed: int) -> list[dict]:
    """Shape list for :func:`shapes_phantom`: type, placement, dimensions and
    intensity of every constituent.  Placement jitter is seeded; sizes are
    fixed fractions of the support radius so analytic masses are stable.
    Rectangles use integer pixel index ranges (their rasterised pixel count
    is exactly width x height)."""
    slots = _shape_slots(variant)
    count = len(slots)
    rng = np.random.default_rng(seed)
    support = 0.95 * n / 2.0
    centre = (n - 1) / 2.0
    ring = 0.5 * support
    size = (0.45 if count == 2 else 0.40) * support
    jitter = max(1, int(round(0.02 * support)))

    palette = np.array([0.9, 0.6, 0.75, 0.45])
    intensities = rng.permutation(palette)[:count]
    start_angle = rng.uniform(0.0, 2.0 * np.pi)

    shapes = []
    for s, kind in enumerate(slots):
        ang = start_angle + 2.0 * np.pi * s / count
        cy = centre - ring * np.sin(ang) + rng.integers(-jitter, jitter + 1)
        cx = centre + ring * np.cos(ang) + rng.integers(-jitter, jitter + 1)
        inten = float(intensities[s])
        if kind == "rect":
            half_w = max(3, int(round(0.35 * size)))
            half_h = max(3, int(round(0.45 * size)))
            i_lo = int(round(cy)) - half_h
            j_lo = int(round(cx)) - half_w
            shapes.append({
                "kind": "rect",
                "i_lo": i_lo, "i_hi": i_lo + 2 * half_h,   # exclusive
                "j_lo": j_lo, "j_hi": j_lo + 2 * half_w,
                "intensity": inten,
            })
        elif kind == "disk":
            shapes.append({
                "kind": "disk",
                "cy": float(cy), "cx": float(cx),
                "radius": 0.9 * size,
                "intensity": inten,
            })
        else:
            shapes.append({
                "kind": "annulus",
                "cy": float(cy), "cx": float(cx),
                "r_outer": 0.9 * size,
                "r_inner": 0.5 * 0.9 * size,
                "intensity": inten,
            })
    return shapes


def shapes_phantom(n: int, variant: int, seed: int) -> np.ndarray:
    """Deterministic arrangement of rectangles, disks and annuli.

    The same ``(n, variant, seed)`` always yields the identical image.
    Shapes sit on a ring inside the support circle with seeded jitter and
    never overlap, so the total image mass is the sum of the individual
    shape masses (rectangle edges fall on pixel boundaries, making their
    pixel count exact).
    """
    if n < 16:
        raise ValueError("n must be at least 16")
    img = np.zeros((n, n))
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    for shape in _shapes_recipe(n, variant, seed):
        if shape["kind"] == "rect":
            img[shape["i_lo"]:shape["i_hi"], shape["j_lo"]:shape["j_hi"]] += shape["intensity"]
        else:
            d2 = (ii - shape["cy"]) ** 2 + (jj - shape["cx"]) ** 2
            if shape["kind"] == "disk":
                img += shape["intensity"] * (d2 <= shape["radius"] ** 2)
            else:
                ring = (d2 <= shape["r_outer"] ** 2) & (d2 > shape["r_inner"] ** 2)
                img += shape["intensity"] * ring
    return img


def _blob_recipe(nx: int, ny: int, nz: int, seed: int) -> list[dict]:
    """Ellipsoid list for :func:`blob_volume`: three disjoint solids spread
    along the rotation axis, each with two strictly interior pores."""
    rng = np.random.default_rng(seed)
    support_yz = 0.95 * min(ny, nz) / 2.0
    cy = (ny - 1) / 2.0
    cz = (nz - 1) / 2.0

    ellipsoids = []
    for frac in (0.30, 0.50, 0.70):
        ax = 0.085 * nx * rng.uniform(0.9, 1.0)
        ay = support_yz * rng.uniform(0.38, 0.45)
        az = support_yz * rng.uniform(0.38, 0.45)
        centre = (
            frac * nx + rng.uniform(-0.005, 0.005) * nx,
            cy + rng.uniform(-0.18, 0.18) * support_yz,
            cz + rng.uniform(-0.18, 0.18) * support_yz,
        )
        pores = []
        for sign in (-1.0, 1.0):
            off = (
                sign * 0.35 * ax * rng.uniform(0.8, 1.0),
                sign * 0.35 * ay * rng.uniform(0.8, 1.0),
                -sign * 0.35 * az * rng.uniform(0.8, 1.0),
            )
            pores.append({
                "centre": tuple(c + o for c, o in zip(centre, off)),
                "semi": (0.25 * ax, 0.25 * ay, 0.25 * az),
            })
        ellipsoids.append({
            "centre": centre,
            "semi": (ax, ay, az),
            "intensity": float(rng.uniform(0.6, 1.0)),
            "pores": pores,
        })
    return ellipsoids


def blob_volume(nx: int, ny: int, nz: int, seed: int) -> np.ndarray:
    """Seeded volume of disjoint solid ellipsoids with interior pores.

    Values lie in [0, 1] and the support stays inside the inscribed cylinder
    about the x-axis (and well away from the x boundaries), so the volume
    can be projected about that axis without clipping.  Pores are carved to
    zero, hence the total mass is the analytic ellipsoid volume sum minus
    the pore volumes (up to voxelisation).
    """
    if min(nx, ny, nz) < 16:
        raise ValueError("volume dimensions must be at least 16")
    vol = np.zeros((nx, ny, nz))
    xs = np.arange(nx)[:, None, None]
    ys = np.arange(ny)[None, :, None]
    zs = np.arange(nz)[None, None, :]

    def inside(centre, semi):
        return (
            ((xs - centre[0]) / semi[0]) ** 2
            + ((ys - centre[1]) / semi[1]) ** 2
            + ((zs - centre[2]) / semi[2]) ** 2
        ) <= 1.0

    for ball in _blob_recipe(nx, ny, nz, seed):
        body = inside(ball["centre"], ball["semi"])
        for pore in ball["pores"]:
            body &= ~inside(pore["centre"], pore["semi"])
        vol[body] = ball["intensity"]
    return vol
