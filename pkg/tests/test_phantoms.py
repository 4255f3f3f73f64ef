import numpy as np
import pytest
from numpy import testing as npt

from phasetomo import blob_volume, shapes_phantom, shepp_logan
from phasetomo.phantoms import _shapes_recipe


def support_margin(img):
    """Distance from the nonzero support to the nearest array edge."""
    rows = np.flatnonzero(img.any(axis=1))
    cols = np.flatnonzero(img.any(axis=0))
    n = img.shape[0]
    return min(rows[0], cols[0], n - 1 - rows[-1], n - 1 - cols[-1])


def test_shepp_logan_basic():
    img = shepp_logan(128)
    assert img.shape == (128, 128)
    assert img.min() == 0.0
    npt.assert_allclose(img.max(), 1.0)
    npt.assert_allclose(img, shepp_logan(128))   # deterministic


def test_shepp_logan_support_inside_circle():
    n = 128
    img = shepp_logan(n)
    c = (n - 1) / 2.0
    ii, jj = np.nonzero(img)
    r = np.hypot(ii - c, jj - c)
    assert r.max() <= 0.95 * n / 2.0 + 1.0


def test_shepp_logan_rejects_tiny():
    with pytest.raises(ValueError):
        shepp_logan(8)


def test_shapes_deterministic_and_seed_sensitive():
    a = shapes_phantom(64, 2, 0)
    npt.assert_allclose(a, shapes_phantom(64, 2, 0))
    assert not np.allclose(a, shapes_phantom(64, 2, 1))
    assert not np.allclose(a, shapes_phantom(64, 3, 0))


@pytest.mark.parametrize("variant", [1, 2, 3, 4])
def test_shapes_mass_matches_recipe(variant):
    # shapes never overlap, so total mass is the analytic sum per shape
    n = 128
    img = shapes_phantom(n, variant, seed=3)
    expected = 0.0
    for shape in _shapes_recipe(n, variant, seed=3):
        if shape["kind"] == "rect":
            area = (shape["i_hi"] - shape["i_lo"]) * (shape["j_hi"] - shape["j_lo"])
            expected += shape["intensity"] * area     # exact: integer edges
        elif shape["kind"] == "disk":
            expected += shape["intensity"] * np.pi * shape["radius"] ** 2
        else:
            ring = shape["r_outer"] ** 2 - shape["r_inner"] ** 2
            expected += shape["intensity"] * np.pi * ring
    npt.assert_allclose(img.sum(), expected, rtol=0.02)


def test_shapes_rect_pixel_count_exact():
    n = 128
    img = shapes_phantom(n, 1, seed=0)
    for shape in _shapes_recipe(n, 1, seed=0):
        if shape["kind"] != "rect":
            continue
        block = img[shape["i_lo"]:shape["i_hi"], shape["j_lo"]:shape["j_hi"]]
        npt.assert_allclose(block, shape["intensity"])


def test_shapes_support_margin():
    assert support_margin(shapes_phantom(128, 2, 0)) >= 2


def test_shapes_validation():
    with pytest.raises(ValueError):
        shapes_phantom(8, 1, 0)
    with pytest.raises(ValueError):
        shapes_phantom(64, 9, 0)


def test_blob_volume_structure():
    vol = blob_volume(48, 48, 48, seed=5)
    assert vol.shape == (48, 48, 48)
    assert vol.min() >= 0.0 and vol.max() <= 1.0
    npt.assert_allclose(vol, blob_volume(48, 48, 48, seed=5))
    # support stays away from the x boundaries and inside the y-z cylinder
    xs = np.flatnonzero(vol.any(axis=(1, 2)))
    assert xs[0] >= 2 and xs[-1] <= 45
    c = 47 / 2.0
    ii, jj = np.nonzero(vol.any(axis=0))
    assert np.hypot(ii - c, jj - c).max() <= 0.95 * 24 + 1.0
    # pores: each solid has interior zeros (carved holes)
    labels = np.unique(vol[vol > 0])
    assert labels.size == 3


def test_blob_volume_rejects_tiny():
    with pytest.raises(ValueError):
        blob_volume(8, 48, 48, seed=0)
