import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from contextmeasure.colorimetry import ciede2000, ciede2000_clamped, rgb_to_lab
from contextmeasure.selftest import SHARMA_PAIRS

skimage_color = pytest.importorskip("skimage.color")


def test_sharma_pairs():
    got = ciede2000(SHARMA_PAIRS[:, 0:3], SHARMA_PAIRS[:, 3:6])
    assert np.max(np.abs(got - SHARMA_PAIRS[:, 6])) <= 1e-4


def test_symmetric_and_zero_on_identity():
    a, b = SHARMA_PAIRS[:, 0:3], SHARMA_PAIRS[:, 3:6]
    np.testing.assert_allclose(ciede2000(a, b), ciede2000(b, a), atol=1e-12)
    assert np.all(ciede2000(a, a) == 0)


def test_lab_matches_skimage(rng):
    img = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
    np.testing.assert_allclose(rgb_to_lab(img), skimage_color.rgb2lab(img), atol=1e-3)


def test_lab_endpoints():
    lab = rgb_to_lab(np.array([[[0, 0, 0], [255, 255, 255]]], dtype=np.uint8))
    assert lab[0, 0, 0] == pytest.approx(0, abs=1e-9)
    assert lab[0, 1, 0] == pytest.approx(100, abs=1e-3)


def test_clamped_range():
    black = np.zeros(3)
    white = np.array([100.0, 0, 0])
    assert ciede2000_clamped(black, white) == pytest.approx(100.0)
    lab1 = np.array([0.0, -128, 127])
    lab2 = np.array([100.0, 127, -128])
    assert ciede2000_clamped(lab1, lab2) <= 100.0


lab_values = arrays(
    np.float64,
    (8, 3),
    elements=st.floats(-100, 100, allow_nan=False),
).map(lambda a: np.column_stack([np.abs(a[:, 0]), a[:, 1:]]))


@settings(max_examples=50, deadline=None)
@given(lab_values, lab_values)
def test_ciede2000_nonnegative_symmetric(a, b):
    d1, d2 = ciede2000(a, b), ciede2000(b, a)
    assert np.all(d1 >= 0)
    np.testing.assert_allclose(d1, d2, atol=1e-9)
