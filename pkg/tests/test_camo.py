import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contextmeasure.camo import (
    CamoParams,
    camouflage_map,
    context_band,
    degree_from_delta,
    extract_patches,
    nn_match,
    overpaint,
    patch_anchors,
    quantify,
    quantify_detailed,
)
from contextmeasure.colorimetry import rgb_to_lab
from contextmeasure.errors import EmptyContext, EmptyCorpus, NoValidPatches
from contextmeasure.synthetic import blob, disk, scene

P = CamoParams()


def block(size=64, lo=30, hi=34):
    y = np.zeros((size, size))
    y[lo:hi, lo:hi] = 1
    return y


def test_band_ring():
    band = context_band(block(), 2)
    expected = np.zeros((64, 64))
    expected[28:36, 28:36] = 1
    expected[30:34, 30:34] = 0
    np.testing.assert_array_equal(band, expected)


def test_band_errors_and_disjointness():
    with pytest.raises(EmptyContext):
        context_band(np.ones((8, 8)), 3)
    y = block()
    assert not (context_band(y, 5) * y).any()


def test_full_frame_grid():
    anchors = patch_anchors(np.ones((64, 64)), P)
    assert len(anchors) == 225
    assert set(anchors[:, 0]) == set(range(0, 57, 4))


def test_dense_grid():
    anchors = patch_anchors(np.ones((20, 20)), CamoParams(dense=True))
    assert len(anchors) == 14 * 14


def test_exclusion_drops_touching_patches():
    y = block()
    band = context_band(y, 10)
    anchors = patch_anchors(band, P, exclude=y)
    for r, c in anchors:
        assert not y[r : r + 7, c : c + 7].any()


def test_uniform_patches_and_lambda_zero():
    lab = np.broadcast_to(np.array([50.0, 10.0, -5.0]), (32, 32, 3)).copy()
    p = extract_patches(lab, np.ones((32, 32)), CamoParams(lam=0))
    assert np.all(p.vectors[:, :-2] == p.vectors[0, :-2])
    assert np.all(p.vectors[:, -2:] == 0)
    assert p.vectors.shape[1] == 3 * 49 + 2


def test_thin_region_has_no_patches():
    region = np.zeros((32, 32))
    region[:, 0] = 1
    with pytest.raises(NoValidPatches):
        extract_patches(np.zeros((32, 32, 3)), region, P)


def test_nn_exact_matches_scan(rng):
    corpus = rng.normal(size=(500, 8))
    queries = rng.normal(size=(50, 8))
    got = nn_match(queries, corpus)
    d = ((queries[:, None, :] - corpus[None]) ** 2).sum(-1)
    np.testing.assert_array_equal(got, d.argmin(axis=1))
    assert np.array_equal(nn_match(corpus[17:18], corpus), [17])


def test_nn_ties_lowest_index():
    corpus = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    assert nn_match(np.zeros((1, 2)), corpus)[0] == 0
    assert nn_match(np.zeros((1, 2)), corpus[::-1])[0] == 0


def test_nn_permutation_invariance(rng):
    corpus = rng.normal(size=(200, 5))
    queries = rng.normal(size=(30, 5))
    perm = rng.permutation(200)
    np.testing.assert_array_equal(perm[nn_match(queries, corpus[perm])], nn_match(queries, corpus))


def test_nn_approximate_bound(rng):
    for _ in range(100):
        corpus = rng.normal(size=(300, 6))
        q = rng.normal(size=(1, 6))
        best = np.sqrt(((corpus - q) ** 2).sum(1)).min()
        got = np.sqrt(((corpus[nn_match(q, corpus, eps=0.1)[0]] - q[0]) ** 2).sum())
        assert got <= 1.1 * best + 1e-12


def test_nn_empty_corpus():
    with pytest.raises(EmptyCorpus):
        nn_match(np.zeros((1, 3)), np.zeros((0, 3)))


def test_overpaint_single_copy(rng):
    lab = rng.normal(size=(20, 20, 3))
    y = np.zeros((20, 20))
    y[2:9, 2:9] = 1
    out, cov = overpaint(lab, y, [[2, 2]], [[10, 12]], 7)
    np.testing.assert_array_equal(out[2:9, 2:9], lab[10:17, 12:19])
    assert cov.sum() == 49
    np.testing.assert_array_equal(out[y == 0], lab[y == 0])


def test_overpaint_overlap_average(rng):
    lab = rng.normal(size=(24, 24, 3))
    y = np.zeros((24, 24))
    y[0:12, 0:12] = 1
    q = np.array([[r, c] for r in (0, 4) for c in (0, 4)])
    src = np.array([[12, 12], [12, 16], [16, 12], [17, 17]])
    out, _ = overpaint(lab, y, q, src, 7)
    # hand accounting pixel by pixel
    for r, c in product(range(12), range(12)):
        vals = [lab[sr + r - qr, sc + c - qc] for (qr, qc), (sr, sc) in zip(q, src) if 0 <= r - qr < 7 and 0 <= c - qc < 7]
        if vals:
            assert 1 <= len(vals) <= 4
            np.testing.assert_allclose(out[r, c], np.mean(vals, axis=0), atol=1e-12)
        else:
            np.testing.assert_array_equal(out[r, c], lab[r, c])


def test_mapping_endpoints():
    assert degree_from_delta(0.0) == 1.0
    assert degree_from_delta(100.0) == 0.0
    assert abs(degree_from_delta(50.0) - math.expm1(4) / math.expm1(8)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 99.9), st.floats(0.01, 10), st.floats(0.1, 20))
def test_mapping_strictly_decreasing(delta, step, gamma):
    assert degree_from_delta(min(delta + step, 100.0), gamma) < degree_from_delta(delta, gamma)


def test_camouflage_map_zero_off_object(rng):
    y = block(16, 4, 10)
    lab = rgb_to_lab(rng.integers(0, 255, (16, 16, 3), dtype=np.uint8))
    d = camouflage_map(lab, rgb_to_lab(np.zeros((16, 16, 3), np.uint8)), y)
    assert np.all(d[y == 0] == 0) and np.all((d >= 0) & (d <= 1))


def test_uncovered_pixels_take_nearest_delta():
    y = block(16, 4, 10)
    r = np.zeros((16, 16, 3))
    i = np.zeros((16, 16, 3))
    i[4:7, 4:10, 0] = 50  # top rows differ, bottom rows match
    covered = np.zeros((16, 16), bool)
    covered[4, 4:10] = True
    covered[9, 4:10] = True
    d = camouflage_map(r, i, y, covered=covered)
    assert np.all(d[5, 4:10] == d[4, 4:10])
    assert np.all(d[8, 4:10] == 1.0)


def test_uniform_scene_is_fully_camouflaged(rng):
    img = np.full((80, 80, 3), (90, 140, 60), np.uint8)
    y = blob(rng, (80, 80), (40, 40), 12)
    res = quantify_detailed(img, y)
    assert res.covered.any()
    assert np.all(res.degree[res.covered] == 1.0)


def test_red_on_blue_is_conspicuous():
    img = np.zeros((64, 64, 3), np.uint8)
    img[..., 2] = 255
    y = disk((64, 64), (32, 32), 10)
    img[y > 0] = (255, 0, 0)
    d = quantify(img, y)
    assert d[y > 0].max() < 0.05


def test_quantify_deterministic_and_bounded(rng):
    y = blob(rng, (64, 64), (32, 32), 12)
    img = scene(y, rng)
    d1, d2 = quantify(img, y), quantify(img, y)
    np.testing.assert_array_equal(d1, d2)
    assert np.all(d1[y == 0] == 0) and d1.min() >= 0 and d1.max() <= 1


def test_crop_matches_larger_canvas(rng):
    # band (k=20) stays inside the small frame, so only the crop differs
    y = blob(rng, (96, 96), (48, 48), 8)
    rows, cols = np.nonzero(y)
    assert rows.min() >= 27 and cols.min() >= 27 and rows.max() <= 68 and cols.max() <= 68
    img = scene(y, rng)
    big_y = np.zeros((200, 200))
    big_img = rng.integers(0, 255, (200, 200, 3), dtype=np.uint8)
    big_y[52:148, 52:148] = y
    big_img[52:148, 52:148] = img
    d = quantify(img, y)
    np.testing.assert_array_equal(quantify(big_img, big_y)[52:148, 52:148], d)
