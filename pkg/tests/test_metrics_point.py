"""Point-set metrics against independent oracles.

Oracle routes deliberately differ from the implementations: Hausdorff is
checked against a full-matrix scan and against a from-scratch atan2-form
haversine; exact Wasserstein against the transportation LP and brute-force
permutation search; JSD against a frozen hand-derived constant.
"""

import itertools
import math

import numpy as np
import pytest
from scipy.optimize import linprog

from trajbench.core.geo import pairwise_distances
from trajbench.core.types import BoundingBox
from trajbench.metrics.grid import GridSpec
from trajbench.metrics.point import (
    EXACT_WASSERSTEIN_MAX_POINTS,
    hausdorff_points,
    hd_wd_pathology_demo,
    hotspot_preservation,
    jsd_from_counts,
    jsd_histogram,
    range_query_error,
    subsample_equal,
    wasserstein,
)

# JSD of counts (1,0) vs (1,1) in bits:
#   p=(1,0), q=(1/2,1/2), m=(3/4,1/4)
#   = 1/2 log2(4/3) + 1/4 log2(2/3) + 1/4
JSD_POINT_MASS_VS_UNIFORM = 0.31127812445913283
assert JSD_POINT_MASS_VS_UNIFORM == pytest.approx(
    0.5 * math.log2(4 / 3) + 0.25 * math.log2(2 / 3) + 0.25, abs=1e-15
)


def _hav_atan2_m(a, b):
    # independent haversine: atan2 form instead of the library's arcsin form
    r = 6_371_000.0
    p1, l1, p2, l2 = map(math.radians, (a[0], a[1], b[0], b[1]))
    s = math.sin((p2 - p1) / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin((l2 - l1) / 2) ** 2
    return 2.0 * r * math.atan2(math.sqrt(s), math.sqrt(1.0 - s))


def _hd_full_matrix(A, B, metric):
    D = pairwise_distances(A, B, metric)
    return max(float(D.min(axis=1).max()), float(D.min(axis=0).max()))


def _hd_from_scratch_m(A, B):
    def directed(P, Q):
        return max(min(_hav_atan2_m(p, q) for q in Q) for p in P)

    return max(directed(A, B), directed(B, A))


def _ot_lp_mean(cost):
    # transportation LP with uniform marginals; by Birkhoff its optimum
    # equals the optimal assignment's mean matched cost
    n, m = cost.shape
    assert n == m
    a_eq = []
    b_eq = []
    for i in range(n):
        row = np.zeros(n * n)
        row[i * n : (i + 1) * n] = 1.0
        a_eq.append(row)
        b_eq.append(1.0 / n)
    for j in range(n):
        col = np.zeros(n * n)
        col[j::n] = 1.0
        a_eq.append(col)
        b_eq.append(1.0 / n)
    res = linprog(cost.ravel(), A_eq=np.array(a_eq), b_eq=np.array(b_eq), method="highs")
    assert res.success
    return float(res.fun)


def _points(rng, n, spread=1.0):
    return rng.normal(0.0, spread, size=(n, 2))


# ---------------------------------------------------------------- hausdorff


def test_hausdorff_equals_full_matrix_scan_exactly():
    rng = np.random.default_rng(0)
    for _ in range(20):
        A = _points(rng, int(rng.integers(1, 60)))
        B = _points(rng, int(rng.integers(1, 60)))
        assert hausdorff_points(A, B, "euclidean") == _hd_full_matrix(A, B, "euclidean")


def test_hausdorff_haversine_matches_independent_formula():
    rng = np.random.default_rng(1)
    A = np.column_stack([rng.uniform(39.8, 40.0, 15), rng.uniform(116.2, 116.5, 15)])
    B = np.column_stack([rng.uniform(39.8, 40.0, 12), rng.uniform(116.2, 116.5, 12)])
    got = hausdorff_points(A, B, "haversine")
    want = _hd_from_scratch_m(A, B)
    assert got == pytest.approx(want, rel=1e-12)
    assert got == _hd_full_matrix(A, B, "haversine")


def test_hausdorff_identity_and_symmetry():
    rng = np.random.default_rng(2)
    A = _points(rng, 30)
    B = _points(rng, 25)
    assert hausdorff_points(A, A) == 0.0
    assert hausdorff_points(A, B) == hausdorff_points(B, A)


def test_hausdorff_single_outlier_dominates():
    A = np.zeros((10, 2))
    B = np.concatenate([np.zeros((9, 2)), [[100.0, 0.0]]])
    assert hausdorff_points(A, B) == 100.0


# --------------------------------------------------------------- wasserstein


def test_exact_small_equals_transport_lp():
    rng = np.random.default_rng(3)
    for n in (5, 12, 25):
        A, B = _points(rng, n), _points(rng, n)
        got = wasserstein(A, B, method="exact_small")
        assert got == pytest.approx(_ot_lp_mean(pairwise_distances(A, B, "euclidean")), abs=1e-9)


def test_exact_small_equals_permutation_search():
    rng = np.random.default_rng(4)
    for n in (2, 4, 6):
        A, B = _points(rng, n), _points(rng, n)
        cost = pairwise_distances(A, B, "euclidean")
        best = min(
            sum(cost[i, p[i]] for i in range(n)) / n
            for p in itertools.permutations(range(n))
        )
        assert wasserstein(A, B, method="exact_small") == pytest.approx(best, abs=1e-12)


def test_exact_small_translation_is_shift_norm():
    # matched mean >= |mean displacement| = |v|, attained by the identity
    rng = np.random.default_rng(5)
    A = _points(rng, 40)
    v = np.array([3.0, -4.0])
    assert wasserstein(A, A + v, method="exact_small") == pytest.approx(5.0, abs=1e-9)


def test_sliced_translation_matches_projection_average():
    rng = np.random.default_rng(6)
    A = _points(rng, 50)
    v = np.array([2.0, 1.0])
    got = wasserstein(A, A + v, method="sliced", n_proj=64, seed=9)
    thetas = np.random.default_rng(9).uniform(0.0, np.pi, 64)
    want = float(np.abs(np.cos(thetas) * v[0] + np.sin(thetas) * v[1]).mean())
    assert got == pytest.approx(want, abs=1e-12)


def test_sliced_lower_bounds_exact():
    # projections are 1-Lipschitz, so every slice lower-bounds the true W1
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(3, 40))
        A, B = _points(rng, n), _points(rng, n)
        sl = wasserstein(A, B, method="sliced", n_proj=50, seed=1)
        ex = wasserstein(A, B, method="exact_small")
        assert sl <= ex + 1e-9


def test_wasserstein_identity_and_scale():
    rng = np.random.default_rng(8)
    A, B = _points(rng, 20), _points(rng, 20)
    assert wasserstein(A, A, method="exact_small") == 0.0
    assert wasserstein(A, A, method="sliced", seed=0) == 0.0
    for method in ("sliced", "exact_small"):
        one = wasserstein(A, B, method=method, seed=2)
        three = wasserstein(3.0 * A, 3.0 * B, method=method, seed=2)
        assert three == pytest.approx(3.0 * one, rel=1e-12)


def test_wasserstein_meters_units_close_to_scaled_euclidean():
    # near Beijing a degree of longitude is ~cos(lat) of a degree of latitude;
    # the meters route must roughly track the projected euclidean one
    rng = np.random.default_rng(9)
    lat = rng.uniform(39.8, 40.0, 30)
    lon = rng.uniform(116.2, 116.5, 30)
    A = np.column_stack([lat, lon])
    B = A + np.array([0.01, 0.0])
    d = wasserstein(A, B, method="exact_small", units="meters")
    assert d == pytest.approx(0.01 * 111_194.926644, rel=1e-3)


def test_wasserstein_input_validation():
    A = np.zeros((3, 2))
    with pytest.raises(ValueError, match="equal size"):
        wasserstein(A, np.zeros((4, 2)))
    with pytest.raises(ValueError, match="method"):
        wasserstein(A, A, method="fast")
    with pytest.raises(ValueError, match="units"):
        wasserstein(A, A, units="furlongs")
    with pytest.raises(ValueError, match="n_proj"):
        wasserstein(A, A, method="sliced", n_proj=0)
    big = np.zeros((EXACT_WASSERSTEIN_MAX_POINTS + 1, 2))
    with pytest.raises(ValueError, match="limited"):
        wasserstein(big, big, method="exact_small")
    with pytest.raises(ValueError, match="empty"):
        wasserstein(np.zeros((0, 2)), np.zeros((0, 2)))


def test_subsample_equal_deterministic_and_ordered():
    rng = np.random.default_rng(10)
    A = _points(rng, 50)
    B = _points(rng, 20)
    a1, b1 = subsample_equal(A, B, seed=4)
    a2, b2 = subsample_equal(A, B, seed=4)
    assert len(a1) == len(b1) == 20
    np.testing.assert_array_equal(a1, a2)
    np.testing.assert_array_equal(b1, B)
    # subsampled rows keep their original relative order
    idx = [int(np.flatnonzero((A == row).all(axis=1))[0]) for row in a1]
    assert idx == sorted(idx)


# ----------------------------------------------------------------------- jsd


def test_jsd_frozen_value():
    assert jsd_from_counts(np.array([1, 0]), np.array([1, 1])) == pytest.approx(
        JSD_POINT_MASS_VS_UNIFORM, abs=1e-15
    )


def test_jsd_bounds_identity_symmetry():
    assert jsd_from_counts(np.array([3, 5]), np.array([3, 5])) == 0.0
    assert jsd_from_counts(np.array([7, 0]), np.array([0, 11])) == 1.0
    a, b = np.array([1, 2, 3]), np.array([4, 0, 1])
    assert jsd_from_counts(a, b) == pytest.approx(jsd_from_counts(b, a), abs=1e-15)
    assert 0.0 <= jsd_from_counts(a, b) <= 1.0


def test_jsd_scale_invariant_in_counts():
    a, b = np.array([1, 2, 3]), np.array([2, 2, 2])
    assert jsd_from_counts(10 * a, b) == pytest.approx(jsd_from_counts(a, b), abs=1e-15)


def test_jsd_empty_side_rejected():
    with pytest.raises(ValueError, match="non-empty"):
        jsd_from_counts(np.array([0, 0]), np.array([1, 1]))


def test_jsd_histogram_identical_sets_zero():
    rng = np.random.default_rng(12)
    pts = np.column_stack([rng.uniform(0, 4, 100), rng.uniform(0, 8, 100)])
    g = GridSpec(BoundingBox(0.0, 4.0, 0.0, 8.0), nx=8, ny=4)
    assert jsd_histogram(pts, pts, g) == 0.0


# --------------------------------------------------------------- range query


def _unit_cloud(rng, n):
    return np.column_stack([rng.uniform(0, 1, n), rng.uniform(0, 1, n)])


def test_range_query_identity_zero():
    rng = np.random.default_rng(13)
    real = _unit_cloud(rng, 300)
    assert range_query_error(real, real, n_queries=50, seed=3) == 0.0


def test_range_query_empty_gen_all_covered():
    # radius_frac 2.0 makes every query cover the whole box: each query sees
    # all real points and no generated ones, a per-query error of exactly 1
    rng = np.random.default_rng(14)
    real = _unit_cloud(rng, 100)
    err = range_query_error(real, np.zeros((0, 2)), n_queries=25, radius_frac=2.0, seed=5)
    assert err == 1.0


def test_range_query_halved_density_is_half():
    rng = np.random.default_rng(15)
    singles = _unit_cloud(rng, 80)
    doubled = np.concatenate([singles, singles])
    err = range_query_error(doubled, singles, n_queries=25, radius_frac=2.0, seed=6)
    assert err == 0.5


def test_range_query_validation():
    real = np.zeros((3, 2))
    with pytest.raises(ValueError, match="n_queries"):
        range_query_error(real, real, n_queries=0)
    with pytest.raises(ValueError, match="radius_frac"):
        range_query_error(real, real, radius_frac=0.0)


# ------------------------------------------------------------------ hotspots


def _grid22():
    return GridSpec(BoundingBox(0.0, 2.0, 0.0, 2.0), nx=2, ny=2)


def _in_cell(ix, iy, count):
    # cell centers of the 2x2 unit-cell grid above
    return np.tile([[iy + 0.5, ix + 0.5]], (count, 1))


def test_hotspot_hand_case():
    g = _grid22()
    real = np.concatenate([_in_cell(0, 0, 3), _in_cell(1, 1, 2), _in_cell(0, 1, 1)])
    gen = np.concatenate([_in_cell(0, 0, 3), _in_cell(1, 0, 2)])
    out = hotspot_preservation(real, gen, g, k=2)
    # real top-2 = {flat 0, flat 3}; gen top-2 = {flat 0, flat 2}
    assert out == {"recall_at_k": 0.5, "jaccard": 1 / 3, "k": 2.0}


def test_hotspot_perfect_match():
    g = _grid22()
    real = np.concatenate([_in_cell(0, 0, 5), _in_cell(1, 1, 3)])
    out = hotspot_preservation(real, real, g, k=2)
    assert out["recall_at_k"] == 1.0 and out["jaccard"] == 1.0


def test_hotspot_ties_break_to_lower_flat_index():
    g = _grid22()
    # every cell holds one real point: top-2 must be flat cells {0, 1}
    real = np.concatenate([_in_cell(ix, iy, 1) for ix in (0, 1) for iy in (0, 1)])
    gen = np.concatenate([_in_cell(1, 1, 5), _in_cell(0, 0, 1)])
    out = hotspot_preservation(real, gen, g, k=2)
    # gen top-2 = {3, 0}; real top-2 = {0, 1}; intersection = {0}
    assert out["recall_at_k"] == 0.5


def test_hotspot_validation():
    g = _grid22()
    pts = _in_cell(0, 0, 2)
    with pytest.raises(ValueError, match="k"):
        hotspot_preservation(pts, pts, g, k=0)
    with pytest.raises(ValueError, match="k"):
        hotspot_preservation(pts, pts, g, k=5)
    outside = np.array([[10.0, 10.0]])
    with pytest.raises(ValueError, match="no grid cell"):
        hotspot_preservation(outside, pts, g, k=1)


# ------------------------------------------------------------ pathology demo


def test_pathology_demo_separates_the_metrics():
    out = hd_wd_pathology_demo(seed=0)
    assert out["hd_separated"] >= 4.0 * out["hd_outlier"]
    assert out["wd_rel_change"] <= 0.05
    assert out["hd_ratio"] == out["hd_separated"] / out["hd_outlier"]


def test_pathology_demo_without_outliers_is_baseline():
    base = hd_wd_pathology_demo(seed=1, n_outliers=0)
    assert base["hd_outlier"] == base["hd_separated"]
    assert base["wd_outlier"] == base["wd_separated"]
    assert base["hd_ratio"] == 1.0
    assert base["wd_rel_change"] == 0.0


def test_pathology_demo_deterministic():
    assert hd_wd_pathology_demo(seed=3) == hd_wd_pathology_demo(seed=3)
