import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypervis import UsageError, distance_sq, is_visible, sin_between
from hypervis.euler_products import primes_up_to
from hypervis.polytopes import (
    MAX_FAILING_PAIRS,
    PolytopeFamily,
    avg_norm_distance_CG,
    build_family,
    cg_distance_sums,
    circulant_closed_form_ok,
    distance_report,
    family_report,
    inverse_gap_count,
    inverse_increment_sqsum,
    inverse_mod,
    inverse_pair_count_in_boxes,
    inverse_table,
    spectrum_report,
    visibility_report,
)

SMALL_PRIMES = [p for p in primes_up_to(60) if p >= 3]


def rows(F):
    return [tuple(int(c) for c in r) for r in F.points]


# -- inverses ----------------------------------------------------------------

def test_inverse_mod_examples():
    assert inverse_mod(2, 5) == 3
    assert inverse_mod(0, 7) == 0
    assert inverse_mod(4, 5) == 4
    with pytest.raises(UsageError):
        inverse_mod(2, 9)
    with pytest.raises(UsageError):
        inverse_mod(7, 7)


@pytest.mark.parametrize("p", [2, 3, 5, 101, 10007])
def test_inverse_table_against_pow(p):
    inv = inverse_table(p)
    assert inv[0] == 0
    assert all(int(inv[a]) == pow(a, -1, p) for a in range(1, min(p, 3000)))


# -- construction --------------------------------------------------------------

def test_build_family_examples():
    assert rows(build_family("C", 2)) == [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
    assert rows(build_family("G", 5))[0] == (0, 1, 3, 2, 4)
    assert rows(build_family("B", 5))[2] == (2, 1, 2, 3, 2, 2)


def test_B_wraparound_convention():
    d = 6
    B = rows(build_family("b", d))
    assert B[0] == (0, 1, 0, 0, 0, 0, d)
    assert B[d] == (0, d, d, d, d, d - 1, d)


def test_build_family_errors():
    for args in [("G", 9), ("C", 1), ("B", 0), ("X", 5)]:
        with pytest.raises(UsageError):
            build_family(*args)


@pytest.mark.parametrize("kind,param", [("C", 6), ("G", 7), ("G", 101), ("C", 100)])
def test_circulant_rows_are_rotations(kind, param):
    F = build_family(kind, param)
    row0 = F.points[0]
    assert F.size == F.dim
    for h in range(F.size):
        assert (F.points[h] == np.roll(row0, -h)).all()
    assert sorted(row0.tolist()) == list(range(F.size))


def test_normalizers():
    assert build_family("C", 8).normalizer == 8**1.5
    assert build_family("B", 8).normalizer == 8**1.5
    assert build_family("G", 11).normalizer == 11**1.5


# -- visibility ----------------------------------------------------------------

def visibility_naive(points):
    pts = [tuple(map(int, r)) for r in points]
    return all(is_visible(a, b) for i, a in enumerate(pts) for j, b in enumerate(pts)
               if i != j and a != b)


def test_visibility_examples():
    C5, G5 = build_family("C", 4), build_family("G", 5)
    assert visibility_report(C5, G5).all_pairs_visible
    assert visibility_naive(np.vstack([C5.points, G5.points]))
    assert visibility_report(build_family("G", 101)).all_pairs_visible
    assert visibility_report(build_family("B", 5)).all_pairs_visible


def test_B_small_dimensions():
    # d = 3: every coordinate of every point has parity (0, 1, 0, 1), so all
    # differences are even and no two points see each other
    r3 = visibility_report(build_family("B", 3))
    assert not r3.all_pairs_visible and r3.failing_count == 12
    assert {tuple(x % 2 for x in r) for r in rows(build_family("B", 3))} == {(0, 1, 0, 1)}
    # d = 4 is only reported
    r4 = visibility_report(build_family("B", 4))
    assert isinstance(r4.all_pairs_visible, bool)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(SMALL_PRIMES))
def test_fast_visibility_equals_exhaustive(p):
    C, G = build_family("C", p - 1), build_family("G", p)
    for args in [(C, None), (G, None), (C, G), (G, C)]:
        fast = visibility_report(*args)
        slow = visibility_report(*args, exhaustive=True)
        assert fast.all_pairs_visible == slow.all_pairs_visible
        assert fast.failing_count == slow.failing_count
        assert fast.coincident_pairs == slow.coincident_pairs
        assert sorted(fast.failing_pairs) == sorted(slow.failing_pairs) or \
            fast.failing_count > MAX_FAILING_PAIRS


def test_failing_pairs_expand_correctly():
    # p = 7: C and G share the points whose offsets are not visible; compare listings
    C, G = build_family("C", 6), build_family("G", 7)
    fast = visibility_report(C, G)
    slow = visibility_report(C, G, exhaustive=True)
    assert fast.failing_count == slow.failing_count == 14
    assert sorted(fast.failing_pairs) == sorted(slow.failing_pairs)
    pts = np.vstack([C.points, G.points])
    for i, j in fast.failing_pairs:
        assert not is_visible(pts[i].tolist(), pts[j].tolist())


def test_failing_pairs_capped():
    pts = 2 * np.arange(1, 41, dtype=np.int64).reshape(20, 2)
    F = PolytopeFamily("B", 1, pts, 1.0)
    r = visibility_report(F)
    assert r.failing_count == 20 * 19
    assert len(r.failing_pairs) == MAX_FAILING_PAIRS
    assert not r.all_pairs_visible
    assert r.to_dict()["failing_count"] == 380


def test_coincident_points_excluded():
    C, G = build_family("C", 2), build_family("G", 3)
    r = visibility_report(C, G)
    assert r.coincident_pairs == 6 and r.all_pairs_visible


@pytest.mark.parametrize("kind,param", [("C", 10), ("G", 13), ("B", 12)])
def test_origin_visibility(kind, param):
    r = visibility_report(build_family(kind, param))
    assert r.origin_visible and all(r.origin_visible)


def test_dimension_mismatch():
    with pytest.raises(UsageError):
        visibility_report(build_family("C", 4), build_family("G", 7))


# -- distances -----------------------------------------------------------------

def test_distance_examples():
    r = distance_report(build_family("C", 2))
    assert r.distance_min == pytest.approx(0.866025, abs=1e-6)
    assert r.distance_max == pytest.approx(0.866025, abs=1e-6)
    G = build_family("G", 5)
    assert math.sqrt(distance_sq(*rows(G)[:2])) / 5**1.5 == pytest.approx(0.456070, abs=1e-6)
    assert distance_report(G).distance_max == pytest.approx(0.456070, abs=1e-6)
    B = rows(build_family("B", 100))
    assert abs(math.sqrt(distance_sq(B[10], B[30])) / 100**1.5 - 0.2) <= 5 / 100


def test_circulant_closed_form_small_dims():
    assert all(circulant_closed_form_ok(d) for d in range(2, 61))
    assert distance_report(build_family("C", 12)).closed_form_ok is True


@pytest.mark.parametrize("kind,param", [("C", 9), ("G", 11), ("G", 13)])
def test_rotation_invariance_exact(kind, param):
    R = rows(build_family(kind, param))
    n = len(R)
    for k in range(n):
        for l in range(n):
            assert distance_sq(R[k], R[l]) == distance_sq(R[0], R[(l - k) % n])


@settings(max_examples=10, deadline=None)
@given(st.sampled_from(SMALL_PRIMES))
def test_fast_distances_equal_exhaustive(p):
    C, G = build_family("C", p - 1), build_family("G", p)
    for F, H, pairs in [(C, None, "within"), (G, None, "within"), (G, C, "cross"), (C, G, "union")]:
        a = distance_report(F, H, pairs)
        b = distance_report(F, H, pairs, exhaustive=True)
        assert a.distance_min == b.distance_min and a.distance_max == b.distance_max
        assert a.distance_mean == pytest.approx(b.distance_mean, rel=1e-12)


def test_origin_distances_of_C_and_G():
    for p in primes_up_to(200)[1:]:
        for F in (build_family("C", p - 1), build_family("G", p)):
            od = np.sqrt((F.points.astype(float) ** 2).sum(axis=1)) / p**1.5
            assert np.abs(od - 1 / math.sqrt(3)).max() <= 0.51 / (p - 1)


def test_origin_distances_of_B():
    for d in range(2, 300):
        P = build_family("B", d).points.astype(float)
        od = np.sqrt((P**2).sum(axis=1)) / d**1.5
        h = np.arange(d + 1)
        assert np.abs(od - h / d)[1:].max() <= 5 / d


def cg_sums_naive(p):
    C, G = rows(build_family("C", p - 1)), rows(build_family("G", p))
    t = lambda A, B: sum(distance_sq(a, b) for a in A for b in B)
    return t(C, C), t(G, G), t(C, G)


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_cg_sums_against_direct_summation(p):
    assert cg_distance_sums(p) == cg_sums_naive(p)


def test_average_distance_golden_and_trend():
    t1, t2, t3 = cg_sums_naive(5)
    mean_sq = Fraction(t1 + t2 + 2 * t3, 100)
    assert avg_norm_distance_CG(5) == pytest.approx(math.sqrt(mean_sq) / 5**1.5, rel=1e-15)
    assert avg_norm_distance_CG(5) == pytest.approx(0.4, abs=1e-15)
    gaps = [abs(avg_norm_distance_CG(p) - 1 / math.sqrt(6)) for p in (11, 101, 1009)]
    assert gaps[0] > gaps[1] > gaps[2]
    with pytest.raises(UsageError):
        avg_norm_distance_CG(2)


# -- spectra -------------------------------------------------------------------

def test_spectrum_example_C2():
    s = spectrum_report(build_family("C", 2))
    assert s.count == 6
    assert s.min_sin == pytest.approx(0.916515, abs=1e-6)
    assert s.max_sin == pytest.approx(0.916515, abs=1e-6)


@settings(max_examples=10, deadline=None)
@given(st.sampled_from(SMALL_PRIMES))
def test_fast_spectrum_equals_pairwise(p):
    C, G = build_family("C", p - 1), build_family("G", p)
    for F, H in [(G, None), (C, G)]:
        pts_a = rows(F)
        pts_b = rows(H) if H is not None else pts_a
        sines = [sin_between(a, b) for a in pts_a for b in pts_b if a != b]
        s = spectrum_report(F, H, "cross")
        assert s.count == len(sines)
        assert s.min_sin == pytest.approx(min(sines), abs=1e-12)
        assert s.max_sin == pytest.approx(max(sines), abs=1e-12)
        assert s.mean_sin == pytest.approx(math.fsum(sines) / len(sines), abs=1e-12)


def test_family_report_combines_fields():
    r = family_report(build_family("G", 11), build_family("C", 10))
    d = r.to_dict()
    for key in ("all_pairs_visible", "distance_min", "spectrum", "origin_visible"):
        assert key in d
    assert d["kinds"] == "GxC"


# -- modular inverse statistics ---------------------------------------------------

def test_inverse_gap_examples():
    assert inverse_gap_count(5) == 2
    assert inverse_gap_count(11) == 3
    assert inverse_gap_count(13) == 4


def test_inverse_gap_against_set_count():
    for p in primes_up_to(400):
        naive = len({abs(n - pow(n, -1, p)) for n in range(1, p)})
        assert inverse_gap_count(p) == naive


def sqsum_naive(p, h):
    inv = lambda x: pow(x, -1, p) if x % p else 0
    return sum((inv((x + h) % p) - inv(x)) ** 2 for x in range(p) if x not in (0, p - h))


def test_inverse_sqsum_examples():
    assert inverse_increment_sqsum(5, 1) == 9
    assert inverse_increment_sqsum(7, 1) == 29
    with pytest.raises(UsageError):
        inverse_increment_sqsum(7, 7)


@given(st.sampled_from(primes_up_to(300)[1:]), st.data())
def test_inverse_sqsum_against_loop(p, data):
    h = data.draw(st.integers(1, p - 1))
    assert inverse_increment_sqsum(p, h) == sqsum_naive(p, h)


def test_inverse_sqsum_ratio_large_prime():
    p = 10007
    assert abs(inverse_increment_sqsum(p, 1) / (p**3 / 6) - 1) <= 0.15


def test_inverse_pair_boxes():
    assert inverse_pair_count_in_boxes(7, range(1, 7), range(1, 7)) == 6
    assert inverse_pair_count_in_boxes(7, range(2, 7, 2), range(2, 7, 2)) == 3
    assert inverse_pair_count_in_boxes(5, range(1, 2), range(1, 2)) == 1
    with pytest.raises(UsageError):
        inverse_pair_count_in_boxes(7, range(0, 3), range(1, 3))


@given(st.sampled_from(primes_up_to(200)[1:]), st.data())
def test_inverse_pair_boxes_against_loop(p, data):
    a = data.draw(st.integers(1, p - 1))
    step = data.draw(st.integers(1, 5))
    I = range(a, p, step)
    J = range(1, data.draw(st.integers(1, p - 1)) + 1)
    naive = sum(1 for x, y in product(I, J) if x * y % p == 1)
    assert inverse_pair_count_in_boxes(p, I, J) == naive
