import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lieconc.rootdata import (
    GroupSpec,
    InvalidSpecError,
    RootSystem,
    SeriesTag,
    build_root_system,
    closed_form_log_volume,
    coroot_length_counts,
    log_volume_ratio,
    macdonald_log_volume,
    normalized_volume_ratio,
    ratio_asymptote,
    volume_table,
)

SERIES = list(SeriesTag)


def series_and_n(max_n=30):
    return st.sampled_from(SERIES).flatmap(
        lambda s: st.tuples(st.just(s), st.integers(s.min_n, max_n)))


def test_a3_simple_roots_live_in_trace_zero_hyperplane():
    rs = build_root_system("A", 3)
    assert np.allclose(rs.simple_roots, [[1, -1, 0], [0, 1, -1]])
    assert np.allclose(rs.simple_roots.sum(axis=1), 0)
    assert rs.rank == 2


@pytest.mark.parametrize("n", [2, 3, 5, 9])
def test_torus_volumes(n):
    assert build_root_system("B", n).torus_volume == pytest.approx(2, rel=1e-12)
    assert build_root_system("C", n).torus_volume == pytest.approx(1, rel=1e-12)


@pytest.mark.parametrize("n", [4, 5, 8])
def test_torus_volume_d(n):
    assert build_root_system("D", n).torus_volume == pytest.approx(2, rel=1e-12)


@given(series_and_n(15))
def test_positive_coroot_count_and_duality(sn):
    s, n = sn
    rs = build_root_system(s, n)
    expected = {"A": n * (n - 1) // 2, "B": n * n, "C": n * n, "D": n * n - n}[s.value]
    assert rs.num_positive == expected
    assert len(rs.simple_roots) == rs.rank
    for a, c in zip(rs.positive_roots, rs.positive_coroots):
        assert np.allclose(c, 2 * a / (a @ a))
    for a, c in zip(rs.simple_roots, rs.simple_coroots):
        assert np.allclose(c, 2 * a / (a @ a))


@pytest.mark.parametrize("n", [2, 4, 7])
def test_coroot_length_counts(n):
    assert coroot_length_counts(build_root_system("A", n)) == {2: n * (n - 1) // 2}
    assert coroot_length_counts(build_root_system("B", n)) == {4: n, 2: n * n - n}
    assert coroot_length_counts(build_root_system("C", n)) == {1: n, 2: n * n - n}
    if n >= 4:
        assert coroot_length_counts(build_root_system("D", n)) == {2: n * n - n}


def test_degrees():
    assert build_root_system("A", 4).invariant_degrees == (2, 3, 4)
    assert build_root_system("B", 3).invariant_degrees == (2, 4, 6)
    assert build_root_system("C", 3).invariant_degrees == (2, 4, 6)
    assert build_root_system("D", 5).invariant_degrees == (2, 4, 6, 8, 5)


def test_su2_volume_is_three_sphere_of_radius_sqrt2():
    v = macdonald_log_volume(build_root_system("A", 2))
    assert v.log_value == pytest.approx(math.log(2 * math.pi**2 * math.sqrt(2) ** 3), abs=1e-12)
    assert v.value == pytest.approx(55.830, abs=1e-3)


def test_su3_volume():
    expected = math.log(math.sqrt(3) * (2 * math.pi) ** 5 / 2)
    assert macdonald_log_volume(build_root_system("A", 3)).log_value == pytest.approx(expected, abs=1e-12)


def test_rank_zero_edge_is_empty_product():
    empty = np.empty((0, 1))
    rs = RootSystem(None, 0, 0, 1, empty, empty, empty, empty, ())
    assert rs.torus_volume == 1.0
    assert macdonald_log_volume(rs).log_value == 0.0


def _log_fact(k):
    return math.lgamma(k + 1)


@pytest.mark.parametrize("n", [2, 5, 11])
def test_closed_forms_explicit(n):
    a = (0.5 * math.log(n) + (n * (n + 1) / 2 - 1) * math.log(2 * math.pi)
         - sum(_log_fact(i) for i in range(1, n)))
    b = ((n * (n + 2) + 1) * math.log(2) + n * (n + 1) * math.log(math.pi)
         - sum(_log_fact(2 * i - 1) for i in range(1, n + 1)))
    c = (n * n * math.log(2) + n * (n + 1) * math.log(math.pi)
         - sum(_log_fact(2 * i - 1) for i in range(1, n + 1)))
    assert closed_form_log_volume(GroupSpec("A", n)).log_value == pytest.approx(a, rel=1e-13)
    assert closed_form_log_volume(GroupSpec("B", n)).log_value == pytest.approx(b, rel=1e-13)
    assert closed_form_log_volume(GroupSpec("C", n)).log_value == pytest.approx(c, rel=1e-13)


@settings(max_examples=60)
@given(series_and_n(30))
def test_two_volume_paths_agree(sn):
    s, n = sn
    mac = macdonald_log_volume(build_root_system(s, n)).log_value
    closed = closed_form_log_volume(GroupSpec(s, n)).log_value
    assert abs(mac - closed) < 1e-10 * max(1.0, abs(closed))


@pytest.mark.parametrize("s", SERIES)
def test_log_volume_finite_at_500(s):
    assert math.isfinite(closed_form_log_volume(GroupSpec(s, 500)).log_value)


def test_quotient_subtracts_log_center():
    full = closed_form_log_volume(GroupSpec("A", 6)).log_value
    quot = closed_form_log_volume(GroupSpec("A", 6, center_order=3)).log_value
    assert full - quot == pytest.approx(math.log(3))
    rs = build_root_system("D", 4)
    assert (macdonald_log_volume(rs).log_value - macdonald_log_volume(rs, 4).log_value
            == pytest.approx(math.log(4)))


@given(series_and_n(12), st.integers(1, 12))
def test_center_order_must_divide_center(sn, k):
    s, n = sn
    z = {"A": n, "B": 2, "C": 2, "D": 4}[s.value]
    if z % k == 0:
        assert GroupSpec(s, n, k).center_order == k
    else:
        with pytest.raises(InvalidSpecError):
            GroupSpec(s, n, k)


@pytest.mark.parametrize("s,n", [("A", 1), ("B", 1), ("C", 1), ("D", 3), ("E", 6), ("A", 2.5)])
def test_invalid_specs(s, n):
    with pytest.raises(InvalidSpecError):
        GroupSpec(s, n)


def test_dimensions():
    assert GroupSpec("A", 4).dimension == 15
    assert GroupSpec("B", 3).dimension == 21
    assert GroupSpec("C", 3).dimension == 21
    assert GroupSpec("D", 4).dimension == 28


@pytest.mark.parametrize("n", [2, 6, 15])
def test_ratio_a_matches_explicit(n):
    log_r, gap = log_volume_ratio("A", n)
    expected = 0.5 * math.log((n + 1) / n) + (n + 1) * math.log(2 * math.pi) - _log_fact(n)
    assert log_r == pytest.approx(expected, rel=1e-12)
    assert gap == 2 * n + 1


@pytest.mark.parametrize("n", [2, 6, 15])
def test_ratio_b_matches_explicit(n):
    log_r, gap = log_volume_ratio("B", n)
    expected = (2 * n + 1) * math.log(2) + 2 * n * math.log(math.pi) - _log_fact(2 * n - 1)
    assert log_r == pytest.approx(expected, rel=1e-12)
    assert gap == 4 * n - 1


def test_ratio_a100_in_band():
    v = normalized_volume_ratio("A", 100) / math.sqrt(2 * math.pi * math.e / 100)
    assert 0.9 <= v <= 1.1


@pytest.mark.parametrize("s", SERIES)
def test_ratio_approaches_series_asymptote(s):
    devs = [abs(normalized_volume_ratio(s, n) / ratio_asymptote(s, n) - 1) for n in (25, 50, 100, 200)]
    assert all(b < a for a, b in zip(devs, devs[1:]))


def test_volume_table_columns():
    rows = volume_table("C", [2, 3])
    assert list(rows[0]) == ["series", "n", "log_volume", "ratio", "normalized_ratio", "asymptote"]
    assert [r["n"] for r in rows] == [2, 3]


def test_root_arrays_are_read_only():
    rs = build_root_system("B", 3)
    with pytest.raises(ValueError):
        rs.simple_roots[0, 0] = 5.0
