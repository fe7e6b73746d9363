import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xxzbethe.kernels import Anisotropy
from xxzbethe.solver import BetheSystem
from xxzbethe.states import (
    AtJumpPoint, WindowMismatch, complex_count, dual_map, dual_numbers, ground_numbers,
    holes, jump_points, near_jump, real_vacancies, verify_duality, window,
)


@pytest.mark.parametrize("L", [4, 6, 8, 12, 16])
def test_window_size_parity_and_ends(L):
    for M in (1, 2, 3, 4):
        w = window(L, M)
        assert len(w) == L == len(set(w))
        half = Fraction(1, 2)
        assert all((v.denominator == 1) == (M % 2 == 1) for v in w)
        if M % 2:
            assert w[-1] == Fraction(L, 2) and -Fraction(L, 2) not in w
        else:
            assert w[0] == -Fraction(L, 2) + half and w[-1] == Fraction(L, 2) - half


def test_ground_numbers_symmetric():
    for L, M in ((8, 4), (8, 3), (12, 7), (10, 0)):
        g = [float(v) for v in ground_numbers(L, M)]
        assert g == sorted(-x for x in g)
        assert np.allclose(np.diff(g), 1) if M > 1 else True
    with pytest.raises(ValueError):
        ground_numbers(4, 5)


def test_holes_complement():
    hs = holes([-1, 0, 1], 8)
    assert [int(v) for v in hs.values] == [-3, -2, 2, 3, 4]
    with pytest.raises(WindowMismatch):
        holes([-4, 0, 1], 8)


def test_dual_map_hole_zero_and_example():
    d, mp = dual_map([-1, 1, 2], 8)
    assert mp[Fraction(0)] == 4
    assert mp[Fraction(3)] == 1 and mp[Fraction(-3)] == -1
    assert mp[Fraction(4)] == 0 and mp[Fraction(-2)] == -2
    assert [int(v) for v in d] == [-2, -1, 0, 1, 4]


def _subset(L, M, seed):
    rng = np.random.default_rng(seed)
    w = window(L, M)
    idx = np.sort(rng.choice(L, size=M, replace=False))
    return [w[i] for i in idx]


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([4, 6, 8, 10, 12, 16, 20]), st.integers(0, 10**6), st.data())
def test_dual_map_is_an_involution(L, seed, data):
    M = data.draw(st.integers(0, L))
    nums = _subset(L, M, seed)
    d, _ = dual_map(nums, L)
    assert len(d) == L - M
    assert set(d) <= set(window(L, L - M))
    back, _ = dual_map(d, L)
    assert list(back) == sorted(nums)


def test_dual_numbers_for_any_M():
    a = Anisotropy.from_pi(0.3)
    p = dual_numbers(BetheSystem(8, 5, a, [-2, -1, 0, 1, 2]))
    assert p.dual.M == 3 and [int(v) for v in p.dual.numbers] == [-1, 0, 1]
    assert dual_numbers(p.dual).dual.numbers == p.primal.numbers


def _floor_exact(k, q):
    # 1/2 + |k| q with q = eta/pi rational
    return math.floor(Fraction(1, 2) + abs(k) * q)


@pytest.mark.parametrize("k", [-3, -2, -1, 0, 1, 2, 3, 4])
def test_real_vacancies_against_exact_floor(k):
    L = 24
    for j in range(1, 100):
        q = Fraction(j, 200)
        if (Fraction(1, 2) + abs(k) * q).denominator == 1:
            continue
        f = _floor_exact(k, q)
        ref = L // 2 - k + 2 * f if k >= 0 else L // 2 + abs(k) - 2 * f
        assert real_vacancies(L, k, float(q) * math.pi) == ref
        if k >= 0:
            assert complex_count(L, L // 2 + k, float(q) * math.pi) == L // 2 + k - ref


def test_vacancy_limits():
    # small eta: the floor vanishes, leaving L/2 - k
    assert real_vacancies(12, 2, 1e-3) == 4
    assert real_vacancies(12, -2, 1e-3) == 8
    assert real_vacancies(12, 0, 0.3 * math.pi) == 6
    with pytest.raises(ValueError):
        complex_count(12, 5, 0.3)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_jump_points_are_exactly_the_integer_crossings(k):
    pts = jump_points(k)
    assert pts == sorted(pts)
    for e in pts:
        assert (0.5 + k * e / math.pi) == pytest.approx(round(0.5 + k * e / math.pi), abs=1e-12)
        with pytest.raises(AtJumpPoint):
            real_vacancies(12, k, e)
        assert near_jump(k, e + 1e-4, 1e-3) and near_jump(-k, e, 0.0)
    # between consecutive jump points the count is constant
    edges = [0.0] + pts + [math.pi / 2]
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo < 1e-9:
            continue
        vals = {real_vacancies(12, k, e) for e in np.linspace(lo, hi, 9)[1:-1]}
        assert len(vals) == 1
    assert not near_jump(0, 0.3, 1.0)
    with pytest.raises(ValueError):
        jump_points(0)


def test_jump_point_values():
    assert [round(v / math.pi, 6) for v in jump_points(2)] == [0.25]
    assert [round(v / math.pi, 6) for v in jump_points(4)] == [0.125, 0.375]


@pytest.mark.parametrize("L,M,x", [(8, 3, 0.3), (8, 5, 0.4), (10, 4, 1 / 3)])
def test_verify_duality_ground_pairs(L, M, x):
    a = Anisotropy.from_pi(x)
    from xxzbethe.states import ground_system

    rep = verify_duality(dual_numbers(ground_system(L, M, a)))
    assert rep.success, rep
    assert rep.delta_e < 1e-10 and rep.overlap > 1 - 1e-10
    assert rep.ed_overlap_primal > 1 - 1e-10 and rep.ed_overlap_dual > 1 - 1e-10


def test_dual_example_maps_to_ground_numbers():
    d, mp = dual_map([-1, 0, 1], 8)
    assert list(d) == list(ground_numbers(8, 5))
    assert {int(k): int(v) for k, v in mp.items()} == {2: 2, 3: 1, 4: 0, -2: -2, -3: -1}


def test_mismatched_dual_pair_has_small_overlap():
    from xxzbethe.states import DualPair, ground_system

    a = Anisotropy.from_pi(1 / 3)
    good = dual_numbers(ground_system(8, 3, a))
    wrong = BetheSystem(8, 5, a, [-2, -1, 0, 1, 3])
    rep = verify_duality(DualPair(good.primal, wrong, good.hole_map))
    assert not rep.success and rep.overlap < 0.1
