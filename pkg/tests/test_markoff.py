import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from markoff_lab.markoff import (
    FailureCandidate,
    NotAdmissible,
    Solvable,
    box_has_point,
    brute_force_box,
    descend,
    has_integral_point,
    has_reducing_move,
    is_admissible,
    markoff,
    normalize,
    orbit,
    search_bound,
    vieta_move,
)

coord = st.integers(-(10**5), 10**5)


def test_is_admissible_examples():
    assert not is_admissible(3)
    assert not is_admissible(12)
    assert is_admissible(1)


def test_admissible_density_on_every_window():
    for start in range(-200, 200, 7):
        assert sum(is_admissible(a) for a in range(start, start + 36)) == 21


def test_vieta_move_examples():
    assert vieta_move((3, 3, 3), "z") == (3, 3, 6)
    assert all(vieta_move((0, 0, 0), ax) == (0, 0, 0) for ax in "xyz")
    assert vieta_move((1, 1, 0), "z") == (1, 1, 1)
    assert markoff((1, 1, 1)) == markoff((1, 1, 0)) == 2


def test_vieta_move_overflow():
    with pytest.raises(OverflowError):
        vieta_move((2**40, 2**40, 0), "z")


@given(coord, coord, coord, st.sampled_from(["x", "y", "z", 0, 1, 2]))
@settings(max_examples=2000)
def test_vieta_move_is_involution_preserving_M(x, y, z, axis):
    t = (x, y, z)
    u = vieta_move(t, axis)
    assert vieta_move(u, axis) == t
    assert markoff(u) == markoff(t)


def test_descend_examples():
    assert descend((3, 3, 6)) == (3, 3, 3)
    assert descend((0, 0, 0)) == (0, 0, 0)
    # the orbit of (1, 1, 1) for M = 2 up to height 5 has a single representative besides itself
    assert descend((1, 1, 1)) == (0, 1, 1)
    assert orbit((1, 1, 1), 5) == {(0, 1, 1), (1, 1, 1)}


@given(coord, coord, coord)
@settings(max_examples=500)
def test_descend_reaches_local_minimum(x, y, z):
    r = descend((x, y, z))
    assert markoff(r) == markoff((x, y, z))
    assert not has_reducing_move(r)
    assert r == normalize(r)
    assert abs(r[0]) <= abs(r[1]) <= abs(r[2])


def test_normalize_sign_convention():
    assert normalize((-3, 2, 5)) == (2, 3, -5)
    assert normalize((-3, -2, 5)) == (2, 3, 5)
    assert normalize((0, -1, 4)) == (0, 1, 4)


def test_descend_commutes_with_moves_on_random_orbits():
    rng = random.Random(20261015)
    for _ in range(10**4):
        t = tuple(rng.randint(-12, 12) for _ in range(3))
        for _ in range(rng.randint(0, 3)):
            t = vieta_move(t, rng.randrange(3))
        u = vieta_move(t, rng.randrange(3))
        r1, r2 = descend(t), descend(u)
        if r1 == r2:
            continue
        H = math.isqrt(max(sum(v * v for v in t), sum(v * v for v in u))) + 1
        assert r2 in orbit(r1, H)


def test_has_integral_point_examples():
    assert has_integral_point(0) == Solvable(0, (0, 0, 0))
    sol = has_integral_point(2)
    assert isinstance(sol, Solvable) and markoff(sol.witness) == 2
    assert isinstance(has_integral_point(3), NotAdmissible)
    with pytest.raises(OverflowError):
        has_integral_point(2**41)


def test_first_failure_candidate_confirmed_by_large_box():
    first = next(a for a in range(0, 1000) if isinstance(has_integral_point(a), FailureCandidate))
    assert is_admissible(first)
    assert not box_has_point(first, 10**4)
    neg = next(a for a in range(-1, -1000, -1) if isinstance(has_integral_point(a), FailureCandidate))
    assert not box_has_point(neg, 10**4)


@given(st.integers(-(10**6), 10**6))
@settings(max_examples=300, deadline=None)
def test_witnesses_are_sound(a):
    cls = has_integral_point(a)
    if isinstance(cls, Solvable):
        assert markoff(cls.witness) == a
        assert cls.witness == normalize(cls.witness)
    elif isinstance(cls, FailureCandidate):
        assert cls.searched_bound == search_bound(a)
    else:
        assert not is_admissible(a)


def test_brute_force_box_examples():
    sols = brute_force_box(0, 5)
    assert (0, 0, 0) in sols and (3, 3, 3) in sols
    assert brute_force_box(3, 100) == []
    assert (2, 1, 0) in brute_force_box(5, 3)
    assert all(markoff(t) == 5 for t in brute_force_box(5, 3))


def test_box_oracles_agree():
    for a in range(-60, 61):
        for H in (3, 8, 20):
            assert box_has_point(a, H) == bool(brute_force_box(a, H))


def test_search_agrees_with_box_oracle_small_range():
    # the full |a| <= 1000 sweep runs in test_acceptance.py
    for a in range(-150, 151):
        cls = has_integral_point(a, 3.0)
        if isinstance(cls, NotAdmissible):
            continue
        H = math.isqrt(2500 * (1 + abs(a)))
        assert isinstance(cls, Solvable) == box_has_point(a, H)


def test_orbit_contains_moves():
    t = (3, 3, 3)
    orb = orbit(t, 100)
    assert normalize(vieta_move(t, 2)) in orb
    assert all(markoff(u) == 0 for u in orb)
