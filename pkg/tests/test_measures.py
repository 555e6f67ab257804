import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pointwise_emergence.measures import (DiscreteMeasure, Mbar, PeriodicFamily, Tbar, empirical_measure,
                                          eta_inverse, eta_map, iota_inverse, iota_map, lattice_covering_radius,
                                          lattice_grid, mbar, nearest_lattice_point, partial_empirical,
                                          periodic_measure, simplex_grid, simplex_measure, tbar)
from pointwise_emergence.scheduling import ConstantOrder
from pointwise_emergence.shift import periodic_point


def test_measure_merges_and_orders():
    mu = DiscreteMeasure([("b", F(1, 4)), ("a", F(1, 2)), ("b", F(1, 4)), ("c", 0)])
    assert mu.keys == ["a", "b"] and mu.weights == [F(1, 2), F(1, 2)]
    assert mu.is_exact


def test_measure_validation():
    with pytest.raises(ValueError):
        DiscreteMeasure({"a": 0.5})
    with pytest.raises(ValueError):
        DiscreteMeasure({"a": 1.5, "b": -0.5})
    assert DiscreteMeasure({"a": 2, "b": 2}, normalize=True)["a"] == 0.5


def test_json_round_trip():
    mu = DiscreteMeasure({(1, 2): F(1, 3), (2, 1): F(2, 3)}, {"window": [0, 3]})
    back = DiscreteMeasure.from_dict(json.loads(mu.to_json()))
    assert back.keys == mu.keys
    assert back.fingerprint() == mu.fingerprint()


def test_empirical_fixed_point():
    assert empirical_measure(periodic_point("1", 2), 7, 5) == DiscreteMeasure.dirac((1,) * 5)


def test_empirical_periodic():
    x = periodic_point("12")
    assert empirical_measure(x, 2, 3) == DiscreteMeasure({(1, 2, 1): F(1, 2), (2, 1, 2): F(1, 2)})
    assert empirical_measure(x, 3, 3) == DiscreteMeasure({(1, 2, 1): F(2, 3), (2, 1, 2): F(1, 3)})
    with pytest.raises(ValueError):
        empirical_measure(x, 0, 3)


def test_partial_empirical():
    x = periodic_point("12")
    assert partial_empirical(x, 0, 5, 3) == empirical_measure(x, 5, 3)
    assert partial_empirical(x, 1, 2, 3) == DiscreteMeasure.dirac((2, 1, 2))
    assert partial_empirical(x, 1, 4, 3) == DiscreteMeasure({(2, 1, 2): F(2, 3), (1, 2, 1): F(1, 3)})
    with pytest.raises(ValueError):
        partial_empirical(x, 3, 3, 3)


def test_periodic_measure():
    assert periodic_measure(periodic_point("1", 2)) == DiscreteMeasure.dirac((1,) * 41)
    mu = periodic_measure(periodic_point("122"))
    assert len(mu) == 3 and set(mu.weights) == {F(1, 3)}
    assert {k[:3] for k in mu.keys} == {(1, 2, 2), (2, 2, 1), (2, 1, 2)}


@given(st.sampled_from(["12", "112", "1222", "121122"]), st.integers(1, 5))
def test_empirical_over_full_periods(word, reps):
    x = periodic_point(word, 2)
    assert empirical_measure(x, reps * x.period, 10) == periodic_measure(x.orbit_keys(10))


@pytest.fixture
def fam():
    return PeriodicFamily.from_words(["1", "12"], 2, depth=6)


def test_simplex_measure_examples(fam):
    assert simplex_measure([1, 0], fam) == fam.anchor_measure(0)
    mu = simplex_measure([F(1, 2), F(1, 2)], fam)
    assert sorted(mu.weights) == [F(1, 4), F(1, 4), F(1, 2)]
    mixed = PeriodicFamily.from_words(["2", "12"], 2, depth=6, hat_word="1", zeta=F(1, 2))
    nu = simplex_measure([1, 0], mixed)
    assert nu == DiscreteMeasure({(1,) * 6: F(1, 2), (2,) * 6: F(1, 2)})
    with pytest.raises(ValueError):
        simplex_measure([0.5, 0.6], fam)


def test_family_validation():
    with pytest.raises(ValueError):
        PeriodicFamily.from_words(["12", "21"], 2)
    with pytest.raises(ValueError):
        PeriodicFamily.from_words(["2"], 2, hat_word="1")
    with pytest.raises(ValueError):
        PeriodicFamily.from_words(["2"], 2, hat_word="1", zeta=F(3, 2))
    with pytest.raises(ValueError):
        PeriodicFamily.from_words(["2"], 2, hat_word="2", zeta=F(1, 2))


@given(st.lists(st.fractions(0, 1), min_size=2, max_size=2).filter(lambda v: sum(v) <= 1))
def test_simplex_measure_affine(v):
    fam = PeriodicFamily.from_words(["1", "2", "12"], 2, depth=6)
    t = [v[0], v[1], 1 - v[0] - v[1]]
    s = [F(1, 3)] * 3
    mid = simplex_measure([(a + b) / 2 for a, b in zip(t, s)], fam)
    assert mid == simplex_measure(t, fam).combine(simplex_measure(s, fam), F(1, 2), F(1, 2))


def test_eta_examples():
    assert eta_map([0, 0, 0]) == [1, 0, 0, 0]
    assert eta_map([1, 1]) == [0, 0, 1]
    assert eta_map([F(1, 2), F(1, 2)]) == [F(1, 4), F(1, 4), F(1, 2)]


cube = st.integers(1, 5).flatmap(lambda L: st.tuples(
    st.lists(st.floats(0, 1), min_size=L, max_size=L), st.lists(st.floats(0, 1), min_size=L, max_size=L)))


@given(cube)
def test_eta_lipschitz(pair):
    T, S = pair
    L = len(T)
    a, b = np.array(eta_map(T)), np.array(eta_map(S))
    assert abs(a.sum() - 1) < 1e-12
    assert np.linalg.norm(a - b) <= L * (L + 1) * np.linalg.norm(np.subtract(T, S)) + 1e-12


@given(st.lists(st.integers(1, 50), min_size=2, max_size=6))
def test_eta_of_Tbar_is_tbar(M):
    assert eta_map(Tbar(M)) == tbar(M)
    assert eta_map(eta_inverse(tbar(M))) == tbar(M)


def test_bar_maps():
    assert tbar([1, 1]) == [F(1, 2), F(1, 2)]
    assert Tbar([2, 1, 1]) == [F(1, 3), F(1, 4)]
    assert Mbar([0, 2, 5], ConstantOrder(3)) == [6, 9]
    assert mbar([2, 3], [1, 2]) == [2, 6]
    with pytest.raises(ValueError):
        Mbar([3, 3], ConstantOrder(1))
    with pytest.raises(ValueError):
        tbar([0, 1])


def test_iota_examples():
    assert iota_map([0, 0], 1) == [0, 1, 0]
    assert iota_map([0.3], 0) == [pytest.approx(0.7), 0.3]
    with pytest.raises(ValueError):
        iota_map([0.6, 0.6], 0)


@given(st.integers(1, 4).flatmap(lambda L: st.tuples(
    st.lists(st.fractions(0, 1), min_size=L, max_size=L).filter(lambda v: sum(v) <= 1), st.integers(0, L))))
def test_iota_round_trip(args):
    T, pivot = args
    t = iota_map(T, pivot)
    assert sum(t) == 1
    assert iota_inverse(t, pivot) == T


def test_simplex_grid_small_cases():
    assert simplex_grid(1, 1) == [(F(1, 2), F(1, 2))]
    g = simplex_grid(1, 0.5)
    assert g == [(0, 1), (F(1, 2), F(1, 2)), (1, 0)]
    assert [len(simplex_grid(L, 2.0 ** -L)) for L in (1, 2, 3)] == [3, 15, 165]
    assert len(lattice_grid(2, 4)) == 15


@pytest.mark.parametrize("L,r", [(1, 0.3), (2, 0.25), (3, 0.2)])
def test_simplex_grid_covers(L, r):
    grid = np.array(simplex_grid(L, r), dtype=float)
    assert np.allclose(grid.sum(axis=1), 1)
    pts = np.random.default_rng(L).dirichlet(np.ones(L + 1), size=10_000)
    d = np.sqrt(((pts[:, None, :] - grid[None]) ** 2).sum(-1)).min(axis=1)
    assert d.max() <= r


def test_lattice_covering_radius_is_attained():
    L, D = 2, 3
    r = lattice_covering_radius(L, D)
    pts = np.random.default_rng(0).dirichlet(np.ones(L + 1), size=20_000)
    near = np.array([nearest_lattice_point(p, D) for p in pts], dtype=float)
    d = np.linalg.norm(pts - near, axis=1)
    assert d.max() <= r + 1e-12
    assert d.max() > 0.9 * r
    assert math.isclose(lattice_covering_radius(1, 2), math.sqrt(0.5) / 2)
