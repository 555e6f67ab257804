import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from pointwise_emergence import checks
from pointwise_emergence.measures import DiscreteMeasure
from pointwise_emergence.metric import ShiftMetric, TableMetric
from pointwise_emergence.shift import prefix_distance
from pointwise_emergence.transport import (CostMatrix, MeasureBatch, TransportError, brute_force_w1,
                                           cost_matrix, dump_plan_csv, w1, w1_dual_lower_bound, w1_exact)
from pointwise_emergence.transport import bump_witness

rng = np.random.default_rng(7)
PTS = rng.random((10, 2))
LABELS = [f"p{i}" for i in range(10)]
PLANE = TableMetric(LABELS, np.linalg.norm(PTS[:, None] - PTS[None], axis=2))


@st.composite
def measures(draw, max_atoms=5):
    k = draw(st.integers(1, max_atoms))
    keys = draw(st.lists(st.sampled_from(LABELS), min_size=k, max_size=k, unique=True))
    w = draw(st.lists(st.integers(1, 20), min_size=k, max_size=k))
    return DiscreteMeasure({a: b for a, b in zip(keys, w)}, normalize=True)


def solve(mu, nu, metric=PLANE):
    return w1_exact(mu, nu, cost_matrix(mu, nu, metric))


def test_identical_measures():
    mu = DiscreteMeasure({"p0": 0.25, "p3": 0.75})
    res = solve(mu, mu)
    assert res.value == 0
    assert np.allclose(res.plan, np.diag([0.25, 0.75]))


def test_dirac_pair_on_shift():
    metric = ShiftMetric(2, 20)
    x, y = (1, 2, 2, 1) * 5, (1, 2, 1, 1) * 5
    res = w1_exact(DiscreteMeasure.dirac(x), DiscreteMeasure.dirac(y), cost_matrix(
        DiscreteMeasure.dirac(x), DiscreteMeasure.dirac(y), metric))
    assert res.value == pytest.approx(prefix_distance(x, y, 2))
    assert res.error_bound == metric.error


def test_half_split():
    mu = DiscreteMeasure({"a": 0.5, "b": 0.5})
    nu = DiscreteMeasure.dirac("a")
    assert w1_exact(mu, nu, np.array([[0.0], [1.0]])).value == pytest.approx(0.5)


def test_brute_force_examples():
    u = DiscreteMeasure({"a": 0.5, "b": 0.5})
    v = DiscreteMeasure({"c": 0.5, "d": 0.5})
    assert brute_force_w1(u, v, [[0, 1], [1, 0]]) == 0
    # both vertex plans cost 1 here
    assert brute_force_w1(u, v, [[0, 1], [1, 2]]) == pytest.approx(1.0)
    assert w1_exact(u, v, [[0, 1], [1, 2]]).value == pytest.approx(1.0)
    assert brute_force_w1(DiscreteMeasure.dirac("a"), DiscreteMeasure.dirac("c"), [[0.3]]) == 0.3


def test_brute_force_refuses_large():
    mu = DiscreteMeasure({i: 1 for i in range(5)}, normalize=True)
    with pytest.raises(TransportError):
        brute_force_w1(mu, mu, np.ones((5, 5)))


def test_mass_mismatch_raises():
    with pytest.raises(TransportError):
        w1_exact([0.5, 0.5], [0.5, 0.4], np.ones((2, 2)))
    with pytest.raises(TransportError):
        w1_exact([1.0], [0.5, 0.5], np.ones((2, 2)))
    with pytest.raises(ValueError):
        CostMatrix([[-1.0]])


@given(measures(), measures())
def test_certificates(mu, nu):
    res = solve(mu, nu)
    C = cost_matrix(mu, nu, PLANE).entries
    assert np.allclose(res.plan.sum(axis=1), mu.weight_array(), atol=1e-10)
    assert np.allclose(res.plan.sum(axis=0), nu.weight_array(), atol=1e-10)
    assert res.plan.min() >= -1e-12
    assert res.value == pytest.approx(float(np.sum(res.plan * C)), abs=1e-12)
    slack = res.phi[:, None] + res.psi[None, :] - C
    assert slack.max() <= 1e-9
    assert np.all(np.abs(slack[res.plan > 1e-12]) <= 1e-9)
    assert abs(res.dual_value - res.value) <= 1e-9


@given(measures(4), measures(4))
def test_matches_vertex_enumeration(mu, nu):
    if len(mu) * len(nu) > 16:
        return
    C = cost_matrix(mu, nu, PLANE)
    assert solve(mu, nu).value == pytest.approx(brute_force_w1(mu, nu, C), abs=1e-9)


@given(measures(6), measures(6))
@settings(max_examples=30)
def test_matches_linprog(mu, nu):
    C = cost_matrix(mu, nu, PLANE).entries
    m, n = C.shape
    A = np.zeros((m + n, m * n))
    for i in range(m):
        A[i, i * n:(i + 1) * n] = 1
    for j in range(n):
        A[m + j, j::n] = 1
    b = np.concatenate([mu.weight_array(), nu.weight_array()])
    ref = linprog(C.ravel(), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert solve(mu, nu).value == pytest.approx(ref.fun, abs=1e-9)


@given(measures(), measures(), measures())
def test_metric_axioms(a, b, c):
    ab, ba = solve(a, b).value, solve(b, a).value
    assert ab == pytest.approx(ba, abs=1e-12)
    assert ab <= solve(a, c).value + solve(c, b).value + 1e-9
    assert w1(a, b, PLANE) == pytest.approx(ab, abs=1e-9)


def test_dual_witnesses():
    x, y = "p1", "p4"
    mu, nu = DiscreteMeasure.dirac(x), DiscreteMeasure.dirac(y)
    assert w1_dual_lower_bound(mu, nu, lambda z: 0.0, PLANE) == 0
    d = PLANE.distance(x, y)
    got = w1_dual_lower_bound(mu, nu, bump_witness(x, d, PLANE), PLANE)
    assert got == pytest.approx(solve(mu, nu).value)
    with pytest.raises(TransportError):
        w1_dual_lower_bound(mu, nu, {x: 0.0, y: 1.0}, TableMetric([x, y], [[0, 0.5], [0.5, 0]]))


@given(measures(), measures(), st.sampled_from(LABELS), st.floats(0.05, 1.5))
def test_bump_witness_is_lower_bound(mu, nu, center, r):
    assert w1_dual_lower_bound(mu, nu, bump_witness(center, r, PLANE), PLANE) <= solve(mu, nu).value + 1e-12


def test_batch_matches_single_solves():
    rs = np.random.default_rng(3)
    ms = [DiscreteMeasure({LABELS[i]: float(w) for i, w in zip(rs.choice(10, 4, replace=False), rs.random(4) + .1)},
                          normalize=True) for _ in range(6)]
    batch = MeasureBatch(ms, PLANE)
    D = batch.pairwise()
    for i in range(6):
        for j in range(6):
            assert D[i, j] == pytest.approx(w1(ms[i], ms[j], PLANE), abs=1e-9)
    assert np.allclose(batch.pairwise(jobs=2), D)


def test_plan_dump(tmp_path):
    mu = DiscreteMeasure({"p0": 0.5, "p1": 0.5})
    nu = DiscreteMeasure.dirac("p2")
    C = cost_matrix(mu, nu, PLANE)
    dump_plan_csv(w1_exact(mu, nu, C), C, tmp_path / "plan.csv")
    lines = (tmp_path / "plan.csv").read_text().splitlines()
    assert lines[0] == "i,j,mass,cost" and len(lines) == 3


@pytest.mark.parametrize("name", ["transport_oracle", "dirac_identity", "reset_bound", "simplex_lipschitz",
                                  "separation"])
def test_randomized_suites(name):
    rep = checks.SUITES[name]()
    assert rep["passed"], rep
