import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pointwise_emergence import checks
from pointwise_emergence.coded_orbit import realize_shift_point
from pointwise_emergence.emergence import (AccumulationSample, EmergenceEstimator, SampleSpace,
                                           accumulation_samples, covering_number_greedy, dyadic_grid,
                                           emergence_curve, emergence_exponent, geometric_times,
                                           historic_lower_bound, packing_number_greedy, parse_eps_grid, rho_L,
                                           run_times, theory_constant, theory_lower_bound,
                                           verify_simplex_in_accumulation)
from pointwise_emergence.measures import (DiscreteMeasure, PeriodicFamily, iota_map, lattice_grid, mbar,
                                          simplex_measure, tbar)
from pointwise_emergence.metric import ShiftMetric, TableMetric
from pointwise_emergence.scheduling import build_shift_code
from pointwise_emergence.shift import periodic_point
from pointwise_emergence.transport import w1

LINE = TableMetric(["a", "b"], [[0, 0.7], [0.7, 0]])


def uniform_family(L, zeta=None):
    """L+1 fixed anchors at mutual distance 1, optionally mixed with a hat at distance 1."""
    n = L + 2 if zeta else L + 1
    return PeriodicFamily.from_table(np.ones((n, n)) - np.eye(n), hat=bool(zeta), zeta=zeta)


def brute_separated(D, eps):
    """Largest eps-separated subset by exhaustion (tiny inputs only)."""
    n = len(D)
    for k in range(n, 0, -1):
        for sub in itertools.combinations(range(n), k):
            if all(D[i, j] > eps for i, j in itertools.combinations(sub, 2)):
                return k
    return 0


def test_singleton():
    S = [DiscreteMeasure.dirac("a")]
    for e in (1e-6, 0.5, 10):
        assert covering_number_greedy(S, e, LINE) == packing_number_greedy(S, e, LINE) == 1
    assert emergence_exponent(emergence_curve(SampleSpace(S, LINE), [0.5, 0.25])) == 0


def test_two_points():
    S = SampleSpace([DiscreteMeasure.dirac("a"), DiscreteMeasure.dirac("b")], LINE)
    assert S.count(0.7) == 1 and S.count(1.0) == 1
    assert S.count(0.69) == 2 and S.count(0.0) == 2


def test_duplicates_collapse():
    mu = DiscreteMeasure({"a": 0.5, "b": 0.5})
    S = SampleSpace([mu, DiscreteMeasure.dirac("a"), mu], LINE)
    assert len(S) == 2 and S.source_index == [0, 1]


def test_delta1_counts_double():
    fam = uniform_family(1, F(1, 2))
    S = SampleSpace([simplex_measure(t, fam) for t in lattice_grid(1, 512)], fam.metric)
    counts = [S.count(e) for e in dyadic_grid(3, 7)]
    for a, b in zip(counts, counts[1:]):
        assert b >= 2 * a - 1


def test_vertices_packing():
    for L in (1, 2, 3):
        fam = checks.separation_family(L, L + 1)
        rho, pivot = rho_L(fam, L)
        verts = [simplex_measure(iota_map([F(int(i == j)) for i in range(L)], pivot), fam)
                 for j in range(-1, L)]
        S = SampleSpace(verts, fam.metric)
        assert S.matrix()[np.triu_indices(L + 1, 1)].min() >= float(fam.zeta) * rho - 1e-12
        assert S.count(0.99 * float(fam.zeta) * rho) == L + 1


def test_rho_examples():
    assert rho_L(uniform_family(1), 1) == (1.0, 0)
    fam = PeriodicFamily.from_words(["1", "2", "12"], 2, depth=41)
    rho, pivot = rho_L(fam, 2)
    assert rho == pytest.approx(2 / 3, abs=1e-11) and pivot == 0
    far = PeriodicFamily.from_words(["1", "2", "12", "1112"], 2, depth=41)
    assert rho_L(far, 3)[0] <= rho
    wide = PeriodicFamily.from_table([[0, 3, 3], [3, 0, 3], [3, 3, 0]])
    assert rho_L(wide, 2)[0] == 1.0


def test_theory_constant():
    assert theory_constant(0.5, 1.0, 1) == pytest.approx(1 / 8)
    assert theory_lower_bound(0.5, 1.0, 1, 1.0) == pytest.approx(1 / 8)
    assert theory_lower_bound(0.3, 0.7, 3, 0.05) == pytest.approx(8 * theory_lower_bound(0.3, 0.7, 3, 0.1))
    with pytest.raises(ValueError):
        theory_constant(0.5, 1.5, 1)


@given(st.floats(0.05, 1), st.floats(0.05, 1), st.integers(1, 6), st.floats(1e-3, 1))
def test_volume_identity(zeta, rho, L, eps):
    N = theory_lower_bound(zeta, rho, L, eps)
    vol = N * math.pi ** (L / 2) / math.gamma(L / 2 + 1) * (2 * math.sqrt(L) * eps / (zeta * rho)) ** L
    assert vol == pytest.approx(1.0, rel=1e-9)


def test_historic_examples():
    mu = DiscreteMeasure.dirac("a")
    assert historic_lower_bound(mu, mu, 0.3, LINE) == 0
    assert historic_lower_bound(mu, mu, 0.25, distance=1.0) == 2
    metric = ShiftMetric(2, 41)
    one, two = DiscreteMeasure.dirac((1,) * 41), DiscreteMeasure.dirac((2,) * 41)
    assert historic_lower_bound(one, two, 0.1, metric) == pytest.approx(10, abs=1e-9)


def test_delta1_exponent():
    fam = uniform_family(1, F(1, 2))
    S = SampleSpace([simplex_measure(t, fam) for t in lattice_grid(1, 256)], fam.metric)
    curve = emergence_curve(S, dyadic_grid(2, 6), theory={"zeta": 0.5, "rho": 1.0, "L": 1})
    assert emergence_exponent(curve) >= 0.8
    assert all(r.theory == pytest.approx(r.eps ** -1 / 8) for r in curve.rows)


def test_delta3_exponent():
    fam = uniform_family(3)
    S = SampleSpace([simplex_measure(t, fam) for t in lattice_grid(3, 24)], fam.metric)
    curve = emergence_curve(S, [0.25, 0.2, 0.16, 0.125, 0.1, 0.08])
    assert emergence_exponent(curve) >= 2.4


def test_exponent_window_errors():
    fam = uniform_family(1)
    S = SampleSpace([simplex_measure(t, fam) for t in lattice_grid(1, 8)], fam.metric)
    curve = emergence_curve(S, dyadic_grid(1, 6))
    with pytest.raises(ValueError):
        emergence_exponent(curve, (0.5, 0.25))
    with pytest.raises(ValueError):
        emergence_curve(S, [0.1, 0.2])


@pytest.mark.parametrize("L,hs", [(1, (8, 16, 32)), (2, (4, 8, 16))])
def test_separation_packing_scales(L, hs):
    fam = checks.separation_family(5, L + 1)
    rho, pivot = rho_L(fam, L)
    for D in hs:
        h = 1 / D
        grid = [T[1:] for T in lattice_grid(L, D)]
        S = SampleSpace([simplex_measure(iota_map(list(T), pivot), fam) for T in grid], fam.metric)
        n = S.count(float(fam.zeta) * rho * h / (2 * math.sqrt(L)))
        assert D ** L / 4 ** L <= n <= 4 ** L * D ** L


planar = np.random.default_rng(11).random((8, 2))
PLANE = TableMetric(list(range(8)), np.linalg.norm(planar[:, None] - planar[None], axis=2))


@st.composite
def sample_sets(draw):
    k = draw(st.integers(1, 7))
    out = []
    for _ in range(k):
        w = draw(st.lists(st.integers(0, 5), min_size=8, max_size=8).filter(any))
        out.append(DiscreteMeasure({i: v for i, v in enumerate(w) if v}, normalize=True))
    return out


@given(sample_sets(), st.floats(0.01, 0.8))
@settings(max_examples=40)
def test_sandwich_and_separation(ms, eps):
    S = SampleSpace(ms, PLANE)
    D = S.matrix()
    n = S.count(eps)
    centers = S.centers(eps)
    sep = S.separated(eps)
    if len(sep) > 1:
        sub = D[np.ix_(sep, sep)]
        assert sub[np.triu_indices(len(sep), 1)].min() > eps
    assert n <= S.pack(eps) <= brute_separated(D, eps)
    assert S.pack(2 * eps) <= n
    assert D[np.ix_(range(len(S)), centers)].min(axis=1).max() <= eps + 1e-12
    if len(centers) > 1:
        sub = D[np.ix_(centers, centers)]
        assert sub[np.triu_indices(len(centers), 1)].min() > eps
    assert S.count(2 * eps) <= n
    assert n <= brute_separated(D, eps)


@given(sample_sets(), st.lists(st.floats(0.01, 1.0), min_size=2, max_size=5, unique=True))
@settings(max_examples=30)
def test_monotone_in_eps(ms, grid):
    S = SampleSpace(ms, PLANE)
    grid = sorted(grid, reverse=True)
    counts = [S.count(e) for e in grid]
    assert counts == sorted(counts)


def test_accumulation_fixed_point():
    x = periodic_point("1", 2)
    S = accumulation_samples(x, [3, 10, 50], 8)
    assert len(S) == 3 and all(mu == DiscreteMeasure.dirac((1,) * 8) for mu in S.measures)


def test_accumulation_shift_code():
    fam = PeriodicFamily.from_words(["1", "2"], 2, depth=41)
    code = build_shift_code(fam, L_max=1)
    x = realize_shift_point(code, fam)
    S = accumulation_samples(x, code, 41)
    assert len(S) == len(code.blocks) == 3
    b = code.blocks[1]
    assert [F(v) for v in b.t] == [F(1, 2), F(1, 2)]
    target = simplex_measure(tbar(mbar(b.n, code.periods)), fam)
    bound = 2 * b.prev / b.checkpoint + 2 * (b.L + 1) / b.s
    assert w1(S.measures[1], target, fam.metric) <= bound + 2 * fam.metric.error


def test_accumulation_extra_times_and_prune():
    fam = PeriodicFamily.from_words(["1", "2", "12"], 2, depth=41)
    code = build_shift_code(fam, L_max=2)
    x = realize_shift_point(code, fam)
    extra = run_times(code, 2)
    S = accumulation_samples(x, code, 41, extra_times=extra, prune=1e-6)
    assert len(S.checkpoints()) == len(code.blocks)
    assert len(S) == len(set(extra) | set(code.checkpoints()))
    full = accumulation_samples(x, code, 41)
    for a, b in zip(S.checkpoints().measures, full.measures):
        dropped = sum(float(w) for k, w in b.items() if k not in set(a.keys))
        assert w1(a, b, fam.metric) <= 2 * dropped * fam.metric.diameter + 1e-9


def test_sample_validation():
    with pytest.raises(ValueError):
        AccumulationSample([DiscreteMeasure.dirac("a")] * 2, [3, 3])
    with pytest.raises(IndexError):
        fam = PeriodicFamily.from_words(["1", "2"], 2, depth=8)
        code = build_shift_code(fam)
        accumulation_samples(realize_shift_point(code, fam, tail=None), [code.length + 5], 8)


def test_time_helpers():
    ts = geometric_times(10, 100, 1.5)
    assert ts[0] == 15 and all(b >= 1.5 * a for a, b in zip([10] + ts, ts)) and ts[-1] < 100
    assert parse_eps_grid("dyadic:1,3") == [0.5, 0.25, 0.125]
    assert parse_eps_grid("list:0.1,0.3") == [0.3, 0.1]
    with pytest.raises(ValueError):
        parse_eps_grid("log:1,2")


def test_simplex_in_accumulation():
    fam = PeriodicFamily.from_words(checks.SHIFT_WORDS[:2], 2, depth=41)
    code = build_shift_code(fam, L_max=1)
    S = accumulation_samples(realize_shift_point(code, fam), code, 41)
    net = [b.t for b in code.blocks]
    rep = verify_simplex_in_accumulation(S, fam, 1, net, 3 * 0.5)
    assert rep["pass"]
    strict = verify_simplex_in_accumulation(S, fam, 1, net, 0.0)
    assert not strict["pass"]


def test_curve_export_format():
    fam = uniform_family(1)
    S = SampleSpace([simplex_measure(t, fam) for t in lattice_grid(1, 8)], fam.metric)
    curve = emergence_curve(S, [0.5, 0.25], theory={"zeta": 1, "rho": 1.0, "L": 1})
    text = curve.to_csv()
    assert text.splitlines()[0] == "eps,pack,cover,theory" and text.endswith("\n") and "\r" not in text
    assert curve.to_json().endswith("}\n")


def test_estimator():
    fam = uniform_family(1, F(1, 2))
    X = [simplex_measure(t, fam) for t in lattice_grid(1, 128)]
    est = EmergenceEstimator(metric=fam.metric, eps_grid=dyadic_grid(2, 6)).fit(X)
    assert est.exponent_ >= 0.8
    assert list(est.predict([0.25, 1e-9])) == [est.space_.count(0.25), 129]
    assert "metric" in est.get_params()
    tiny = EmergenceEstimator(metric=fam.metric).fit(X[:2])
    assert math.isnan(tiny.exponent_)
