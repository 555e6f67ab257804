"""Randomized verification suites for the quantitative estimates.

Each suite returns a report dict with at least ``name``, ``passed``,
``violations``, ``trials`` and ``seconds``; ``worst`` is the largest
observed value of (measured - bound), which is <= 0 when nothing failed.
"""
from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np

from .coded_orbit import (NewhouseRealization, SyntheticSpace, checkpoint_bound, realize_shift_point,
                          realize_synthetic_orbit)
from .emergence import (SampleSpace, accumulation_samples, dyadic_grid, emergence_curve, emergence_exponent,
                        historic_lower_bound, rho_L, theory_lower_bound, verify_simplex_in_accumulation)
from .measures import (DiscreteMeasure, Mbar, PeriodicFamily, empirical_measure, iota_map, lattice_covering_radius,
                       lattice_grid, mbar, partial_empirical, simplex_measure, tbar)
from .metric import ShiftMetric, TableMetric
from .scheduling import NewhouseOrder, build_master_code, build_shift_code
from .shift import PaddedPoint, prefix_distance
from .transport import brute_force_w1, cost_matrix, w1, w1_exact

SHIFT_WORDS = ("1", "2", "12", "112", "122", "1112")
NEWHOUSE_WORDS = ("2", "12", "122", "1222")


def _report(name, t0, trials, excess, **extra) -> dict:
    excess = np.asarray(excess, dtype=float)
    violations = int(np.sum(excess > 0))
    out = {"name": name, "passed": violations == 0, "violations": violations, "trials": trials,
           "worst": float(excess.max()) if excess.size else 0.0, "seconds": round(time.time() - t0, 3)}
    out.update(extra)
    return out


def _random_simplex(rng, L: int) -> np.ndarray:
    return rng.dirichlet(np.ones(L + 1))


def _random_measure(rng, keys, size):
    pick = rng.choice(len(keys), size=size, replace=False)
    w = rng.random(size) + 0.05
    return DiscreteMeasure({keys[i]: float(v) for i, v in zip(pick, w)}, normalize=True)


def check_transport_oracle(seed: int = 0, pairs: int = 500, max_atoms: int = 4, tol: float = 1e-9) -> dict:
    """Simplex solver against vertex enumeration on small random problems."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    pts = rng.random((12, 2))
    labels = [f"z{i}" for i in range(12)]
    metric = TableMetric(labels, np.linalg.norm(pts[:, None] - pts[None], axis=2))
    excess = []
    for _ in range(pairs):
        mu = _random_measure(rng, labels, int(rng.integers(1, max_atoms + 1)))
        nu = _random_measure(rng, labels, int(rng.integers(1, max_atoms + 1)))
        C = cost_matrix(mu, nu, metric)
        excess.append(abs(w1_exact(mu, nu, C).value - brute_force_w1(mu, nu, C)) - tol)
    return _report("transport_oracle", t0, pairs, excess)


def _random_point(rng, m: int, length: int) -> PaddedPoint:
    return PaddedPoint(tuple(int(s) for s in rng.integers(1, m + 1, size=length)), m,
                       pad=int(rng.integers(1, m + 1)))


def check_dirac_identity(seed: int = 0, pairs: int = 200, m: int = 2, T: int | None = None) -> dict:
    """W1 between Dirac masses equals the ground distance (read to twice the depth)."""
    t0 = time.time()
    metric = ShiftMetric(m, T or 1 + math.ceil(12 / math.log10(m)))
    T = metric.depth
    rng = np.random.default_rng(seed)
    excess = []
    for _ in range(pairs):
        x, y = _random_point(rng, m, 2 * T), _random_point(rng, m, 2 * T)
        if rng.random() < 0.3:  # near pairs share a long prefix
            y = PaddedPoint(x.prefix(int(rng.integers(1, T))) + y.prefix(T), m)
        d = prefix_distance(x.prefix(2 * T), y.prefix(2 * T), m)
        got = w1(DiscreteMeasure.dirac(x.prefix(T)), DiscreteMeasure.dirac(y.prefix(T)), metric)
        excess.append(abs(got - d) - 2 * metric.error)
    return _report("dirac_identity", t0, pairs, excess)


def check_reset_bound(seed: int = 0, trials: int = 200, m_max: int = 200, T: int = 41) -> dict:
    """Dropping the first n of m orbit points moves the empirical measure by <= 2n/m."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    metric = ShiftMetric(2, T)
    excess = []
    for _ in range(trials):
        mm = int(rng.integers(2, m_max + 1))
        n = int(rng.integers(1, mm))
        x = _random_point(rng, 2, mm + T)
        full = empirical_measure(x, mm, T)
        part = partial_empirical(x, n, mm, T)
        excess.append(w1(full, part, metric) - 2 * n / mm - 1e-9 - 2 * metric.error)
    return _report("reset_bound", t0, trials, excess)


def check_simplex_lipschitz(seed: int = 0, pairs: int = 100, L_values=range(1, 6), T: int = 41) -> dict:
    """W1(mu_t, mu_s) <= (L+1)|t - s| for unmixed periodic anchors on two symbols."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    fam = PeriodicFamily.from_words(SHIFT_WORDS, 2, depth=T)
    excess = []
    for L in L_values:
        sub = fam.subfamily(L + 1)
        for _ in range(pairs):
            t, s = _random_simplex(rng, L), _random_simplex(rng, L)
            mu, nu = simplex_measure(list(t), sub), simplex_measure(list(s), sub)
            C = cost_matrix(mu, nu, fam.metric)
            got = w1_exact(mu, nu, C).value
            excess.append(got - (L + 1) * float(np.linalg.norm(t - s)) - 2 * fam.metric.error - 1e-12)
    return _report("simplex_lipschitz", t0, len(excess), excess)


def separation_family(seed: int = 0, anchors: int = 4, zeta=Fraction(1, 2)) -> PeriodicFamily:
    """Mixed family of fixed points in the plane (row 0 is p-hat)."""
    rng = np.random.default_rng(seed)
    pts = rng.random((anchors + 1, 2)) * 1.5
    return PeriodicFamily.from_table(np.linalg.norm(pts[:, None] - pts[None], axis=2), hat=True, zeta=zeta)


def _random_B(rng, L):
    v = rng.dirichlet(np.ones(L + 1))
    return list(v[1:])


def check_separation(seed: int = 0, pairs: int = 100, L_values=(1, 2, 3), zeta=Fraction(1, 2),
                     fam: PeriodicFamily | None = None) -> dict:
    """W1(mu_iota(T), mu_iota(S)) >= zeta rho_L |T - S| / sqrt(L)."""
    t0 = time.time()
    rng = np.random.default_rng(seed)
    fam = fam or separation_family(seed, max(L_values) + 1, zeta)
    excess = []
    for L in L_values:
        sub = fam.subfamily(L + 1)
        rho, pivot = rho_L(sub, L)
        for _ in range(pairs):
            T, S = _random_B(rng, L), _random_B(rng, L)
            mu = simplex_measure(iota_map(T, pivot), sub)
            nu = simplex_measure(iota_map(S, pivot), sub)
            got = w1_exact(mu, nu, cost_matrix(mu, nu, fam.metric)).value
            bound = float(fam.zeta) * rho * float(np.linalg.norm(np.subtract(T, S))) / math.sqrt(L)
            excess.append(bound - got - 1e-12)
    return _report("separation", t0, len(excess), excess)


def newhouse_setup(L_max: int = 3, depth: int = 12):
    order = NewhouseOrder(1)
    fam = PeriodicFamily.from_words(NEWHOUSE_WORDS[:L_max + 1], 2, depth=depth, hat_word="1",
                                    zeta=order.zeta)
    spec = NewhouseRealization(order, max(fam.periods))
    return order, fam, spec


def check_code_conditions(L_max: int = 3) -> dict:
    """Both constructions re-verified block by block in integer arithmetic."""
    t0 = time.time()
    order, fam, spec = newhouse_setup(L_max)
    master = build_master_code(order, L_max=L_max, first_index=spec.k_D)
    shift = build_shift_code(PeriodicFamily.from_words(SHIFT_WORDS[:L_max + 1], 2), L_max=L_max)
    problems = master.verify() + shift.verify()
    return {"name": "code_conditions", "passed": not problems, "violations": len(problems),
            "trials": len(master.blocks) + len(shift.blocks), "problems": problems[:20],
            "seconds": round(time.time() - t0, 3)}


def check_shift_checkpoints(L_max: int = 3, T: int = 41) -> dict:
    """delta^n at each checkpoint against mu at the realized coordinates."""
    t0 = time.time()
    fam = PeriodicFamily.from_words(SHIFT_WORDS[:L_max + 1], 2, depth=T)
    code = build_shift_code(fam, L_max=L_max)
    x = realize_shift_point(code, fam)
    S = accumulation_samples(x, code, T)
    excess, ratios = [], []
    for b, mu in zip(code.blocks, S.measures):
        got = tbar(mbar(b.n, code.periods[:b.L + 1]))
        nu = simplex_measure(got, fam.subfamily(b.L + 1))
        bound = 2 * b.prev / b.checkpoint + 2 * (b.L + 1) / b.s
        d = w1(mu, nu, fam.metric)
        excess.append(d - bound - 2 * fam.metric.error)
        ratios.append(d / bound)
    return _report("shift_checkpoints", t0, len(excess), excess, max_ratio=max(ratios))


def check_master_checkpoints(L_max: int = 3) -> dict:
    """Synthetic orbit of a coded wandering domain at every checkpoint."""
    t0 = time.time()
    order, fam, spec = newhouse_setup(L_max)
    code = build_master_code(order, L_max=L_max, first_index=spec.k_D)
    orbit = realize_synthetic_orbit(spec, SyntheticSpace(fam), code)
    excess, ratios = [], []
    for b in code.blocks:
        mu = orbit.empirical(order.N(b.k[-1]))
        nu = simplex_measure(tbar(Mbar(b.k, order)), fam.subfamily(b.L + 1))
        bound = checkpoint_bound(orbit, b)["bound"]
        d = w1(mu, nu, fam.metric)
        excess.append(d - bound - 2 * fam.metric.error)
        ratios.append(d / bound)
    return _report("master_checkpoints", t0, len(excess), excess, max_ratio=max(ratios))


def coverage_tolerance(eps, L: int, net) -> float:
    """2 eps + covering radius of the lattice the net lives on."""
    D = math.lcm(*(v.denominator for t in net for v in t))
    return 2 * float(eps) + lattice_covering_radius(L, D)


def check_net_coverage(L_max: int = 3, T: int = 41) -> dict:
    """Every net point is within 2 eps_L + r_L of a checkpoint sample (r_L = net covering radius).

    Also reports the ablation: the nearest-sample distance of the last net
    point once the final block's checkpoint is dropped.
    """
    t0 = time.time()
    fam = PeriodicFamily.from_words(SHIFT_WORDS[:L_max + 1], 2, depth=T)
    code = build_shift_code(fam, L_max=L_max)
    S = accumulation_samples(realize_shift_point(code, fam), code, T)
    failures, worst = 0, -math.inf
    details, tols = {}, {}
    for L in range(1, L_max + 1):
        eps = float(code.eps_tilde[L])
        net = sorted({b.t for b in code.blocks if b.L == L})
        tol = coverage_tolerance(eps, L, net)
        rep = verify_simplex_in_accumulation(S, fam.subfamily(L + 1), L, net, tol)
        failures += len(rep["failures"])
        worst = max(worst, rep["max_nearest"] - tol)
        details[str(L)] = rep["max_nearest"]
        tols[str(L)] = tol
    last = code.blocks[-1]
    sub = fam.subfamily(L_max + 1)
    kept = verify_simplex_in_accumulation(S, sub, L_max, [last.t], tols[str(L_max)])
    dropped = verify_simplex_in_accumulation(S.select(range(len(S) - 1)), sub, L_max, [last.t],
                                             tols[str(L_max)])
    return {"name": "net_coverage", "passed": failures == 0, "violations": failures,
            "trials": len(code.blocks), "worst": worst, "max_nearest": details, "tol": tols,
            "ablation": {"with_final_block": kept["max_nearest"], "without_final_block": dropped["max_nearest"],
                         "covered_without": dropped["pass"]},
            "seconds": round(time.time() - t0, 3)}


SUITES = {
    "transport_oracle": check_transport_oracle,
    "dirac_identity": check_dirac_identity,
    "reset_bound": check_reset_bound,
    "simplex_lipschitz": check_simplex_lipschitz,
    "separation": check_separation,
    "code_conditions": check_code_conditions,
    "shift_checkpoints": check_shift_checkpoints,
    "master_checkpoints": check_master_checkpoints,
    "net_coverage": check_net_coverage,
}


def run_suites(names=None, seed: int = 0) -> list:
    out = []
    for name in names or SUITES:
        fn = SUITES[name]
        kw = {"seed": seed} if "seed" in fn.__code__.co_varnames else {}
        out.append(fn(**kw))
    return out


# --- emergence experiments -----------------------------------------------------

def emergence_growth(L_values=(1, 2, 3), net_denominators=(64, 32, 16), eps_grid=None,
                     window=(2.0 ** -2, 2.0 ** -5), T: int = 41, prune: float = 1e-9, jobs: int = 1) -> dict:
    """Packing exponents of shift codes with increasing L_max, plus the volume bound where it applies.

    Level L uses the lattice net of denominator ``net_denominators[L-1]``,
    so codes for different L_max share their lower levels.  The volume
    bound is checked at scales where that net is fine enough,
    1/D <= eps/(2(L+1)); the family is unmixed, hence zeta = 1.
    """
    t0 = time.time()
    eps_grid = list(eps_grid or dyadic_grid(1, 6))
    runs, theory_fail = [], []
    for L_max in L_values:
        fam = PeriodicFamily.from_words(SHIFT_WORDS[:L_max + 1], 2, depth=T)
        nets = {L: lattice_grid(L, net_denominators[L - 1]) for L in range(1, L_max + 1)}
        code = build_shift_code(fam, L_max=L_max, nets=nets)
        S = accumulation_samples(realize_shift_point(code, fam), code, T, prune=prune)
        space = SampleSpace(S, fam.metric, jobs)
        curve = emergence_curve(space, eps_grid)
        exponent = emergence_exponent(curve, window)
        checked = []
        for L in range(1, L_max + 1):
            rho, _ = rho_L(fam, L)
            for row in curve.rows:
                if 1 / net_denominators[L - 1] <= row.eps / (2 * (L + 1)):
                    bound = theory_lower_bound(1, rho, L, row.eps)
                    checked.append((L, row.eps, row.pack, bound))
                    if row.pack < bound:
                        theory_fail.append((L_max, L, row.eps, row.pack, bound))
        runs.append({"L_max": L_max, "samples": len(space), "exponent": exponent,
                     "pack": [r.pack for r in curve.rows], "cover": [r.cover for r in curve.rows],
                     "theory_checked": checked})
    exps = [r["exponent"] for r in runs]
    return {"name": "emergence_growth", "eps": eps_grid, "window": list(window), "runs": runs,
            "exponents": exps, "increasing": all(b > a for a, b in zip(exps, exps[1:])),
            "theory_failures": theory_fail, "seconds": round(time.time() - t0, 3)}


def historic_chain(T: int = 41, n_eps: int = 5) -> dict:
    """Covering counts along the orbit between the two most distant checkpoints of the L_max = 1 code.

    Every integer time between the two checkpoints is sampled, and the
    counts are compared with ceil(d/(2 eps)) - 1 at the first ``n_eps``
    dyadic scales below d/4.
    """
    t0 = time.time()
    fam = PeriodicFamily.from_words(SHIFT_WORDS[:2], 2, depth=T)
    code = build_shift_code(fam, L_max=1)
    x = realize_shift_point(code, fam)
    marks = accumulation_samples(x, code, T)
    D = SampleSpace(marks, fam.metric).matrix()
    i, j = sorted(np.unravel_index(int(np.argmax(D)), D.shape))
    d = float(D[i, j])
    a, b = marks.times[i], marks.times[j]
    S = accumulation_samples(x, [a, b], T, extra_times=range(a + 1, b))
    space = SampleSpace(S, fam.metric)
    top = math.floor(math.log2(4 / d)) + 1
    rows = []
    for e in (2.0 ** -k for k in range(top, top + n_eps)):
        need = math.ceil(d / (2 * e)) - 1
        rows.append({"eps": e, "cover": space.count(e), "required": need,
                     "historic": historic_lower_bound(None, None, e, distance=d)})
    ok = all(r["cover"] >= r["required"] for r in rows)
    return {"name": "historic_chain", "passed": ok, "times": [a, b], "distance": d, "samples": len(space),
            "rows": rows, "seconds": round(time.time() - t0, 3)}
