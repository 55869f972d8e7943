"""Acceptance suite: one PASS/FAIL line per criterion, printed in the terminal summary."""

import math

import numpy as np
import pytest

from curvlab.curvature import bonnet_myers_check, brute_force_cd_many, check_cd, check_vertex, curvature_profile, optimal_k
from curvlab.geometry import check_local_doubling, doubling_report, volume_profile
from curvlab.graph import diameter, random_conductance_graph, truncate, two_vertex_graph
from curvlab.groups import CayleyOracle, GroupSpec, generate_cayley
from curvlab.modified_heat import (
    SolveConfig,
    solve,
    verify_comparison,
    verify_edge_oscillation,
    verify_gradient_decay,
    verify_harnack,
    verify_li_yau,
)
from curvlab.operators import bochner_residual, cayley_partials, gamma_sq
from curvlab.semigroup import apply_semigroup, audit_gradient_estimates

INF = math.inf
SEEDS = range(200)


def report(log, k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    log.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def corpus():
    return [random_conductance_graph(seed=s) for s in SEEDS]


def column_scale(F):
    return np.maximum(1.0, np.max(np.abs(F), axis=0) ** 2)


def test_criterion_1_universal_cd(corpus, acceptance_log):
    bad = [s for s, g in zip(SEEDS, corpus) if not check_cd(g, -1.0, 2.0, scope="all").satisfied]
    sizes = [g.n for g in corpus]
    report(acceptance_log, 1, not bad, f"CD(-1,2) on {len(corpus)} graphs ({min(sizes)}-{max(sizes)} vertices), violations: {bad}")


def test_criterion_2_bochner(corpus, acceptance_log):
    rng = np.random.default_rng(2)
    worst = 0.0
    for g in corpus:
        F = rng.standard_normal((g.n, 100))
        res = np.abs(bochner_residual(g, F)) / column_scale(F)
        worst = max(worst, float(res.max()))
    report(acceptance_log, 2, worst <= 1e-10, f"max |residual|/scale = {worst:.3e} (limit 1e-10)")


def test_criterion_3_cayley(acceptance_log):
    checks = {}
    for d in (1, 2, 3):
        checks[f"torus({d},7) CD(0,{2 * d})"] = check_cd(generate_cayley(GroupSpec.torus(d, 7)), 0.0, 2 * d).satisfied
    s3 = generate_cayley(GroupSpec.symmetric(3), normalization="unnormalized")
    s4 = generate_cayley(GroupSpec.symmetric(4), normalization="unnormalized")
    checks["S3 CD(0,6)"] = check_cd(s3, 0.0, 6).satisfied
    checks["S4 CD(0,12)"] = check_cd(s4, 0.0, 12).satisfied
    rng = np.random.default_rng(3)
    zero = True
    for d in (1, 2, 3):
        g = generate_cayley(GroupSpec.torus(d, 7), normalization="unnormalized")
        cp = cayley_partials(g, rng.standard_normal(g.n))
        zero &= bool(np.all(cp.ricci_part == 0))
    checks["abelian ricci_part == 0"] = zero
    failed = [k for k, v in checks.items() if not v]
    report(acceptance_log, 3, not failed, f"{len(checks)} checks, failed: {failed}")


def test_criterion_4_oracle_agreement(corpus, acceptance_log):
    disagreements = []
    queries = 0
    for idx, g in enumerate(corpus):
        boundary = idx < 20
        for x in range(g.n):
            qs = [(-1.0, 2.0)]
            if boundary:
                k = optimal_k(g, x, 2.0)
                qs += [(k - 0.01, 2.0), (k + 0.01, 2.0)]
            res = brute_force_cd_many(g, x, qs, trials=10_000, seed=idx * 1000 + x)
            for (K, n), r in zip(qs, res):
                queries += 1
                if check_vertex(g, x, K, n).satisfied != r.satisfied:
                    disagreements.append((idx, g.labels[x], K))
    report(acceptance_log, 4, not disagreements, f"{queries} vertex queries at 1e4 trials, disagreements: {disagreements[:5]}")


def test_criterion_5_semigroup(corpus, acceptance_log):
    graphs = list(corpus[:20]) + [generate_cayley(GroupSpec.torus(2, 7))]
    rng = np.random.default_rng(5)
    one_err = law_err = 0.0
    for g in graphs:
        f = rng.standard_normal(g.n)
        for t in (0.1, 1.0, 5.0):
            one_err = max(one_err, float(np.max(np.abs(apply_semigroup(g, t, np.ones(g.n)) - 1.0))))
            twice = apply_semigroup(g, t, apply_semigroup(g, t, f))
            law_err = max(law_err, float(np.max(np.abs(twice - apply_semigroup(g, 2 * t, f)))))
    closed = apply_semigroup(two_vertex_graph(), math.log(2) / 2, [0.0, 1.0], tol=1e-14)
    closed_err = float(np.max(np.abs(closed - [0.25, 0.75])))
    ok = one_err <= 1e-12 and law_err <= 2e-10 and closed_err <= 1e-12
    report(acceptance_log, 5, ok, f"|P_t1-1| = {one_err:.2e}, law residual = {law_err:.2e}, closed form error = {closed_err:.2e}")


def test_criterion_6_gradient_estimates(acceptance_log):
    g = generate_cayley(GroupSpec.torus(2, 7))
    rng = np.random.default_rng(6)
    fs = [rng.uniform(-1, 1, g.n) for _ in range(50)]
    rep = audit_gradient_estimates(g, fs, [0.1, 0.5, 1.0, 2.0], K=0.0, n=4.0)
    a, b = rep.record("gammapt2bis"), rep.record("ptf2")
    ok = not rep.vacuous and a.passed and b.passed and rep.passed
    report(
        acceptance_log, 6, ok,
        f"dimensional gradient bound viol = {a.max_violation:.2e}, variance bound viol = {b.max_violation:.2e} (limit 1e-8), all records pass: {rep.passed}",
    )


HORIZON, STEP = 0.4, 0.001


def _configs():
    tv = two_vertex_graph()
    u_tv = np.array([0.0, math.sqrt(0.9)])
    torus = generate_cayley(GroupSpec.torus(2, 7))
    u_t = np.zeros(torus.n)
    u_t[torus.vertex("0,0")] = math.sqrt(0.225)
    # (graph, u0, K for the decay envelope, dimension for Li-Yau and Harnack)
    return {"two-vertex": (tv, u_tv, None, 1.0), "torus(2,7)": (torus, u_t, 0.0, 4.0)}


@pytest.fixture(scope="module")
def runs():
    out = {}
    for name, (g, u0, K, n) in _configs().items():
        assert float(np.max(gamma_sq(g, u0))) == pytest.approx(0.9 * g.alpha / 2, rel=1e-12)
        if K is None:
            K = curvature_profile(g, INF, scope="all").k_inf
        out[name] = (solve(g, SolveConfig(u0, HORIZON, STEP, method="both")), K, n)
    return out


def test_criterion_7_modified_heat_solver(runs, acceptance_log):
    parts, ok = [], True
    for name, (tr, _, _) in runs.items():
        good = tr.oracle_deviation <= 1e-6 and tr.m_bound_ok() and tr.max_ratio() <= 0.6
        ok &= good
        parts.append(f"{name}: dev {tr.oracle_deviation:.1e}, M_k ok {tr.m_bound_ok()}, max ratio {tr.max_ratio():.3f}")
    report(acceptance_log, 7, ok, "; ".join(parts))


def test_criterion_8_inequality_audits(runs, acceptance_log):
    parts, ok = [], True
    for name, (tr, K, n) in runs.items():
        reps = [
            verify_gradient_decay(tr, K),
            verify_edge_oscillation(tr),
            verify_li_yau(tr, n),
            verify_harnack(tr, n, T1=0.25 * HORIZON, T2=0.75 * HORIZON),
            *verify_comparison(tr, [0.5, 8.0]),
        ]
        good = all(r.passed for r in reps)
        ok &= good
        worst = max(r.max_violation for r in reps)
        parts.append(f"{name}: {len(reps)} inequalities, worst viol/scale {worst:.1e}")
    report(acceptance_log, 8, ok, "; ".join(parts) + " (limit 1e-7)")


def l1_ball(r):
    return sum(1 for a in range(-r, r + 1) for b in range(-r, r + 1) if abs(a) + abs(b) <= r)


def test_criterion_9_doubling(corpus, acceptance_log):
    local_ok = True
    for g in corpus:
        r_max = 2 * diameter(g)
        for x in range(g.n):
            local_ok &= check_local_doubling(volume_profile(g, x, r_max)).holds
    tr1 = truncate(CayleyOracle(GroupSpec.integer_lattice(1)), (0,), 24)
    exact1 = all(
        np.array_equal(volume_profile(tr1, lab, 20).volumes, [2.0 * (2 * r + 1) for r in range(21)])
        for lab in ("0", "1", "-2")
    )
    tr2 = truncate(CayleyOracle(GroupSpec.integer_lattice(2)), (0, 0), 22)
    prof = volume_profile(tr2, "0,0", 20)
    counting = np.array([4.0 * l1_ball(r) for r in range(21)])
    oracle_ok = np.array_equal(prof.volumes, counting)
    rep = doubling_report(tr2, None, 20)
    sup = rep.empirical_constant
    ok = local_ok and exact1 and oracle_ok and 3.0 <= sup <= 4.5
    report(
        acceptance_log, 9, ok,
        f"local bound on corpus: {local_ok}, lattice(1) exact: {exact1}, lattice(2) counting match: {oracle_ok}, sup ratio {sup:.4f} in [3, 4.5]",
    )


def test_criterion_10_bonnet_myers(corpus, acceptance_log):
    tv = bonnet_myers_check(two_vertex_graph(), scope="all")
    k_ok = abs(tv.k_inf - 2.0) <= 1e-9
    sharp = tv.diameter == 1 and abs(2.0 / tv.k_inf - 1.0) <= 1e-9
    applicable = held = 0
    for g in corpus:
        rep = bonnet_myers_check(g, scope="all")
        if rep.applicable:
            applicable += 1
            held += bool(rep.holds)
    ok = k_ok and sharp and tv.holds and held == applicable
    report(
        acceptance_log, 10, ok,
        f"two-vertex K_inf = {tv.k_inf!r}, diam = {tv.diameter}, 2/K_inf = {2 / tv.k_inf!r}; corpus: {held}/{applicable} graphs with K_inf > 0 satisfy the bound",
    )
