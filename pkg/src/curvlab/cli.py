"""Command-line interface.

stdout carries exactly one JSON report per successful (or failed-verdict)
run; progress and refusals go to stderr.  Exit codes:

0 pass, 2 invalid input, 3 a verdict or inequality failed,
4 the sampling oracle disagreed with the eigenvalue check,
5 an audit was refused because its hypotheses were not established.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .curvature import brute_force_cd_many, check_cd, check_vertex, curvature_profile
from .graph import GraphValidationError, random_conductance_graph, two_vertex_graph, validate, z_non_h2_conductances
from .graphio import GraphFormatError, format_conductance, format_graph, read_function, read_graph
from .groups import GroupSpec, generate_cayley
from .modified_heat import (
    AdmissibilityError,
    PicardDivergence,
    SolveConfig,
    comparison_regime,
    is_admissible,
    solve,
    verify_comparison,
    verify_edge_oscillation,
    verify_gradient_decay,
    verify_harnack,
    verify_li_yau,
)
from .operators import gamma_sq, local_forms
from .report import RunManifest, dumps, file_digest
from .semigroup import DEFAULT_TOL, apply_semigroup, audit_gradient_estimates

EXIT_OK, EXIT_INPUT, EXIT_FAIL, EXIT_ORACLE, EXIT_VACUOUS = 0, 2, 3, 4, 5
ORACLE_DELTA = 0.01


class Refused(Exception):
    pass


def _dim(text: str) -> float:
    if text.lower() in ("inf", "infinity", "oo"):
        return math.inf
    v = float(text)
    if v < 1:
        raise argparse.ArgumentTypeError("dimension must be >= 1 or inf")
    return v


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _emit(report: dict) -> None:
    sys.stdout.write(dumps(report))


def _load(path: str, manifest: RunManifest):
    manifest.inputs[path] = file_digest(path)
    return read_graph(path)


# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    m = RunManifest("validate", tolerances={"tol_markov": 1e-12, "tol_rev": 1e-12}, deterministic=not args.timing)
    try:
        g = _load(args.graph, m)
    except GraphValidationError as e:
        _emit(m.finish({"valid": False, "error": {"kind": e.kind, "message": str(e), "record": list(e.record)}}))
        print(f"invalid graph: {e}", file=sys.stderr)
        return EXIT_INPUT
    rep = validate(g)
    _emit(m.finish(rep.to_dict()))
    return EXIT_OK if rep.ok else EXIT_INPUT


def cmd_gen(args) -> int:
    if args.cayley:
        kind = args.cayley
        if kind == "zd":
            if args.radius is None:
                raise SystemExit("gen: --cayley zd needs --radius")
            spec = GroupSpec.integer_lattice(args.dims)
        elif kind == "torus":
            spec = GroupSpec.torus(args.dims, args.mod)
        elif kind == "cyclic":
            spec = GroupSpec.cyclic(args.mod)
        else:
            spec = GroupSpec.symmetric(args.n)
        g = generate_cayley(spec, radius=args.radius, normalization=args.mode)
        text = format_graph(g, comment=f"cayley {kind}")
    elif args.conductance_random:
        g = random_conductance_graph(args.vertices, seed=args.seed)
        text = format_graph(g, comment=f"random conductance seed {args.seed}")
    elif args.example_z_nonh2:
        if args.radius is None:
            raise SystemExit("gen: --example-z-nonh2 needs --radius")
        conds, measure = z_non_h2_conductances(args.radius)
        text = format_conductance(conds, measure, comment=f"integer line, measure i^-4, radius {args.radius}")
    elif args.two_vertex:
        text = format_graph(two_vertex_graph())
    else:
        raise SystemExit("gen: choose a family")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_curvature(args) -> int:
    m = RunManifest(
        "curvature",
        seed=args.seed,
        tolerances={"psd_rel": 1e-9, "null_rel": 1e-12, "oracle_trials": args.oracle_trials},
        deterministic=not args.timing,
    )
    g = _load(args.graph, m)
    scope = "all" if args.scope == "all" else "trusted"
    body: dict = {}
    disagreements = []
    if args.k is not None:
        verdict = check_cd(g, args.k, args.n, scope=scope)
        body["verdict"] = verdict.to_dict()
        for v in verdict.vertices:
            r = brute_force_cd_many(g, v.vertex, [(args.k, args.n)], args.oracle_trials, args.seed + v.vertex)[0]
            if r.satisfied != v.satisfied:
                disagreements.append({"label": v.label, "K": args.k, "check_cd": v.satisfied, "oracle": r.satisfied})
        status = EXIT_OK if verdict.satisfied else EXIT_FAIL
    else:
        prof = curvature_profile(g, args.n, scope=scope)
        body["profile"] = prof.to_dict()
        for x, lab, k in zip(prof.vertices, prof.labels, prof.k_opt):
            if not math.isfinite(k):
                continue
            b = local_forms(g, x)
            qs = [(k - ORACLE_DELTA, args.n), (k + ORACLE_DELTA, args.n)]
            res = brute_force_cd_many(g, x, qs, args.oracle_trials, args.seed + x)
            for (K, n), r in zip(qs, res):
                ok = check_vertex(g, x, K, n, b).satisfied
                if ok != r.satisfied:
                    disagreements.append({"label": lab, "K": K, "check_cd": ok, "oracle": r.satisfied})
        status = EXIT_OK
    body["oracle"] = {"trials": args.oracle_trials, "disagreements": disagreements}
    if disagreements:
        print(f"oracle disagreement at {len(disagreements)} queries", file=sys.stderr)
        status = EXIT_ORACLE
    _emit(m.finish(body))
    return status


def cmd_heat(args) -> int:
    m = RunManifest("heat", seed=args.seed, tolerances={"semigroup_tol": args.tol, "audit_rel": 1e-8}, deterministic=not args.timing)
    g = _load(args.graph, m)
    corpus = []
    if args.f:
        m.inputs[args.f] = file_digest(args.f)
        corpus.append(read_function(args.f, g))
    if args.random_corpus:
        rng = np.random.default_rng(args.seed)
        corpus += [rng.standard_normal(g.n) for _ in range(args.random_corpus)]
    if not corpus:
        raise SystemExit("heat: give --f and/or --random-corpus")
    times = args.t
    body: dict = {}
    status = EXIT_OK
    if args.audit:
        K, n = args.audit
        verdict = check_cd(g, K, n, scope="all")
        m.hypotheses[f"CD({K},{n})"] = verdict.satisfied
        if K < 0 or not verdict.satisfied:
            raise Refused(f"graph does not satisfy CD({K},{n}) with K >= 0")
        rep = audit_gradient_estimates(g, corpus, times, K, n, args.tol, hypothesis_ok=True)
        body["audit"] = rep.to_dict()
        status = EXIT_OK if rep.passed else EXIT_FAIL
    f = corpus[0]
    rows = []
    summary = []
    for t in times:
        pf = apply_semigroup(g, t, f, args.tol)
        one = apply_semigroup(g, t, np.ones(g.n), args.tol)
        summary.append({"t": t, "sup": float(pf.max()), "inf": float(pf.min()), "stochastic_residual": float(np.abs(one - 1).max()) if g.stochastic else None})
        rows += [(t, lab, v) for lab, v in zip(g.labels, pf)]
    body["semigroup"] = summary
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("t,vertex,value\n")
            fh.writelines(f"{t:.17g},{lab},{v:.17g}\n" for t, lab, v in rows)
    _emit(m.finish(body))
    return status


VERIFIERS = ("decay", "oscillation", "liyau", "harnack", "comparison")


def _read_pairs(path: str) -> list[tuple[str, str, float, float]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tok = line.split("#", 1)[0].split()
            if tok:
                if len(tok) != 4:
                    raise ValueError(f"pairs file: expected 'x y T1 T2', got {line.strip()!r}")
                out.append((tok[0], tok[1], float(tok[2]), float(tok[3])))
    return out


def cmd_modified_heat(args) -> int:
    m = RunManifest(
        "modified-heat",
        tolerances={"picard_tol": args.picard_tol, "verify_rel": 1e-7, "semigroup_tol": 1e-12},
        deterministic=not args.timing,
    )
    g = _load(args.graph, m)
    m.inputs[args.u0] = file_digest(args.u0)
    u0 = read_function(args.u0, g)
    verify = [v for v in (args.verify.split(",") if args.verify else []) if v]
    for v in verify:
        if v not in VERIFIERS:
            raise SystemExit(f"modified-heat: unknown verifier {v!r}")
    gammas = args.gamma
    for gm in gammas:
        comparison_regime(gm)

    admissible = is_admissible(g, u0)
    m.hypotheses["gamma_u0_sup"] = float(gamma_sq(g, u0).max())
    m.hypotheses["alpha"] = g.alpha
    m.hypotheses["admissible"] = admissible
    K = None
    if "decay" in verify:
        if args.k is not None:
            K = args.k
        else:
            K = curvature_profile(g, math.inf, scope="all").k_inf
        ok = K >= 0 and check_cd(g, K, math.inf, scope="all").satisfied
        m.hypotheses[f"CD({K},inf)"] = ok
        if not ok:
            raise Refused(f"gradient decay needs CD(K,inf) with K >= 0; K = {K}")
    if any(v in verify for v in ("oscillation", "comparison", "harnack", "liyau")) and not admissible:
        raise Refused("these verifiers need |Gamma u0|_inf < alpha/2")
    if any(v in verify for v in ("liyau", "harnack")):
        if args.n is None:
            raise Refused("Li-Yau and Harnack need --n")
        ok = check_cd(g, 0.0, args.n, scope="all").satisfied
        m.hypotheses[f"CD(0,{args.n})"] = ok
        if not ok:
            raise Refused(f"graph does not satisfy CD(0,{args.n})")

    cfg = SolveConfig(u0, args.horizon, args.step, method=args.method, picard_tol=args.picard_tol)
    try:
        trace = solve(g, cfg)
    except AdmissibilityError as e:
        raise Refused(str(e)) from None

    reports = []
    if "decay" in verify:
        reports.append(verify_gradient_decay(trace, K))
    if "oscillation" in verify:
        reports.append(verify_edge_oscillation(trace))
    if "liyau" in verify:
        reports.append(verify_li_yau(trace, args.n))
    if "harnack" in verify:
        if args.pairs:
            m.inputs[args.pairs] = file_digest(args.pairs)
            reports.append(verify_harnack(trace, args.n, pairs=_read_pairs(args.pairs)))
        else:
            reports.append(verify_harnack(trace, args.n, T1=trace.node(0.25 * args.horizon) * trace.grid_step, T2=trace.node(0.75 * args.horizon) * trace.grid_step))
    if "comparison" in verify:
        reports += verify_comparison(trace, gammas)

    body = {
        "diagnostics": trace.diagnostics(),
        "inequalities": [r.to_dict() for r in reports],
        "pass": all(r.passed for r in reports),
    }
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(trace.to_csv())
    report = m.finish(body)
    if args.sidecar:
        with open(args.sidecar, "w", encoding="utf-8") as fh:
            fh.write(dumps({"manifest": report["manifest"], **trace.diagnostics()}))
    _emit(report)
    return EXIT_OK if body["pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curvlab", description="Curvature and heat-flow analysis on weighted graphs.")
    p.add_argument("--version", action="version", version=f"curvlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--timing", action="store_true", help="record wall-clock time (reports stop being byte-identical)")

    v = sub.add_parser("validate", help="check the bounded-geometry axioms")
    v.add_argument("graph")
    common(v)
    v.set_defaults(func=cmd_validate)

    gen = sub.add_parser("gen", help="write a graph file for a standard family")
    fam = gen.add_mutually_exclusive_group(required=True)
    fam.add_argument("--cayley", choices=("zd", "torus", "cyclic", "sym"))
    fam.add_argument("--conductance-random", action="store_true")
    fam.add_argument("--example-z-nonh2", action="store_true")
    fam.add_argument("--two-vertex", action="store_true")
    gen.add_argument("--dims", type=int, default=1)
    gen.add_argument("--mod", type=int, default=None)
    gen.add_argument("--n", type=int, default=3)
    gen.add_argument("--radius", type=int, default=None)
    gen.add_argument("--mode", choices=("markov", "unnormalized"), default="markov")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--vertices", type=int, default=None)
    gen.add_argument("-o", "--output")
    gen.set_defaults(func=cmd_gen)

    c = sub.add_parser("curvature", help="CD(K,n) verdicts or optimal-curvature profiles")
    c.add_argument("graph")
    c.add_argument("--n", type=_dim, default=math.inf)
    c.add_argument("--k", type=float, default=None)
    c.add_argument("--profile", action="store_true")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--oracle-trials", type=int, default=10_000)
    c.add_argument("--scope", choices=("all", "trusted"), default="all")
    common(c)
    c.set_defaults(func=cmd_curvature)

    h = sub.add_parser("heat", help="apply the heat semigroup and audit gradient estimates")
    h.add_argument("graph")
    h.add_argument("--t", type=_floats, required=True)
    h.add_argument("--f")
    h.add_argument("--random-corpus", type=int, default=0)
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--audit", type=lambda s: (float(s.split(",")[0]), _dim(s.split(",")[1])))
    h.add_argument("--tol", type=float, default=DEFAULT_TOL)
    h.add_argument("--csv")
    common(h)
    h.set_defaults(func=cmd_heat)

    mh = sub.add_parser("modified-heat", help="solve du/dt = Δu + Γu and verify its inequalities")
    mh.add_argument("graph")
    mh.add_argument("--u0", required=True)
    mh.add_argument("--horizon", type=float, required=True)
    mh.add_argument("--step", type=float, required=True)
    mh.add_argument("--method", choices=("picard", "rk4", "both"), default="picard")
    mh.add_argument("--picard-tol", type=float, default=1e-10)
    mh.add_argument("--verify", default="")
    mh.add_argument("--pairs")
    mh.add_argument("--n", type=_dim, default=None)
    mh.add_argument("--k", type=float, default=None)
    mh.add_argument("--gamma", type=_floats, default=[0.5, 8.0])
    mh.add_argument("--csv")
    mh.add_argument("--sidecar")
    common(mh)
    mh.set_defaults(func=cmd_modified_heat)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Refused as e:
        print(f"vacuous audit refused: {e}", file=sys.stderr)
        return EXIT_VACUOUS
    except (GraphFormatError, GraphValidationError, ValueError, OSError, PicardDivergence) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
