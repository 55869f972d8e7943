"""Heat semigroup P_t = exp(tΔ), Duhamel solves and the gradient-estimate audit."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .graph import WeightedGraph
from .operators import gamma_sq, laplacian, scale_of
from .report import parallel_map

DEFAULT_TOL = 1e-10
AUDIT_REL = 1e-8
DUHAMEL_REFINE_TOL = 1e-8
MAX_REFINEMENTS = 2


@dataclass(frozen=True)
class SemigroupPlan:
    t: float
    substeps: int
    taylor_order: int
    error_bound: float
    norm_bound: float  # a-priori bound on the sup-norm of Δ


def delta_norm_bound(g: WeightedGraph) -> float:
    # ‖Δ‖_{∞→∞} ≤ 2 max_x Σ_y p(x,y), which is 2 for a Markov kernel
    return 2.0 * float(g.row_sums.max())


def plan_semigroup(g: WeightedGraph, t: float, tol: float = DEFAULT_TOL) -> SemigroupPlan:
    if t < 0:
        raise ValueError("time must be nonnegative")
    b = delta_norm_bound(g)
    if t == 0:
        return SemigroupPlan(0.0, 1, 0, 0.0, b)
    s = math.ceil(b * t / 2.0) + 1
    x = b * t / s
    # remainder of the exponential series after order m: ≤ x^{m+1}/(m+1)! e^x
    m, term = 0, x
    while term * math.exp(x) > tol / s:
        m += 1
        term *= x / (m + 1)
    return SemigroupPlan(t, s, m, s * term * math.exp(x), b)


def apply_semigroup(g: WeightedGraph, t: float, f, tol: float = DEFAULT_TOL, plan: SemigroupPlan | None = None) -> np.ndarray:
    """P_t f for ``f`` of shape (n,) or (n, k)."""
    f = np.array(f, dtype=float)
    if f.shape[0] != g.n:
        raise ValueError("function length does not match the graph")
    plan = plan or plan_semigroup(g, t, tol)
    if plan.t == 0:
        return f
    h = plan.t / plan.substeps
    out = f
    for _ in range(plan.substeps):
        acc = out.copy()
        term = out
        for k in range(1, plan.taylor_order + 1):
            term = laplacian(g, term) * (h / k)
            acc += term
        out = acc
    return out


class SemigroupStepper:
    """Repeated application of P_h for a fixed step, with a cached plan."""

    def __init__(self, g: WeightedGraph, h: float, tol: float = DEFAULT_TOL):
        self.g = g
        self.h = h
        self.plan = plan_semigroup(g, h, tol)

    def __call__(self, f) -> np.ndarray:
        return apply_semigroup(self.g, self.h, f, plan=self.plan)


# ---------------------------------------------------------------------------
# Duhamel


def simpson_weights(i: int) -> np.ndarray:
    """Composite weights (in units of the step) for ∫ over [0, i h] from nodes 0..i.

    Simpson for an even number of intervals; otherwise Simpson up to i-3 and
    the 3/8 rule on the last three.  i = 1 is handled by the caller.
    """
    w = np.zeros(i + 1)
    if i == 0:
        return w
    if i == 1:
        raise ValueError("a single interval needs the midpoint treatment")
    if i == 2 or i % 2 == 0:
        w[0:i:2] += 1
        w[2 : i + 1 : 2] += 1
        w[1:i:2] += 4
        return w / 3.0
    j = i - 3
    if j > 0:
        w[: j + 1] = simpson_weights(j)
    w[j : j + 4] += np.array([3, 9, 9, 3]) / 8.0
    return w


def duhamel_solve(
    g: WeightedGraph,
    u0,
    forcing: np.ndarray | Callable[[float], np.ndarray] | None,
    T: float,
    steps: int,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """u(t_i) = P_{t_i}u₀ + ∫₀^{t_i} P_{t_i-s} F(s) ds on the grid t_i = i T/steps.

    ``forcing`` is either an array of shape (steps+1, n) sampled on the grid
    or a callable of time; a callable is re-sampled on refined grids until
    successive answers agree.
    """
    if steps < 2:
        raise ValueError("the grid needs at least 3 nodes")
    u0 = np.asarray(u0, dtype=float)
    if callable(forcing):
        return _duhamel_refined(g, u0, forcing, T, steps, tol)
    return _duhamel_grid(g, u0, forcing, T, steps, tol)


def _duhamel_refined(g, u0, fn, T, steps, tol):
    def sample(k):
        return np.array([fn(T * i / k) for i in range(k + 1)], dtype=float)

    prev = _duhamel_grid(g, u0, sample(steps), T, steps, tol)
    for r in range(1, MAX_REFINEMENTS + 1):
        k = steps * 2**r
        cur = _duhamel_grid(g, u0, sample(k), T, k, tol)[:: 2**r]
        scale = max(scale_of(u0), scale_of(cur))
        if np.max(np.abs(cur - prev)) < DUHAMEL_REFINE_TOL * scale:
            return cur
        prev = cur
    warnings.warn("Duhamel quadrature did not settle after grid refinement", RuntimeWarning, stacklevel=3)
    return prev


def _duhamel_grid(g: WeightedGraph, u0: np.ndarray, forcing, T: float, steps: int, tol: float) -> np.ndarray:
    h = T / steps
    N = steps
    step = SemigroupStepper(g, h, tol)
    out = np.empty((N + 1, g.n))
    cur = u0.copy()
    out[0] = cur
    for i in range(1, N + 1):
        cur = step(cur)
        out[i] = cur
    if forcing is None:
        return out
    F = np.asarray(forcing, dtype=float)
    if F.shape != (N + 1, g.n):
        raise ValueError(f"forcing must have shape {(N + 1, g.n)}, got {F.shape}")
    W = np.zeros((N + 1, N + 1))
    for i in range(2, N + 1):
        W[i, : i + 1] = simpson_weights(i)
    # lag k: columns P_{kh} F_j contribute to u_{j+k} with weight W[j+k, j]
    E = F.T.copy()
    integral = np.zeros((N + 1, g.n))
    for k in range(0, N + 1):
        if k:
            E = step(E[:, : N + 1 - k])
        j = np.arange(N + 1 - k)
        integral[k:] += (W[j + k, j][:, None]) * E.T[: N + 1 - k]
    # first interval: Simpson on [0, h], midpoint forcing from the quadratic through F0, F1, F2
    half = SemigroupStepper(g, h / 2, tol)
    f_mid = (3 * F[0] + 6 * F[1] - F[2]) / 8.0
    integral[1] = (h / 6.0) * (step(F[0]) + 4 * half(f_mid) + F[1])
    integral[2:] *= h
    return out + integral


# ---------------------------------------------------------------------------
# gradient estimates

INEQUALITIES = ("gammapt1", "gammapt2", "gammapt2bis", "gammapt", "gradpt0", "gradpt", "ptf2", "stochastic_completeness")


@dataclass
class InequalityRecord:
    name: str
    max_violation: float
    tolerance: float
    samples: int
    applicable: bool = True

    @property
    def passed(self) -> bool:
        return (not self.applicable) or self.max_violation <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "inequality": self.name,
            "applicable": self.applicable,
            "samples": self.samples,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class GradientAuditReport:
    K: float
    n: float
    times: list[float]
    corpus_size: int
    vacuous: bool
    records: list[InequalityRecord] = field(default_factory=list)
    reason: str = ""

    @property
    def passed(self) -> bool:
        return (not self.vacuous) and all(r.passed for r in self.records)

    def record(self, name: str) -> InequalityRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "n": self.n,
            "grid": self.times,
            "corpus_size": self.corpus_size,
            "vacuous": self.vacuous,
            "reason": self.reason,
            "pass": self.passed,
            "inequalities": [r.to_dict() for r in self.records],
        }


GAMMAPT1_INTERVALS = 64


def _gammapt1_rhs(g: WeightedGraph, f: np.ndarray, t: float, K: float, n: float, tol: float) -> tuple[np.ndarray, float]:
    """e^{-2Kt} P_t Γf - (2/n) ∫₀^t e^{-2Ks} P_s (P_{t-s}Δf)² ds and a quadrature error estimate."""
    pt_gamma = apply_semigroup(g, t, gamma_sq(g, f), tol)
    lead = math.exp(-2 * K * t) * pt_gamma
    if n == math.inf:
        return lead, 0.0

    def integral(m: int) -> np.ndarray:
        h = t / m
        step = SemigroupStepper(g, h, tol)
        # q_j = P_{t - s_j} Δf for s_j = j h
        q = [None] * (m + 1)
        cur = laplacian(g, f)
        q[m] = cur
        for j in range(m - 1, -1, -1):
            cur = step(cur)
            q[j] = cur
        # v_j = e^{-2K s_j} P_{s_j} (q_j)²: peel one column per application of P_h
        w = simpson_weights(m)
        block = np.stack([math.exp(-2 * K * j * h) * q[j] ** 2 for j in range(m + 1)], axis=1)
        out = block[:, 0] * w[0]
        block, wts = block[:, 1:], w[1:]
        while block.shape[1]:
            block = step(block)
            out = out + block[:, 0] * wts[0]
            block, wts = block[:, 1:], wts[1:]
        return out * h

    coarse = integral(GAMMAPT1_INTERVALS // 2)
    fine = integral(GAMMAPT1_INTERVALS)
    err = float(np.max(np.abs(fine - coarse))) / 15.0 * (2.0 / n)
    return lead - (2.0 / n) * fine, err


def audit_gradient_estimates(
    g: WeightedGraph,
    corpus: Sequence[np.ndarray],
    times: Sequence[float],
    K: float,
    n: float,
    tol: float = DEFAULT_TOL,
    hypothesis_ok: bool | None = None,
) -> GradientAuditReport:
    """Evaluate the semigroup gradient estimates pointwise over ``corpus`` × ``times``.

    The audit needs CD(K,n) with K ≥ 0.  Unless ``hypothesis_ok`` is given it
    is established here with check_cd; when it fails the report is vacuous.
    """
    from .curvature import check_cd

    times = [float(t) for t in times]
    rep = GradientAuditReport(K, n, times, len(corpus), vacuous=False)
    if K < 0:
        rep.vacuous, rep.reason = True, "the estimates assume K >= 0"
        return rep
    if hypothesis_ok is None:
        hypothesis_ok = check_cd(g, K, n, scope="all").satisfied
    if not hypothesis_ok:
        rep.vacuous, rep.reason = True, f"graph does not satisfy CD({K},{n})"
        return rep

    inv_n = 0.0 if n == math.inf else 1.0 / n
    viol = {name: 0.0 for name in INEQUALITIES}
    count = {name: 0 for name in INEQUALITIES}
    tol_of = {name: 0.0 for name in INEQUALITIES}

    def note(name, v, scale):
        viol[name] = max(viol[name], float(v) / scale)
        count[name] += 1

    def one(f):
        f = np.asarray(f, dtype=float)
        scale = scale_of(f)
        sup_f = float(np.max(np.abs(f))) if f.size else 0.0
        gf = gamma_sq(g, f)
        res = []
        for t in times:
            ptf = apply_semigroup(g, t, f, tol)
            g_pt = gamma_sq(g, ptf)
            pt_gf = apply_semigroup(g, t, gf, tol)
            pt_lap = apply_semigroup(g, t, laplacian(g, f), tol)
            r = {}
            if t > 0 and n != math.inf:
                rhs, err = _gammapt1_rhs(g, f, t, K, n, tol)
                r["gammapt1"] = (np.max(g_pt - rhs), err)
            if K > 0 and n != math.inf:
                rhs = math.exp(-2 * K * t) * pt_gf + (math.exp(-2 * K * t) - 1) / (K * n) * pt_lap**2
                r["gammapt2"] = (np.max(g_pt - rhs), 0.0)
            if K == 0 and n != math.inf:
                rhs = pt_gf - 2 * t * inv_n * pt_lap**2
                r["gammapt2bis"] = (np.max(g_pt - rhs), 0.0)
            r["gammapt"] = (np.max(g_pt - math.exp(-2 * K * t) * pt_gf), 0.0)
            r["gradpt0"] = (np.max(g_pt) - np.max(gf), 0.0)
            if t > 0:
                r["gradpt"] = (math.sqrt(float(np.max(g_pt))) - sup_f / math.sqrt(t), 0.0)
            var = apply_semigroup(g, t, f * f, tol) - ptf**2
            r["ptf2"] = (np.max(2 * t * g_pt - var), 0.0)
            if g.stochastic:
                one_v = apply_semigroup(g, t, np.ones(g.n), tol)
                r["stochastic_completeness"] = (np.max(np.abs(one_v - 1.0)), 0.0)
            res.append(r)
        return scale, res

    for scale, res in parallel_map(one, corpus):
        for r in res:
            for name, (v, err) in r.items():
                note(name, max(0.0, v - err), scale)
    base = AUDIT_REL
    for name in INEQUALITIES:
        applicable = count[name] > 0
        tol_of[name] = base
        rep.records.append(InequalityRecord(name, viol[name], tol_of[name], count[name], applicable))
    return rep
