"""The modified heat equation du/dt = Δu + Γu and the inequalities it satisfies."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .graph import WeightedGraph, bfs_distances
from .operators import gamma_sq, laplacian
from .semigroup import SemigroupStepper, duhamel_solve

PICARD_TOL = 1e-10
PICARD_MAX_ITER = 60
VERIFY_REL = 1e-7
DIVERGENCE_RATIO = 0.9
DIVERGENCE_RUN = 3
BLOWUP = 1e6
LOCAL_TIME_FACTOR = 1.0 / 256.0

# lower and upper comparison regimes: Ω e^Ω = 1 and e²
OMEGA = brentq(lambda x: x * math.exp(x) - 1.0, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
GAMMA_UPPER = math.exp(2.0)


class PicardDivergence(RuntimeError):
    pass


class AdmissibilityError(ValueError):
    pass


@dataclass
class SolveConfig:
    u0: np.ndarray
    horizon: float
    grid_step: float
    method: str = "picard"
    picard_tol: float = PICARD_TOL
    picard_max_iter: int = PICARD_MAX_ITER
    global_extension: bool | None = None  # None: extend exactly when needed and admissible
    semigroup_tol: float = 1e-12
    rk4_step: float | None = None

    def steps(self) -> int:
        if not (self.horizon > 0 and self.grid_step > 0):
            raise ValueError("horizon and grid step must be positive")
        k = round(self.horizon / self.grid_step)
        if k < 1 or abs(k * self.grid_step - self.horizon) > 1e-9 * self.horizon:
            raise ValueError("grid_step must divide the horizon")
        return k


@dataclass
class PicardIteration:
    k: int
    m_k: float  # sup_t ‖√Γu^k(t)‖
    n_k: float  # sup_t ‖Γu^k(t) - Γu^{k-1}(t)‖
    ratio: float | None


@dataclass
class PicardWindow:
    t_start: float
    steps: int
    t_local: float
    gamma_start: float
    iterations: list[PicardIteration] = field(default_factory=list)
    converged: bool = False

    @property
    def m_bound(self) -> float:
        return 2.0 * math.sqrt(self.gamma_start)

    def to_dict(self) -> dict:
        return {
            "t_start": self.t_start,
            "steps": self.steps,
            "T_local": self.t_local,
            "gamma_start": self.gamma_start,
            "converged": self.converged,
            "M_bound": self.m_bound,
            "M_k": [it.m_k for it in self.iterations],
            "N_k": [it.n_k for it in self.iterations],
            "ratios": [it.ratio for it in self.iterations],
        }


@dataclass
class SolveTrace:
    graph: WeightedGraph
    times: np.ndarray
    u: np.ndarray  # (nodes, |V|)
    gamma: np.ndarray
    lap: np.ndarray
    method: str
    windows: list[PicardWindow] = field(default_factory=list)
    oracle_deviation: float | None = None
    rk4_step: float | None = None

    @property
    def u0(self) -> np.ndarray:
        return self.u[0]

    @property
    def grid_step(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    @property
    def scale(self) -> float:
        s = float(np.max(np.abs(self.u0)))
        return max(1.0, s, s * s)

    @property
    def tolerance(self) -> float:
        return VERIFY_REL * self.scale

    def iterations(self) -> list[PicardIteration]:
        return [it for w in self.windows for it in w.iterations]

    def max_ratio(self) -> float:
        rs = [it.ratio for it in self.iterations() if it.ratio is not None]
        return max(rs) if rs else 0.0

    def m_bound_ok(self) -> bool:
        g0 = float(np.max(self.gamma[0]))
        bound = 2.0 * math.sqrt(g0)
        return all(it.m_k <= min(w.m_bound, bound) * (1 + 1e-12) + 1e-15 for w in self.windows for it in w.iterations)

    def node(self, t: float) -> int:
        h = self.grid_step
        i = round(t / h) if h > 0 else 0
        if not 0 <= i < len(self.times) or abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"time {t} is not a grid node")
        return i

    def diagnostics(self) -> dict:
        out = {
            "method": self.method,
            "nodes": len(self.times),
            "grid_step": self.grid_step,
            "horizon": float(self.times[-1]),
            "gamma_u0_sup": float(np.max(self.gamma[0])),
            "M_bound_ok": self.m_bound_ok(),
            "max_contraction_ratio": self.max_ratio(),
            "windows": [w.to_dict() for w in self.windows],
        }
        if self.oracle_deviation is not None:
            out["oracle_deviation"] = self.oracle_deviation
            out["rk4_step"] = self.rk4_step
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "vertex", "u", "gamma_u", "laplacian_u"])
        for i, t in enumerate(self.times):
            for v, lab in enumerate(self.graph.labels):
                w.writerow(["%.17g" % t, lab, "%.17g" % self.u[i, v], "%.17g" % self.gamma[i, v], "%.17g" % self.lap[i, v]])
        return buf.getvalue()


def _gamma_path(g: WeightedGraph, U: np.ndarray) -> np.ndarray:
    return gamma_sq(g, U.T).T


def _lap_path(g: WeightedGraph, U: np.ndarray) -> np.ndarray:
    return laplacian(g, U.T).T


def local_time(gamma_sup: float) -> float:
    return math.inf if gamma_sup == 0 else LOCAL_TIME_FACTOR / gamma_sup


def is_admissible(g: WeightedGraph, u0) -> bool:
    """‖Γu₀‖∞ < α/2, the smallness condition for global solutions."""
    return float(np.max(gamma_sq(g, np.asarray(u0, dtype=float)))) < g.alpha / 2.0


def _constant_trace(g, u0, N, h, method):
    times = np.arange(N + 1) * h
    U = np.tile(u0, (N + 1, 1))
    z = np.zeros_like(U)
    w = PicardWindow(0.0, N, math.inf, 0.0, [PicardIteration(0, 0.0, 0.0, None)], True)
    return SolveTrace(g, times, U, z, z.copy(), method, [w])


def _picard_window(g: WeightedGraph, u_start: np.ndarray, steps: int, h: float, cfg: SolveConfig, w: PicardWindow) -> np.ndarray:
    prev = np.zeros((steps + 1, g.n))
    noise = 1e-13 * max(1.0, w.gamma_start)
    last_n = None
    run = 0
    for k in range(cfg.picard_max_iter):
        U = duhamel_solve(g, u_start, prev, steps * h, steps, cfg.semigroup_tol)
        G = _gamma_path(g, U)
        n_k = float(np.max(np.abs(G - prev)))
        ratio = n_k / last_n if last_n is not None and last_n > noise else None
        w.iterations.append(PicardIteration(k, math.sqrt(float(np.max(G))), n_k, ratio))
        if ratio is not None and ratio > DIVERGENCE_RATIO:
            run += 1
            if run >= DIVERGENCE_RUN:
                raise PicardDivergence(f"contraction ratio above {DIVERGENCE_RATIO} for {DIVERGENCE_RUN} iterations")
        else:
            run = 0
        prev, last_n = G, n_k
        if k >= 1 and n_k <= cfg.picard_tol:
            w.converged = True
            return U
    return U


def solve_picard(g: WeightedGraph, cfg: SolveConfig) -> SolveTrace:
    """Picard iteration u^k = P_t u₀ + ∫₀^t P_{t-s} Γu^{k-1}(s) ds from u^{-1} = 0.

    Beyond the local time 1/(256‖Γu₀‖∞) the solve restarts every half local
    time, which requires ‖Γu₀‖∞ < α/2.
    """
    u0 = np.asarray(cfg.u0, dtype=float)
    N = cfg.steps()
    h = cfg.horizon / N
    g0 = float(np.max(gamma_sq(g, u0)))
    if g0 == 0.0:
        return _constant_trace(g, u0, N, h, "picard")
    t_loc = local_time(g0)
    needs_ext = cfg.horizon > t_loc * (1 + 1e-12)
    if needs_ext:
        if cfg.global_extension is False:
            raise AdmissibilityError(f"horizon {cfg.horizon} exceeds the local time {t_loc}")
        if not g0 < g.alpha / 2:
            raise AdmissibilityError("global extension needs ‖Γu₀‖∞ < α/2")
    elif cfg.global_extension and not g0 < g.alpha / 2:
        raise AdmissibilityError("global extension needs ‖Γu₀‖∞ < α/2")

    U_all = np.empty((N + 1, g.n))
    U_all[0] = u0
    windows: list[PicardWindow] = []
    pos = 0
    u_start = u0
    while pos < N:
        gs = float(np.max(gamma_sq(g, u_start)))
        tl = local_time(gs)
        remaining = N - pos
        if not needs_ext:
            w_steps = remaining
        else:
            w_steps = min(int(math.floor(tl / (2 * h) + 1e-9)), remaining)
            if w_steps < 2:
                raise AdmissibilityError("grid step too coarse for half the local time")
            if remaining - w_steps == 1:
                w_steps = w_steps + 1 if (w_steps + 1) * h <= tl else w_steps - 1
        if w_steps < 2:
            raise ValueError("each Picard window needs at least 2 grid steps")
        win = PicardWindow(pos * h, w_steps, tl, gs)
        U = _picard_window(g, u_start, w_steps, h, cfg, win) if gs > 0 else np.tile(u_start, (w_steps + 1, 1))
        if gs == 0:
            win.iterations.append(PicardIteration(0, 0.0, 0.0, None))
            win.converged = True
        windows.append(win)
        U_all[pos + 1 : pos + w_steps + 1] = U[1:]
        pos += w_steps
        u_start = U[-1]
    times = np.arange(N + 1) * h
    return SolveTrace(g, times, U_all, _gamma_path(g, U_all), _lap_path(g, U_all), "picard", windows)


def solve_rk4(g: WeightedGraph, u0, horizon: float, grid_step: float, step: float | None = None) -> SolveTrace:
    """Classical RK4 on du/dt = Δu + Γu, reported on the grid of ``grid_step``."""
    u = np.asarray(u0, dtype=float).copy()
    N = SolveConfig(u, horizon, grid_step).steps()
    h_grid = horizon / N
    cap = min(0.01, horizon / 100.0)
    step = min(step or cap, cap)
    sub = max(1, math.ceil(h_grid / step - 1e-12))
    dt = h_grid / sub

    def rhs(v):
        return laplacian(g, v) + gamma_sq(g, v)

    U = np.empty((N + 1, g.n))
    U[0] = u
    for i in range(N):
        for _ in range(sub):
            k1 = rhs(u)
            k2 = rhs(u + 0.5 * dt * k1)
            k3 = rhs(u + 0.5 * dt * k2)
            k4 = rhs(u + dt * k3)
            u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > BLOWUP:
            raise FloatingPointError("RK4 solution blew up")
        U[i + 1] = u
    times = np.arange(N + 1) * h_grid
    return SolveTrace(g, times, U, _gamma_path(g, U), _lap_path(g, U), "rk4", rk4_step=dt)


def solve(g: WeightedGraph, cfg: SolveConfig) -> SolveTrace:
    if cfg.method == "picard":
        return solve_picard(g, cfg)
    if cfg.method == "rk4":
        return solve_rk4(g, cfg.u0, cfg.horizon, cfg.grid_step, cfg.rk4_step)
    if cfg.method == "both":
        tr = solve_picard(g, cfg)
        rk = solve_rk4(g, cfg.u0, cfg.horizon, cfg.grid_step, cfg.rk4_step)
        tr.method = "both"
        tr.oracle_deviation = float(np.max(np.abs(tr.u - rk.u)))
        tr.rk4_step = rk.rk4_step
        return tr
    raise ValueError(f"unknown method {cfg.method!r}")


# ---------------------------------------------------------------------------
# inequalities


@dataclass
class InequalityReport:
    name: str
    parameters: dict
    max_violation: float
    tolerance: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "parameters": self.parameters,
            "samples": self.samples,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def _report(name, params, excess: np.ndarray, trace: SolveTrace, scale: float | None = None) -> InequalityReport:
    s = trace.scale if scale is None else scale
    v = float(np.max(excess)) if excess.size else 0.0
    return InequalityReport(name, params, max(0.0, v) / s, VERIFY_REL, int(excess.size))


def verify_gradient_decay(trace: SolveTrace, K: float) -> InequalityReport:
    """‖Γu(t)‖∞ ≤ e^{-2Kt}‖Γu₀‖∞ at every grid node."""
    sup = trace.gamma.max(axis=1)
    env = np.exp(-2.0 * K * trace.times) * sup[0]
    return _report("gradient_decay", {"K": K}, sup - env, trace)


def verify_edge_oscillation(trace: SolveTrace) -> InequalityReport:
    """|u(t)(y) - u(t)(x)| ≤ 1 across every edge and grid node."""
    g = trace.graph
    osc = np.abs(trace.u[:, g.edge_rows] - trace.u[:, g.indices])
    return _report("edge_oscillation", {"alpha": g.alpha, "max_oscillation": float(osc.max()) if osc.size else 0.0}, osc - 1.0, trace)


def verify_li_yau(trace: SolveTrace, n: float) -> InequalityReport:
    """-Δu(t) ≤ n/(2t) at grid nodes with t > 0."""
    mask = trace.times > 0
    t = trace.times[mask][:, None]
    excess = -trace.lap[mask] - n / (2.0 * t)
    return _report("li_yau", {"n": n}, excess, trace)


def _harnack_rhs(n, alpha, d, t1, t2):
    return 0.5 * n * math.log(t2 / t1) + 2.0 * d**2 / (alpha * (t2 - t1))


def verify_harnack(
    trace: SolveTrace,
    n: float,
    pairs: Iterable[tuple[object, object, float, float]] | None = None,
    T1: float | None = None,
    T2: float | None = None,
    alpha: float | None = None,
) -> InequalityReport:
    """u_{T1}(x) - u_{T2}(y) ≤ (n/2) log(T2/T1) + 2 d(x,y)²/(α(T2-T1)).

    Either explicit ``pairs`` (x, y, T1, T2) or all ordered vertex pairs at
    the grid nodes ``T1`` < ``T2``.
    """
    g = trace.graph
    a = g.alpha if alpha is None else alpha
    if pairs is None:
        if T1 is None or T2 is None:
            raise ValueError("give pairs or both T1 and T2")
        if not 0 < T1 < T2:
            raise ValueError("need 0 < T1 < T2")
        i1, i2 = trace.node(T1), trace.node(T2)
        dist = np.array([bfs_distances(g, v) for v in range(g.n)], dtype=float)
        lhs = trace.u[i1][:, None] - trace.u[i2][None, :]
        rhs = 0.5 * n * math.log(T2 / T1) + 2.0 * dist**2 / (a * (T2 - T1))
        return _report("harnack", {"n": n, "alpha": a, "T1": T1, "T2": T2, "pairs": "all"}, lhs - rhs, trace)
    excess = []
    count = 0
    for x, y, t1, t2 in pairs:
        if not 0 < t1 < t2:
            raise ValueError("need 0 < T1 < T2")
        xi, yi = g.vertex(x), g.vertex(y)
        d = float(bfs_distances(g, xi)[yi])
        lhs = trace.u[trace.node(t1), xi] - trace.u[trace.node(t2), yi]
        excess.append(lhs - _harnack_rhs(n, a, d, t1, t2))
        count += 1
    return _report("harnack", {"n": n, "alpha": a, "pairs": count}, np.array(excess), trace)


def comparison_regime(gamma: float) -> str:
    if gamma < 0:
        raise ValueError("comparison exponents must be nonnegative")
    if gamma <= OMEGA:
        return "lower"
    if gamma >= GAMMA_UPPER:
        return "upper"
    raise ValueError(f"no comparison is established for {OMEGA} < gamma < {GAMMA_UPPER}")


def verify_comparison(trace: SolveTrace, gammas: Sequence[float], tol: float = 1e-12) -> list[InequalityReport]:
    """P_t e^{γu₀} ≤ e^{γu(t)} for γ ≤ Ω and ≥ for γ ≥ e², at grid nodes.

    Violations are measured relative to trace.scale · max(1, ‖e^{γu₀}‖∞).
    """
    g = trace.graph
    regimes = [(float(gm), comparison_regime(float(gm))) for gm in gammas]
    out = []
    if not regimes:
        return out
    step = SemigroupStepper(g, trace.grid_step, tol) if len(trace.times) > 1 else None
    E0 = np.stack([np.exp(gm * trace.u0) for gm, _ in regimes], axis=1)
    cur = E0.copy()
    excess = [[] for _ in regimes]
    for i in range(len(trace.times)):
        if i:
            cur = step(cur)
        for j, (gm, reg) in enumerate(regimes):
            rhs = np.exp(gm * trace.u[i])
            excess[j].append(cur[:, j] - rhs if reg == "lower" else rhs - cur[:, j])
    for j, (gm, reg) in enumerate(regimes):
        scale = trace.scale * max(1.0, float(np.max(E0[:, j])))
        name = "comparison_lower" if reg == "lower" else "comparison_upper"
        out.append(_report(name, {"gamma": gm, "omega": OMEGA, "gamma_upper": GAMMA_UPPER}, np.array(excess[j]), trace, scale))
    return out
