"""Curvature-dimension checks as local eigenvalue problems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .graph import WeightedGraph, diameter, local_subgraph
from .operators import LocalFormBundle, gamma2, gamma_sq, laplacian, local_forms
from .report import parallel_map

PSD_REL = 1e-9
NULL_REL = 1e-12
PROBES = 4
INF = math.inf


def _inv_n(n: float) -> float:
    if n != INF and n < 1:
        raise ValueError(f"dimension must be >= 1 or inf, got {n}")
    return 0.0 if n == INF else 1.0 / n


def psd_tol(bundle: LocalFormBundle) -> float:
    q = bundle.q_gamma2
    norm = float(np.abs(q).sum(axis=1).max()) if q.size else 0.0
    return PSD_REL * (1.0 + norm)


def cd_matrix(bundle: LocalFormBundle, K: float, n: float) -> np.ndarray:
    return bundle.q_gamma2 - _inv_n(n) * np.outer(bundle.d_vec, bundle.d_vec) - K * bundle.q_gamma


@dataclass
class VertexVerdict:
    vertex: int
    label: str
    satisfied: bool
    min_eigenvalue: float
    tol: float
    witness: np.ndarray  # full vertex function, zero off the 2-ball

    def to_dict(self) -> dict:
        return {"label": self.label, "satisfied": self.satisfied, "min_eig": self.min_eigenvalue, "psd_tol": self.tol}


@dataclass
class CdVerdict:
    K: float
    n: float
    vertices: list[VertexVerdict]

    @property
    def satisfied(self) -> bool:
        return all(v.satisfied for v in self.vertices)

    @property
    def min_eigenvalue(self) -> float:
        return min((v.min_eigenvalue for v in self.vertices), default=INF)

    def failures(self) -> list[VertexVerdict]:
        return [v for v in self.vertices if not v.satisfied]

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "n": self.n,
            "non_integer_n": self.n != INF and float(self.n) != int(self.n),
            "satisfied": self.satisfied,
            "min_eig": self.min_eigenvalue,
            "vertices": [v.to_dict() for v in self.vertices],
        }


def _scope(g: WeightedGraph, scope) -> list[int]:
    if scope is None or scope == "trusted":
        return g.trusted_indices.tolist()
    if scope == "all":
        return list(range(g.n))
    return [g.vertex(v) for v in scope]


def check_vertex(g: WeightedGraph, x: int, K: float, n: float, bundle: LocalFormBundle | None = None) -> VertexVerdict:
    b = bundle if bundle is not None else local_forms(g, x)
    tol = psd_tol(b)
    if b.dim == 0:
        return VertexVerdict(x, g.labels[x], True, INF, tol, np.zeros(g.n))
    m = cd_matrix(b, K, n)
    evals, evecs = np.linalg.eigh(m)
    lam = float(evals[0])
    return VertexVerdict(x, g.labels[x], lam >= -tol, lam, tol, b.embed(evecs[:, 0], g.n))


def check_cd(g: WeightedGraph, K: float, n: float = INF, scope=None) -> CdVerdict:
    """CD(K,n) at every vertex of ``scope`` (trusted interior by default)."""
    _inv_n(n)
    verts = _scope(g, scope)
    return CdVerdict(K, n, parallel_map(lambda x: check_vertex(g, x, K, n), verts))


@dataclass
class OptimalK:
    vertex: int
    value: float
    witness: np.ndarray
    null_dim: int
    condition: float


def optimal_k_detail(g: WeightedGraph, x: int | str, n: float = INF, bundle: LocalFormBundle | None = None) -> OptimalK:
    """sup{K : Q_Γ₂ - (1/n) d dᵀ - K Q_Γ ⪰ 0} via a Schur complement.

    The witness f is normalized so that Γf(x) = 1; then the CD expression at
    K_opt vanishes on it.
    """
    xi = g.vertex(x)
    b = bundle if bundle is not None else local_forms(g, xi)
    inv_n = _inv_n(n)
    if b.dim == 0:
        return OptimalK(xi, INF, np.zeros(g.n), 0, 1.0)
    a = b.q_gamma2 - inv_n * np.outer(b.d_vec, b.d_vec)
    lam, u = np.linalg.eigh(b.q_gamma)
    lmax = float(lam[-1])
    if lmax <= 0:
        return OptimalK(xi, INF, np.zeros(g.n), b.dim, 1.0)
    rng_mask = lam > NULL_REL * lmax
    ur, un = u[:, rng_mask], u[:, ~rng_mask]
    lr = lam[rng_mask]
    arr = ur.T @ a @ ur
    tol = psd_tol(b)
    if un.shape[1]:
        ann = un.T @ a @ un
        anr = un.T @ a @ ur
        w, v = np.linalg.eigh(ann)
        if w[0] < -tol:
            return OptimalK(xi, -INF, b.embed(un @ v[:, 0], g.n), un.shape[1], INF)
        keep = w > tol
        # pseudo-inverse on the numerically positive part of the null block
        ann_pinv = (v[:, keep] / w[keep]) @ v[:, keep].T
        schur = arr - anr.T @ ann_pinv @ anr
    else:
        ann_pinv = None
        anr = None
        schur = arr
    scale = 1.0 / np.sqrt(lr)
    red = scale[:, None] * schur * scale[None, :]
    red = 0.5 * (red + red.T)
    w, v = np.linalg.eigh(red)
    k_opt = float(w[0])
    fr = scale * v[:, 0]
    vec = ur @ fr
    if ann_pinv is not None:
        vec = vec - un @ (ann_pinv @ (anr @ fr))
    # normalize so that Γf(x) = fᵀ Q_Γ f = 1
    qn = float(vec @ b.q_gamma @ vec)
    if qn > 0:
        vec = vec / math.sqrt(qn)
    return OptimalK(xi, k_opt, b.embed(vec, g.n), un.shape[1], float(lr[-1] / lr[0]))


def optimal_k(g: WeightedGraph, x: int | str, n: float = INF) -> float:
    return optimal_k_detail(g, x, n).value


@dataclass
class CurvatureProfile:
    n: float
    vertices: list[int]
    labels: list[str]
    k_opt: np.ndarray
    witnesses: list[np.ndarray] = field(repr=False, default_factory=list)

    @property
    def k_inf(self) -> float:
        return float(self.k_opt.min()) if len(self.k_opt) else INF

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "K_inf_graph": self.k_inf,
            "vertices": [{"label": lab, "K_opt": float(k)} for lab, k in zip(self.labels, self.k_opt)],
        }


def curvature_profile(g: WeightedGraph, n: float = INF, scope=None) -> CurvatureProfile:
    verts = _scope(g, scope)
    res = parallel_map(lambda x: optimal_k_detail(g, x, n), verts)
    return CurvatureProfile(
        n=n,
        vertices=verts,
        labels=[g.labels[x] for x in verts],
        k_opt=np.array([r.value for r in res]),
        witnesses=[r.witness for r in res],
    )


@dataclass
class BonnetMyersReport:
    k_inf: float
    diameter: int
    bound: float | None
    applicable: bool
    holds: bool | None

    def to_dict(self) -> dict:
        return {"K_inf": self.k_inf, "diameter": self.diameter, "bound": self.bound, "applicable": self.applicable, "holds": self.holds}


def bonnet_myers_check(g: WeightedGraph, scope=None) -> BonnetMyersReport:
    """diam ≤ 2/K_∞ whenever CD(K_∞, ∞) holds with K_∞ > 0."""
    k = curvature_profile(g, INF, scope).k_inf
    diam = diameter(g)
    if not k > 0:
        return BonnetMyersReport(k, diam, None, False, None)
    bound = 2.0 / k
    return BonnetMyersReport(k, diam, bound, True, diam <= bound * (1 + 1e-9))


# ---------------------------------------------------------------------------
# sampling oracle


@dataclass
class OracleResult:
    K: float
    n: float
    satisfied: bool
    worst: float  # min over tested f of the CD expression divided by its tolerance scale
    counterexample: np.ndarray | None = None


class _LocalSampler:
    """Evaluates Γ₂f(x), Δf(x), Γf(x) on B(x,2) through the operators only."""

    def __init__(self, g: WeightedGraph, x: int):
        self.sub, self.verts = local_subgraph(g, x, 2)
        r = self.sub.row_sums
        self.size = self.sub.n
        self.tol_base = PSD_REL * (1.0 + float(r.max()) if len(r) else 1.0) ** 2

    def evaluate(self, F: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return gamma2(self.sub, F)[0], laplacian(self.sub, F)[0], gamma_sq(self.sub, F)[0]


def _expr(vals, K, n):
    g2, lap, gam = vals
    return g2 - _inv_n(n) * lap * lap - K * gam


def brute_force_cd_many(
    g: WeightedGraph,
    x: int | str,
    queries: Sequence[tuple[float, float]],
    trials: int = 10_000,
    seed: int = 0,
) -> list[OracleResult]:
    """Direct test of the CD quantifier at ``x`` for several (K, n) queries.

    Each query sees ``trials`` test functions.  All but a few are Gaussian
    samples on B(x,2), shared between queries.  The rest are directions
    derived from values of the operators alone: the three quadratic forms are
    read off by polarization and the lowest eigenvectors of the combined form
    (and small perturbations of them) are fed back through the operators.
    Only directly evaluated CD expressions count as counterexamples.
    """
    xi = g.vertex(x)
    s = _LocalSampler(g, xi)
    rng = np.random.default_rng(seed)
    m = s.size
    n_probe = min(2 * PROBES, max(0, trials - 1)) if m > 1 else 0
    n_rand = max(1, trials - n_probe)
    F = rng.standard_normal((m, n_rand))
    rand_vals = s.evaluate(F)
    rand_scale = np.maximum(1.0, np.max(np.abs(F), axis=0) ** 2)

    probes: list[np.ndarray] = []
    if n_probe:
        # polarization: q(e_i + e_j) - q(e_i - e_j) = 4 B_ij for each form
        eye = np.eye(m)
        iu, ju = np.triu_indices(m)
        pv = s.evaluate(eye[:, iu] + eye[:, ju])
        mv = s.evaluate(eye[:, iu] - eye[:, ju])
        forms = []
        for k, (a, b) in enumerate(zip(pv, mv)):
            if k == 1:
                a, b = a * a, b * b
            full = np.zeros((m, m))
            full[iu, ju] = (a - b) / 4.0
            full[ju, iu] = full[iu, ju]
            forms.append(full[1:, 1:])  # drop the gauge direction of the center
        g2m, lapm, gamm = forms
        for K, n in queries:
            mat = g2m - _inv_n(n) * lapm - K * gamm
            _, v = np.linalg.eigh(0.5 * (mat + mat.T))
            k = min(m - 1, n_probe // 2)
            base = np.zeros((m, k))
            base[1:] = v[:, :k]
            jitter = base + 1e-3 * rng.standard_normal(base.shape)
            probes.append(np.concatenate([base, jitter], axis=1)[:, :n_probe])
    if probes:
        P = np.concatenate(probes, axis=1)
        probe_vals = s.evaluate(P)
        probe_scale = np.maximum(1.0, np.max(np.abs(P), axis=0) ** 2)

    out = []
    for qi, (K, n) in enumerate(queries):
        vals = _expr(rand_vals, K, n) / (s.tol_base * rand_scale)
        cols = F
        if probes:
            sl = slice(qi * n_probe, (qi + 1) * n_probe)
            pv_q = tuple(v[sl] for v in probe_vals)
            vals = np.concatenate([vals, _expr(pv_q, K, n) / (s.tol_base * probe_scale[sl])])
            cols = np.concatenate([F, P[:, sl]], axis=1)
        worst_i = int(np.argmin(vals))
        worst = float(vals[worst_i])
        ce = None
        if worst < -1.0:
            ce = np.zeros(g.n)
            ce[s.verts] = cols[:, worst_i]
        out.append(OracleResult(K, n, worst >= -1.0, worst, ce))
    return out


def brute_force_cd(g: WeightedGraph, x: int | str, K: float, n: float = INF, trials: int = 10_000, seed: int = 0) -> OracleResult:
    return brute_force_cd_many(g, x, [(K, n)], trials, seed)[0]


@dataclass
class Disagreement:
    vertex: str
    K: float
    n: float
    check_cd: bool
    oracle: bool
    min_eig: float
    oracle_worst: float


def cross_check(
    g: WeightedGraph,
    queries: Iterable[tuple[float, float]],
    trials: int = 10_000,
    seed: int = 0,
    scope=None,
) -> list[Disagreement]:
    """check_cd against the sampling oracle on every vertex in scope."""
    queries = list(queries)
    verts = _scope(g, scope)

    def one(x):
        b = local_forms(g, x)
        res = brute_force_cd_many(g, x, queries, trials, seed + x)
        bad = []
        for (K, n), r in zip(queries, res):
            v = check_vertex(g, x, K, n, b)
            if v.satisfied != r.satisfied:
                bad.append(Disagreement(g.labels[x], K, n, v.satisfied, r.satisfied, v.min_eigenvalue, r.worst))
        return bad

    return [d for batch in parallel_map(one, verts) for d in batch]
