"""Laplacian, carré du champ, Γ₂ and the local quadratic forms.

Vertex functions are plain float arrays of shape ``(n,)``; a batch of ``k``
functions is an array of shape ``(n, k)`` and every operator maps columns
independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import UNNORMALIZED, WeightedGraph, bfs_distances


def _as_values(g: WeightedGraph, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape[0] != g.n:
        raise ValueError(f"function has {f.shape[0]} values, graph has {g.n} vertices")
    return f


def _col(v: np.ndarray, f: np.ndarray) -> np.ndarray:
    return v[:, None] if f.ndim == 2 else v


def laplacian(g: WeightedGraph, f) -> np.ndarray:
    f = _as_values(g, f)
    # summing p(x,y)(f(y) - f(x)) keeps Δ of a constant exactly zero
    return -2.0 * (g.half_gather @ (g.difference @ f))


def gamma(g: WeightedGraph, f, h) -> np.ndarray:
    f = _as_values(g, f)
    h = _as_values(g, h)
    return g.half_gather @ ((g.difference @ f) * (g.difference @ h))


def gamma_sq(g: WeightedGraph, f) -> np.ndarray:
    f = _as_values(g, f)
    df = g.difference @ f
    return g.half_gather @ (df * df)


def gamma2(g: WeightedGraph, f) -> np.ndarray:
    f = _as_values(g, f)
    return 0.5 * laplacian(g, gamma_sq(g, f)) - gamma(g, f, laplacian(g, f))


def hessian_norm_sq(g: WeightedGraph, f) -> np.ndarray:
    """|D²f|²(x) = Σ_y p(x,y) Σ_z p(y,z) (f(x) - 2f(y) + f(z))²."""
    f = _as_values(g, f)
    x, y, z, w = g.two_paths
    second = f[x] - 2.0 * f[y] + f[z]
    out = np.zeros(f.shape)
    np.add.at(out, x, _col(w, f) * second * second)
    return out


def bochner_rhs(g: WeightedGraph, f) -> np.ndarray:
    """Right-hand side of the Bochner identity for an arbitrary kernel.

    With row sums s(x) = Σ_y p(x,y) this is
    ¼|D²f|² - ¼Σ_y p(x,y) s(y) (f(y)-f(x))² - ½ s(x) Γf + ½(Δf)²,
    which is ¼|D²f|² - Γf + ½(Δf)² when every row sums to one.
    """
    f = _as_values(g, f)
    s = g.row_sums
    df = g.difference @ f
    weighted = g.half_gather @ (_col(s[g.indices], f) * df * df)
    lap = laplacian(g, f)
    return 0.25 * hessian_norm_sq(g, f) - 0.5 * weighted - 0.5 * _col(s, f) * gamma_sq(g, f) + 0.5 * lap * lap


def bochner_residual(g: WeightedGraph, f) -> np.ndarray:
    return gamma2(g, f) - bochner_rhs(g, f)


def scale_of(f) -> float:
    f = np.asarray(f, dtype=float)
    return max(1.0, float(np.max(np.abs(f))) ** 2) if f.size else 1.0


@dataclass(frozen=True)
class LocalFormBundle:
    """Γ, Γ₂ and Δ at ``center`` as forms on B(x,2) minus x, gauge f(x) = 0."""

    center: int
    support: np.ndarray
    q_gamma: np.ndarray
    q_gamma2: np.ndarray
    d_vec: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.support)

    def embed(self, v: np.ndarray, n: int) -> np.ndarray:
        """Lift a support vector to a vertex function vanishing at the center."""
        f = np.zeros(n)
        f[self.support] = v
        return f


def local_forms(g: WeightedGraph, x: int | str) -> LocalFormBundle:
    xi = g.vertex(x)
    dist = bfs_distances(g, xi)
    support = np.nonzero((dist >= 1) & (dist <= 2))[0]
    support = support[np.lexsort((support, dist[support]))]
    m = len(support)
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[support] = np.arange(m)

    s = g.row_sums
    nbrs = g.neighbors(xi)
    pw = g.neighbor_weights(xi)
    keep = nbrs != xi
    nbrs, pw = nbrs[keep], pw[keep]
    ny = pos[nbrs]

    q_gamma = np.zeros((m, m))
    q_gamma[ny, ny] = 0.5 * pw
    d_vec = np.zeros(m)
    d_vec[ny] = pw

    q2 = np.zeros((m, m))
    # ¼ Σ_y Σ_z p(x,y) p(y,z) v vᵀ with v = e_z - 2 e_y, e_x = 0
    for y, py in zip(g.neighbors(xi), g.neighbor_weights(xi)):
        v_base = np.zeros(m)
        if y != xi:
            v_base[pos[y]] -= 2.0
        for z, pz in zip(g.neighbors(y), g.neighbor_weights(y)):
            v = v_base.copy()
            if z != xi:
                v[pos[z]] += 1.0
            q2 += 0.25 * py * pz * np.outer(v, v)
    q2[ny, ny] -= 0.25 * pw * s[nbrs]
    q2 -= 0.5 * s[xi] * q_gamma
    q2 += 0.5 * np.outer(d_vec, d_vec)
    q2 = 0.5 * (q2 + q2.T)
    return LocalFormBundle(center=xi, support=support, q_gamma=q_gamma, q_gamma2=q2, d_vec=d_vec)


@dataclass(frozen=True)
class CayleyPartials:
    first: np.ndarray  # (n, k): ∂_i f
    second: np.ndarray  # (n, k, k): ∂_i ∂_j f
    commutator: np.ndarray  # (n, k, k): ∂_i∂_j f - ∂_j∂_i f
    hessian_part: np.ndarray
    ricci_part: np.ndarray


def cayley_partials(g: WeightedGraph, f) -> CayleyPartials:
    """Partial differences along the generators of a Cayley graph.

    Rows whose translates left a truncation are NaN.
    """
    if g.cayley is None:
        raise ValueError("graph carries no generator metadata")
    if g.mode != UNNORMALIZED:
        raise ValueError("partial differences use the unnormalized convention")
    f = np.asarray(_as_values(g, f), dtype=float)
    table = g.cayley.table
    n, k = table.shape
    ok = np.all(table >= 0, axis=1)
    safe = np.where(table >= 0, table, 0)
    ok &= np.all(safe[safe] >= 0, axis=(1, 2))
    fx = f[:, None]
    f_s = f[safe]  # f(x s_i)
    first = f_s - fx
    two = safe[safe]  # two[x, i, j] = index of x s_i s_j
    f_ss = f[np.where(two >= 0, two, 0)]
    second = f_ss - f_s[:, :, None] - f_s[:, None, :] + fx[:, :, None]
    # computed directly so that commuting generators give exact zeros
    commutator = f_ss - np.swapaxes(f_ss, 1, 2)
    hess = 0.25 * np.sum(second * second, axis=(1, 2))
    ricci = 0.5 * np.sum(first[:, None, :] * commutator, axis=(1, 2))
    bad = ~ok
    if bad.any():
        first[bad] = np.nan
        second[bad] = np.nan
        commutator[bad] = np.nan
        hess[bad] = np.nan
        ricci[bad] = np.nan
    return CayleyPartials(first, second, commutator, hess, ricci)
