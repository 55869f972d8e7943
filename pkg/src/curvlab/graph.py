"""Weighted graphs with bounded geometry.

A graph is a finite vertex set with a kernel ``p`` in compressed sparse row
layout and a positive measure ``mu``.  Infinite graphs are only ever seen
through :func:`truncate`, which materialises a finite ball around a center.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Protocol, Sequence

import numpy as np
import scipy.sparse as sp

TOL_MARKOV = 1e-12
TOL_REV = 1e-12

MARKOV = "markov"
UNNORMALIZED = "unnormalized"
MODES = (MARKOV, UNNORMALIZED)

REFLECTING = "reflecting"
ABSORBING_FLAGGED = "absorbing_flagged"


class GraphValidationError(ValueError):
    """Raised when a graph violates one of the bounded-geometry axioms.

    ``kind`` is a short machine tag and ``record`` names the first offending
    vertex or edge (as labels).
    """

    def __init__(self, kind: str, message: str, record: tuple = ()):
        super().__init__(message)
        self.kind = kind
        self.record = record


@dataclass(frozen=True)
class CayleyData:
    """Right-multiplication table of a Cayley graph.

    ``table[v, i]`` is the index of ``v * s_i`` or -1 when that translate was
    cut off by a truncation.
    """

    generator_names: tuple[str, ...]
    table: np.ndarray
    inverse: np.ndarray
    abelian: bool


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    labels: tuple[str, ...]
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    mu: np.ndarray
    mode: str = MARKOV
    alpha: float = 0.0
    stochastic: bool = True
    trusted: np.ndarray | None = None
    cayley: CayleyData | None = None

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    @cached_property
    def index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def vertex(self, x: int | str) -> int:
        """Resolve a vertex index or label to an index."""
        if isinstance(x, (int, np.integer)):
            if not 0 <= x < self.n:
                raise KeyError(f"vertex index {x} out of range")
            return int(x)
        try:
            return self.index[x]
        except KeyError:
            raise KeyError(f"unknown vertex label {x!r}") from None

    @cached_property
    def kernel(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.weights, self.indices, self.indptr), shape=(self.n, self.n))

    @cached_property
    def row_sums(self) -> np.ndarray:
        # same summation path as kernel @ f, so that laplacian(1) == 0 bitwise
        return self.kernel @ np.ones(self.n)

    @cached_property
    def edge_rows(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), np.diff(self.indptr))

    @cached_property
    def difference(self) -> sp.csr_matrix:
        """Sparse map f -> (f(x) - f(y)) over all kernel entries (x, y)."""
        m = len(self.indices)
        rows = np.concatenate([np.arange(m), np.arange(m)])
        cols = np.concatenate([self.edge_rows, self.indices])
        vals = np.concatenate([np.ones(m), -np.ones(m)])
        return sp.csr_matrix((vals, (rows, cols)), shape=(m, self.n))

    @cached_property
    def half_gather(self) -> sp.csr_matrix:
        """Sparse map from per-entry values to x -> 1/2 sum_y p(x,y) value(x,y)."""
        m = len(self.indices)
        return sp.csr_matrix((0.5 * self.weights, (self.edge_rows, np.arange(m))), shape=(self.n, m))

    @cached_property
    def two_paths(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """All walks x -> y -> z of length two as (x, y, z, p(x,y) p(y,z))."""
        first = np.arange(len(self.indices))
        mid = self.indices
        counts = np.diff(self.indptr)[mid]
        e1 = np.repeat(first, counts)
        starts = np.repeat(self.indptr[mid], counts)
        offs = np.arange(len(e1)) - np.repeat(np.cumsum(counts) - counts, counts)
        e2 = starts + offs
        return self.edge_rows[e1], mid[e1], self.indices[e2], self.weights[e1] * self.weights[e2]

    def neighbors(self, x: int | str) -> np.ndarray:
        i = self.vertex(x)
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def neighbor_weights(self, x: int | str) -> np.ndarray:
        i = self.vertex(x)
        return self.weights[self.indptr[i] : self.indptr[i + 1]]

    def p(self, x: int | str, y: int | str) -> float:
        i, j = self.vertex(x), self.vertex(y)
        nb = self.neighbors(i)
        hit = np.nonzero(nb == j)[0]
        return float(self.neighbor_weights(i)[hit[0]]) if len(hit) else 0.0

    def valence(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def trusted_indices(self) -> np.ndarray:
        if self.trusted is None:
            return np.arange(self.n)
        return np.nonzero(self.trusted)[0]

    def scaled(self, c: float) -> "WeightedGraph":
        """Copy with every kernel weight multiplied by ``c`` (unnormalized mode)."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        return WeightedGraph(
            labels=self.labels,
            indptr=self.indptr,
            indices=self.indices,
            weights=self.weights * c,
            mu=self.mu,
            mode=UNNORMALIZED,
            alpha=float(self.weights.min() * c),
            stochastic=self.stochastic,
            trusted=self.trusted,
            cayley=self.cayley,
        )


@dataclass
class GraphValidationReport:
    alpha_observed: float
    markov_residual_max: float
    reversibility_residual_max: float
    connected: bool
    max_valence: int
    valence_bound_ok: bool
    measure_ratio_ok: bool
    d_mu_sup: float
    mode: str = MARKOV
    n_vertices: int = 0
    n_edges: int = 0
    errors: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "n_vertices": self.n_vertices,
            "n_edges": self.n_edges,
            "mode": self.mode,
            "alpha_observed": self.alpha_observed,
            "markov_residual_max": self.markov_residual_max,
            "reversibility_residual_max": self.reversibility_residual_max,
            "connected": self.connected,
            "max_valence": self.max_valence,
            "valence_bound_ok": self.valence_bound_ok,
            "measure_ratio_ok": self.measure_ratio_ok,
            "d_mu_sup": self.d_mu_sup,
            "valid": self.ok,
            "errors": self.errors,
        }


# ---------------------------------------------------------------------------
# construction


def _bfs_order(n: int, adj: Sequence[Sequence[int]], labels: Sequence[str], root: int) -> list[int] | None:
    """Vertices sorted by (distance from root, label); None if disconnected."""
    dist = [-1] * n
    dist[root] = 0
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    if min(dist) < 0:
        return None
    return sorted(range(n), key=lambda v: (dist[v], labels[v]))


def _assemble(
    labels: Sequence[str],
    mu: Sequence[float],
    entries: dict[tuple[int, int], float],
    mode: str,
    *,
    check_rows: bool = True,
    stochastic: bool = True,
    root: int = 0,
) -> tuple[WeightedGraph, np.ndarray]:
    """Validate raw kernel entries and build a canonically ordered graph.

    Returns the graph and the permutation ``order`` with
    ``graph.labels[k] == labels[order[k]]``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown laplacian mode {mode!r}")
    n = len(labels)
    if n == 0:
        raise GraphValidationError("empty", "graph has no vertices")
    if len(set(labels)) != n:
        raise GraphValidationError("duplicate_vertex", "duplicate vertex labels")
    mu = np.asarray(mu, dtype=float)
    bad = np.nonzero(~(mu > 0) | ~np.isfinite(mu))[0]
    if len(bad):
        raise GraphValidationError("measure", f"measure must be positive at {labels[bad[0]]}", (labels[bad[0]],))
    adj: list[list[int]] = [[] for _ in range(n)]
    for (x, y), w in entries.items():
        if not (w > 0 and math.isfinite(w)):
            raise GraphValidationError("weight", f"kernel weight p({labels[x]},{labels[y]}) must be positive", (labels[x], labels[y]))
        adj[x].append(y)
    for x in range(n):
        if not adj[x]:
            raise GraphValidationError("isolated", f"vertex {labels[x]} has an empty neighbor list", (labels[x],))

    report = _check(labels, mu, entries, mode, check_rows=check_rows)
    if report.errors:
        e = report.errors[0]
        raise GraphValidationError(e["kind"], e["message"], tuple(e["record"]))
    order = _bfs_order(n, adj, labels, root)
    if order is None:
        raise GraphValidationError("disconnected", "graph is not connected")
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    rows: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (x, y), w in entries.items():
        rows[pos[x]].append((int(pos[y]), w))
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices, weights = [], []
    for k in range(n):
        rows[k].sort()
        indptr[k + 1] = indptr[k] + len(rows[k])
        indices.extend(j for j, _ in rows[k])
        weights.extend(w for _, w in rows[k])
    g = WeightedGraph(
        labels=tuple(labels[v] for v in order),
        indptr=indptr,
        indices=np.asarray(indices, dtype=np.int64),
        weights=np.asarray(weights, dtype=float),
        mu=mu[order],
        mode=mode,
        alpha=report.alpha_observed,
        stochastic=stochastic,
    )
    return g, np.asarray(order)


def _check(labels, mu, entries, mode, *, check_rows=True) -> GraphValidationReport:
    n = len(labels)
    errors: list[dict] = []
    rev_max = 0.0
    for (x, y), w in sorted(entries.items()):
        if x == y:
            continue
        back = entries.get((y, x))
        if back is None:
            errors.append(
                dict(kind="symmetry", message=f"p({labels[x]},{labels[y]}) > 0 but p({labels[y]},{labels[x]}) = 0", record=[labels[x], labels[y]])
            )
            continue
        a, b = w * mu[x], back * mu[y]
        res = abs(a - b) / max(a, b)
        rev_max = max(rev_max, res)
        if res > TOL_REV and x < y:
            errors.append(
                dict(
                    kind="reversibility",
                    message=f"edge ({labels[x]},{labels[y]}) violates reversibility: p*mu = {a!r} vs {b!r}",
                    record=[labels[x], labels[y]],
                )
            )
    sums = np.zeros(n)
    valence = np.zeros(n, dtype=np.int64)
    for (x, y), w in entries.items():
        sums[x] += w
        valence[x] += 1
    markov_res = float(np.max(np.abs(sums - 1.0))) if n else 0.0
    if mode == MARKOV and check_rows:
        bad = np.nonzero(np.abs(sums - 1.0) > TOL_MARKOV)[0]
        if len(bad):
            x = int(bad[0])
            errors.append(dict(kind="markov", message=f"row {labels[x]} sums to {sums[x]!r}, not 1", record=[labels[x]]))
    alpha = min(entries.values()) if entries else 0.0
    ratio_ok = True
    for (x, y), _ in entries.items():
        if alpha * mu[x] > mu[y] * (1 + TOL_REV) or mu[y] > mu[x] / alpha * (1 + TOL_REV):
            ratio_ok = False
            break
    return GraphValidationReport(
        alpha_observed=float(alpha),
        markov_residual_max=markov_res,
        reversibility_residual_max=float(rev_max),
        connected=True,
        max_valence=int(valence.max()) if n else 0,
        valence_bound_ok=bool(np.all(valence <= (1.0 / alpha) * (1 + 1e-12))) if alpha > 0 else False,
        measure_ratio_ok=ratio_ok,
        # D_mu(x) = m(x)/mu(x) = sum_y p(x,y) mu(x) / mu(x)
        d_mu_sup=float(sums.max()) if n else 0.0,
        mode=mode,
        n_vertices=n,
        n_edges=sum(1 for (x, y) in entries if x <= y),
        errors=errors,
    )


def validate(g: WeightedGraph) -> GraphValidationReport:
    """Recompute every bounded-geometry diagnostic from the graph alone."""
    entries = {(int(x), int(y)): float(w) for x, y, w in zip(g.edge_rows, g.indices, g.weights)}
    report = _check(g.labels, g.mu, entries, g.mode, check_rows=g.stochastic)
    adj = [g.neighbors(i).tolist() for i in range(g.n)]
    report.connected = _bfs_order(g.n, adj, g.labels, 0) is not None
    if not report.connected:
        report.errors.append(dict(kind="disconnected", message="graph is not connected", record=[]))
    return report


def build_from_kernel(
    vertices: Iterable[tuple[str, float]],
    edges: Iterable[tuple[str, str, float, float]],
    mode: str = MARKOV,
    alpha: float | None = None,
) -> WeightedGraph:
    """Build a graph from vertex measures and kernel entries ``(x, y, p_xy, p_yx)``.

    A self-loop is given as ``(x, x, p, p)``.  ``alpha``, when supplied, is an
    assertion checked against the observed minimum kernel weight.
    """
    vertices = list(vertices)
    labels = [str(lab) for lab, _ in vertices]
    idx = {lab: i for i, lab in enumerate(labels)}
    entries: dict[tuple[int, int], float] = {}
    for x, y, pxy, pyx in edges:
        try:
            i, j = idx[str(x)], idx[str(y)]
        except KeyError as e:
            raise GraphValidationError("unknown_vertex", f"edge refers to undeclared vertex {e.args[0]}", (str(x), str(y))) from None
        for key, w in (((i, j), pxy), ((j, i), pyx)):
            if key in entries and not (i == j and key == (i, i)):
                raise GraphValidationError("duplicate_edge", f"duplicate edge ({x},{y})", (str(x), str(y)))
            entries[key] = float(w)
    g, _ = _assemble(labels, [m for _, m in vertices], entries, mode)
    if alpha is not None and abs(alpha - g.alpha) > TOL_MARKOV * max(1.0, alpha):
        raise GraphValidationError("alpha", f"asserted alpha {alpha} differs from observed {g.alpha}")
    return g


def build_from_conductance(
    conductances: Iterable[tuple[str, str, float]],
    measure: dict[str, float] | None = None,
    vertices: Sequence[str] | None = None,
) -> WeightedGraph:
    """Random-conductance construction: ``p(x,y) = w_xy / m(x)``, ``mu = m``.

    With an explicit ``measure`` the kernel is ``w_xy / mu(x)`` instead, which
    is in general not Markov, so the graph is built in unnormalized mode.
    """
    conductances = list(conductances)
    labels: list[str] = list(vertices) if vertices is not None else []
    seen = set(labels)
    for x, y, _ in conductances:
        for lab in (str(x), str(y)):
            if lab not in seen:
                seen.add(lab)
                labels.append(lab)
    idx = {lab: i for i, lab in enumerate(labels)}
    omega: dict[tuple[int, int], float] = {}
    for x, y, w in conductances:
        i, j = idx[str(x)], idx[str(y)]
        if (i, j) in omega:
            raise GraphValidationError("duplicate_edge", f"duplicate conductance ({x},{y})", (str(x), str(y)))
        if not w > 0:
            raise GraphValidationError("weight", f"conductance ({x},{y}) must be positive", (str(x), str(y)))
        omega[(i, j)] = float(w)
        omega[(j, i)] = float(w)
    m = np.zeros(len(labels))
    for (i, _), w in omega.items():
        m[i] += w
    for i, lab in enumerate(labels):
        if m[i] == 0:
            raise GraphValidationError("isolated", f"vertex {lab} has zero total conductance", (lab,))
    if measure is None:
        mu = m
        mode = MARKOV
    else:
        mu = np.array([float(measure[lab]) for lab in labels])
        mode = UNNORMALIZED
    entries = {(i, j): w / mu[i] for (i, j), w in omega.items()}
    g, _ = _assemble(labels, mu, entries, mode)
    return g


# ---------------------------------------------------------------------------
# metric


def bfs_distances(g: WeightedGraph, x: int | str) -> np.ndarray:
    """Graph distance from ``x`` to every vertex (-1 when unreachable)."""
    src = g.vertex(x)
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[src] = 0
    frontier = np.array([src])
    d = 0
    while len(frontier):
        d += 1
        nxt = np.unique(np.concatenate([g.indices[g.indptr[v] : g.indptr[v + 1]] for v in frontier]))
        nxt = nxt[dist[nxt] < 0]
        dist[nxt] = d
        frontier = nxt
    return dist


def distance(g: WeightedGraph, x: int | str, y: int | str) -> int:
    d = int(bfs_distances(g, x)[g.vertex(y)])
    if d < 0:
        raise ValueError(f"vertex {y!r} is unreachable from {x!r}")
    return d


def ball(g: WeightedGraph, x: int | str, r: int) -> np.ndarray:
    dist = bfs_distances(g, x)
    return np.nonzero((dist >= 0) & (dist <= r))[0]


def volume(g: WeightedGraph, x: int | str, r: int) -> float:
    return float(g.mu[ball(g, x, r)].sum())


def diameter(g: WeightedGraph) -> int:
    return int(max(bfs_distances(g, v).max() for v in range(g.n)))


# ---------------------------------------------------------------------------
# truncation


class NeighborOracle(Protocol):
    """Lazy description of a possibly infinite graph."""

    mode: str

    def neighbors(self, key: Hashable) -> list[tuple[Hashable, float]]: ...

    def measure(self, key: Hashable) -> float: ...

    def label(self, key: Hashable) -> str: ...


class _GraphOracle:
    def __init__(self, g: WeightedGraph):
        self.g = g
        self.mode = g.mode

    def neighbors(self, key):
        return list(zip(self.g.neighbors(key).tolist(), self.g.neighbor_weights(key).tolist()))

    def measure(self, key):
        return float(self.g.mu[key])

    def label(self, key):
        return self.g.labels[key]


@dataclass(frozen=True, eq=False)
class BallTruncation:
    graph: WeightedGraph
    center: str
    radius: int
    boundary_mode: str
    margin: int
    distances: np.ndarray
    keys: tuple

    @property
    def trusted(self) -> np.ndarray:
        return np.nonzero(self.distances <= self.radius - self.margin)[0]


def truncate(
    source: WeightedGraph | NeighborOracle,
    x0,
    R: int,
    boundary_mode: str = REFLECTING,
    margin: int = 2,
) -> BallTruncation:
    """Finite window ``B(x0, R)`` onto ``source``.

    Reflecting mode returns the kernel mass of dropped edges as self-loop
    weight, so row sums are those of the source; absorbing mode leaves the
    rows deficient and flags the graph as not stochastically complete.
    """
    if margin < 0 or margin > R:
        raise ValueError(f"need 0 <= margin <= R, got margin={margin}, R={R}")
    if boundary_mode not in (REFLECTING, ABSORBING_FLAGGED):
        raise ValueError(f"unknown boundary mode {boundary_mode!r}")
    if isinstance(source, WeightedGraph):
        x0 = source.vertex(x0)
        oracle: NeighborOracle = _GraphOracle(source)
    else:
        oracle = source
    keys = [x0]
    dist = {x0: 0}
    nbrs: dict = {}
    queue = deque([x0])
    while queue:
        v = queue.popleft()
        nbrs[v] = oracle.neighbors(v)
        if dist[v] == R:
            continue
        for w, _ in nbrs[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                keys.append(w)
                queue.append(w)
    pos = {k: i for i, k in enumerate(keys)}
    entries: dict[tuple[int, int], float] = {}
    deficient = False
    for k in keys:
        i = pos[k]
        deficit = 0.0
        for w, p in nbrs[k]:
            j = pos.get(w)
            if j is None:
                deficit += p
            else:
                entries[(i, j)] = entries.get((i, j), 0.0) + p
        if deficit > 0:
            if boundary_mode == REFLECTING:
                # full row sum minus what survived, so the row sum is unchanged
                full = math.fsum(p for _, p in nbrs[k])
                kept = math.fsum(p for (a, _), p in entries.items() if a == i)
                entries[(i, i)] = entries.get((i, i), 0.0) + (full - kept)
            else:
                deficient = True
    labels = [oracle.label(k) for k in keys]
    mu = [oracle.measure(k) for k in keys]
    g, order = _assemble(
        labels,
        mu,
        entries,
        oracle.mode,
        check_rows=not deficient,
        stochastic=not deficient and getattr(getattr(oracle, "g", None), "stochastic", True),
    )
    d = np.array([dist[keys[v]] for v in order], dtype=np.int64)
    trusted = d <= R - margin
    g = _replace(g, trusted=trusted)
    return BallTruncation(
        graph=g,
        center=g.labels[0],
        radius=R,
        boundary_mode=boundary_mode,
        margin=margin,
        distances=d,
        keys=tuple(keys[v] for v in order),
    )


def _replace(g: WeightedGraph, **changes) -> WeightedGraph:
    fields = dict(
        labels=g.labels,
        indptr=g.indptr,
        indices=g.indices,
        weights=g.weights,
        mu=g.mu,
        mode=g.mode,
        alpha=g.alpha,
        stochastic=g.stochastic,
        trusted=g.trusted,
        cayley=g.cayley,
    )
    fields.update(changes)
    return WeightedGraph(**fields)


def local_subgraph(g: WeightedGraph, x: int | str, radius: int = 2) -> tuple[WeightedGraph, np.ndarray]:
    """Induced window on ``B(x, radius)`` keeping only rows of ``B(x, radius-1)``.

    Operators evaluated at the new index 0 agree with ``g`` for anything that
    reads ``f`` on ``B(x, radius)``.  Rows on the outer sphere are left empty,
    so the result is not a validated graph.
    """
    xi = g.vertex(x)
    dist = bfs_distances(g, xi)
    verts = np.nonzero((dist >= 0) & (dist <= radius))[0]
    verts = verts[np.lexsort((verts, dist[verts]))]
    pos = np.full(g.n, -1, dtype=np.int64)
    pos[verts] = np.arange(len(verts))
    indptr = [0]
    indices: list[int] = []
    weights: list[float] = []
    for v in verts:
        if dist[v] < radius:
            nb = g.neighbors(v)
            indices.extend(pos[nb].tolist())
            weights.extend(g.neighbor_weights(v).tolist())
        indptr.append(len(indices))
    sub = WeightedGraph(
        labels=tuple(g.labels[v] for v in verts),
        indptr=np.asarray(indptr, dtype=np.int64),
        indices=np.asarray(indices, dtype=np.int64),
        weights=np.asarray(weights, dtype=float),
        mu=g.mu[verts],
        mode=g.mode,
        alpha=g.alpha,
        stochastic=False,
    )
    return sub, verts


# ---------------------------------------------------------------------------
# families


def two_vertex_graph() -> WeightedGraph:
    return build_from_kernel([("a", 1.0), ("b", 1.0)], [("a", "b", 1.0, 1.0)])


def random_conductance_graph(
    n_vertices: int | None = None,
    seed: int = 0,
    extra_edges: float = 1.0,
    max_vertices: int = 60,
) -> WeightedGraph:
    """Connected random graph with log-uniform conductances in [0.1, 10].

    A random spanning tree is thickened with about ``extra_edges * n`` chords.
    """
    rng = np.random.default_rng(seed)
    if n_vertices is None:
        n_vertices = int(rng.integers(2, max_vertices + 1))
    n = n_vertices
    pairs = set()
    perm = rng.permutation(n)
    for k in range(1, n):
        a, b = int(perm[k]), int(perm[rng.integers(0, k)])
        pairs.add((min(a, b), max(a, b)))
    n_extra = int(rng.poisson(extra_edges * n)) if n > 2 else 0
    for _ in range(n_extra):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            pairs.add((int(min(a, b)), int(max(a, b))))
    width = len(str(n - 1))
    conds = [
        (f"v{a:0{width}d}", f"v{b:0{width}d}", float(10.0 ** rng.uniform(-1, 1)))
        for a, b in sorted(pairs)
    ]
    return build_from_conductance(conds, vertices=[f"v{i:0{width}d}" for i in range(n)])


def complete_graph(k: int) -> WeightedGraph:
    conds = [(f"v{i}", f"v{j}", 1.0) for i in range(k) for j in range(i + 1, k)]
    return build_from_conductance(conds)


def star_graph(k: int) -> WeightedGraph:
    return build_from_conductance([("c", f"l{i}", 1.0) for i in range(k)])


def z_non_h2_conductances(radius: int) -> tuple[list[tuple[str, str, float]], dict[str, float]]:
    """Conductances and measure of the integer-line example with D_mu = +inf.

    ``w(i,i+1) = 1/(i(i+1))`` away from 0, ``w(0,+-1) = 1``, ``mu(i) = i^-4``
    (``mu(0) = 1``), restricted to ``|i| <= radius``.
    """
    conds = []
    for i in range(-radius, radius):
        j = i + 1
        w = 1.0 if 0 in (i, j) else 1.0 / (i * j)
        conds.append((str(i), str(j), w))
    measure = {str(i): (1.0 if i == 0 else float(i) ** -4) for i in range(-radius, radius + 1)}
    return conds, measure


def z_non_h2_graph(radius: int) -> WeightedGraph:
    conds, measure = z_non_h2_conductances(radius)
    return build_from_conductance(conds, measure=measure, vertices=[str(i) for i in range(-radius, radius + 1)])
