"""Volume growth, the local doubling bound and empirical doubling constants."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import BallTruncation, WeightedGraph, bfs_distances
from .report import parallel_map


class TrustedRegionError(ValueError):
    pass


@dataclass
class VolumeProfile:
    center: str
    volumes: np.ndarray  # V(x, r) for r = 0..r_max
    alpha: float

    @property
    def r_max(self) -> int:
        return len(self.volumes) - 1

    @property
    def ratios(self) -> np.ndarray:
        """V(x,2r)/V(x,r) for r = 1..⌊r_max/2⌋."""
        r = np.arange(1, self.r_max // 2 + 1)
        return self.volumes[2 * r] / self.volumes[r]

    @property
    def local_bounds(self) -> np.ndarray:
        r = np.arange(1, self.r_max // 2 + 1)
        return (1.0 + self.alpha**-2) ** r

    def rows(self) -> list[tuple[str, int, float, float | None, float | None]]:
        out = []
        ratios, bounds = self.ratios, self.local_bounds
        for r, v in enumerate(self.volumes):
            if 1 <= r <= len(ratios):
                out.append((self.center, r, float(v), float(ratios[r - 1]), float(bounds[r - 1])))
            else:
                out.append((self.center, r, float(v), None, None))
        return out


def _graph_of(source) -> tuple[WeightedGraph, BallTruncation | None]:
    if isinstance(source, BallTruncation):
        return source.graph, source
    return source, None


def volume_profile(source: WeightedGraph | BallTruncation, x, r_max: int) -> VolumeProfile:
    """Layered volumes V(x, r), r = 0..r_max.

    On a truncation every ball must stay inside the trusted region:
    d(x, x₀) + r_max ≤ R - margin.
    """
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    g, tr = _graph_of(source)
    xi = g.vertex(x)
    if tr is not None:
        reach = int(tr.distances[xi]) + r_max
        if reach > tr.radius - tr.margin:
            raise TrustedRegionError(
                f"ball of radius {r_max} around {g.labels[xi]} leaves the trusted region (needs {reach} <= {tr.radius - tr.margin})"
            )
    dist = bfs_distances(g, xi)
    layer = np.zeros(r_max + 1)
    ok = (dist >= 0) & (dist <= r_max)
    np.add.at(layer, dist[ok], g.mu[ok])
    return VolumeProfile(g.labels[xi], np.cumsum(layer), g.alpha)


@dataclass
class LocalDoublingReport:
    center: str
    alpha: float
    holds: bool
    min_slack: float  # min over r of bound/ratio
    step_holds: bool
    violations: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "center": self.center,
            "alpha": self.alpha,
            "holds": self.holds,
            "step_holds": self.step_holds,
            "min_slack": self.min_slack,
            "violations": self.violations,
        }


def check_local_doubling(profile: VolumeProfile, alpha: float | None = None, rtol: float = 1e-12) -> LocalDoublingReport:
    """V(x,2r) ≤ (1+α⁻²)^r V(x,r), and the one-step bound V(x,r+1) ≤ (1+α⁻²) V(x,r)."""
    a = profile.alpha if alpha is None else alpha
    c = 1.0 + a**-2
    V = profile.volumes
    r = np.arange(1, profile.r_max // 2 + 1)
    lhs = V[2 * r]
    rhs = c**r * V[r]
    bad = [int(k) for k in r[lhs > rhs * (1 + rtol)]]
    step_ok = bool(np.all(V[1:] <= c * V[:-1] * (1 + rtol)))
    slack = float(np.min(rhs / lhs)) if len(r) else float("inf")
    return LocalDoublingReport(profile.center, a, not bad and step_ok, slack, step_ok, bad)


@dataclass
class DoublingReport:
    profiles: list[VolumeProfile]
    empirical_constant: float
    argmax: tuple[str, int] | None
    local_bound_holds: bool
    alpha: float
    n: float | None = None

    def to_dict(self) -> dict:
        return {
            "empirical_C_DV": self.empirical_constant,
            "attained_at": None if self.argmax is None else {"center": self.argmax[0], "r": self.argmax[1]},
            "local_bound_holds": self.local_bound_holds,
            "alpha": self.alpha,
            "n": self.n,
            "note": "a finite uniform constant depending only on (n, alpha) is guaranteed under CD(0,n); no closed form exists to compare against",
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["center", "r", "V", "ratio", "local_bound"])
        for p in self.profiles:
            for row in p.rows():
                w.writerow([row[0], row[1]] + ["" if v is None else "%.17g" % v for v in row[2:]])
        return buf.getvalue()


def doubling_report(source: WeightedGraph | BallTruncation, centers: Sequence | None, r_max: int, n: float | None = None) -> DoublingReport:
    """Empirical sup of V(x,2r)/V(x,r) over ``centers`` and 2r ≤ r_max."""
    g, tr = _graph_of(source)
    if centers is None:
        centers = g.trusted_indices.tolist() if tr is None else [v for v in range(g.n) if tr.distances[v] + r_max <= tr.radius - tr.margin]
    profiles = parallel_map(lambda x: volume_profile(source, x, r_max), centers)
    best, arg, ok = 1.0, None, True
    for p in profiles:
        rat = p.ratios
        if len(rat):
            k = int(np.argmax(rat))
            if rat[k] > best or arg is None:
                best, arg = float(rat[k]), (p.center, k + 1)
        ok &= check_local_doubling(p).holds
    return DoublingReport(profiles, best, arg, ok, g.alpha, n)
