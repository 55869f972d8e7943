"""Cayley graphs of finitely generated groups."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import (
    MARKOV,
    MODES,
    REFLECTING,
    CayleyData,
    WeightedGraph,
    _replace,
    truncate,
)

KINDS = ("integer_lattice", "torus", "cyclic", "symmetric", "custom_abelian")


@dataclass(frozen=True)
class GroupSpec:
    """A group together with a symmetric generating family.

    Abelian kinds use integer tuples (reduced mod ``modulus`` when finite);
    ``symmetric`` uses permutation tuples and the full set of transpositions.
    """

    kind: str
    dims: int = 1
    modulus: int | None = None
    n: int = 0
    vectors: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.kind in ("torus", "cyclic") and (self.modulus is None or self.modulus < 2):
            raise ValueError(f"{self.kind} needs a modulus >= 2")
        if self.kind == "symmetric" and self.n < 2:
            raise ValueError("symmetric group needs n >= 2")
        if self.kind in ("integer_lattice", "torus") and self.dims < 1:
            raise ValueError("dimension must be >= 1")

    @classmethod
    def integer_lattice(cls, d: int) -> "GroupSpec":
        return cls("integer_lattice", dims=d)

    @classmethod
    def torus(cls, d: int, m: int) -> "GroupSpec":
        return cls("torus", dims=d, modulus=m)

    @classmethod
    def cyclic(cls, m: int) -> "GroupSpec":
        return cls("cyclic", dims=1, modulus=m)

    @classmethod
    def symmetric(cls, n: int) -> "GroupSpec":
        return cls("symmetric", n=n)

    @classmethod
    def custom_abelian(cls, vectors: Sequence[Sequence[int]], modulus: int | None = None) -> "GroupSpec":
        vecs = tuple(tuple(int(c) for c in v) for v in vectors)
        if not vecs or len({len(v) for v in vecs}) != 1:
            raise ValueError("custom generators must be non-empty vectors of equal length")
        return cls("custom_abelian", dims=len(vecs[0]), modulus=modulus, vectors=vecs)

    @property
    def abelian(self) -> bool:
        return self.kind != "symmetric"

    @property
    def finite(self) -> bool:
        return self.kind == "symmetric" or self.modulus is not None

    @property
    def order(self) -> int | None:
        if self.kind == "symmetric":
            return math.factorial(self.n)
        if self.modulus is not None:
            return self.modulus**self.dims
        return None

    def identity(self) -> tuple[int, ...]:
        if self.kind == "symmetric":
            return tuple(range(self.n))
        return (0,) * self.dims

    def reduce(self, v: Sequence[int]) -> tuple[int, ...]:
        if self.modulus is None:
            return tuple(int(c) for c in v)
        return tuple(int(c) % self.modulus for c in v)

    def multiply(self, x: tuple[int, ...], s: tuple[int, ...]) -> tuple[int, ...]:
        if self.kind == "symmetric":
            # right multiplication: (x o s)(i) = x(s(i))
            return tuple(x[i] for i in s)
        return self.reduce(a + b for a, b in zip(x, s))

    def inverse(self, s: tuple[int, ...]) -> tuple[int, ...]:
        if self.kind == "symmetric":
            inv = [0] * len(s)
            for i, si in enumerate(s):
                inv[si] = i
            return tuple(inv)
        return self.reduce(-c for c in s)

    def generators(self) -> tuple[tuple[str, tuple[int, ...]], ...]:
        """Named, deduplicated, inversion-closed generating family."""
        if self.kind == "symmetric":
            gens = []
            for i, j in itertools.combinations(range(self.n), 2):
                s = list(range(self.n))
                s[i], s[j] = j, i
                gens.append((f"({i} {j})", tuple(s)))
            return tuple(gens)
        if self.kind == "custom_abelian":
            raw = [(f"g{k}", self.reduce(v)) for k, v in enumerate(self.vectors)]
        else:
            raw = []
            for i in range(self.dims):
                e = [0] * self.dims
                e[i] = 1
                raw.append((f"+e{i + 1}", self.reduce(e)))
                e[i] = -1
                raw.append((f"-e{i + 1}", self.reduce(e)))
        out, seen = [], set()
        for name, s in raw:
            if s not in seen:
                seen.add(s)
                out.append((name, s))
        return tuple(out)

    def label(self, x: tuple[int, ...]) -> str:
        return ",".join(str(c) for c in x)


def validate_generators(spec: GroupSpec) -> tuple[tuple[str, tuple[int, ...]], ...]:
    gens = spec.generators()
    elems = {s for _, s in gens}
    e = spec.identity()
    if e in elems:
        raise ValueError("the identity may not belong to the generating family")
    for name, s in gens:
        if spec.inverse(s) not in elems:
            raise ValueError(f"generating family is not symmetric: inverse of {name} is missing")
    return gens


class CayleyOracle:
    """Lazy neighbor oracle for the Cayley graph of ``spec``."""

    def __init__(self, spec: GroupSpec, normalization: str = MARKOV):
        if normalization not in MODES:
            raise ValueError(f"unknown normalization {normalization!r}")
        self.spec = spec
        self.mode = normalization
        self.gens = validate_generators(spec)
        k = len(self.gens)
        self.weight = 1.0 / k if normalization == MARKOV else 1.0
        self.mass = float(k) if normalization == MARKOV else 1.0

    def neighbors(self, x):
        return [(self.spec.multiply(x, s), self.weight) for _, s in self.gens]

    def measure(self, x) -> float:
        return self.mass

    def label(self, x) -> str:
        return self.spec.label(x)


def generate_cayley(
    spec: GroupSpec,
    radius: int | None = None,
    normalization: str = MARKOV,
    boundary_mode: str = REFLECTING,
    margin: int = 2,
) -> WeightedGraph:
    """Cayley graph ``x ~ x s`` for ``s`` in the generating family.

    Finite groups are enumerated completely unless ``radius`` is given;
    infinite groups need ``radius`` and yield a word-metric ball whose
    trusted interior sits ``margin`` steps inside the boundary.
    """
    oracle = CayleyOracle(spec, normalization)
    if radius is None:
        if not spec.finite:
            raise ValueError("an infinite group needs a truncation radius")
        full, R, margin = True, spec.order, 0
    else:
        full, R = False, radius
    tr = truncate(oracle, spec.identity(), R, boundary_mode=boundary_mode, margin=min(margin, R))
    g = tr.graph
    if full or g.n == spec.order:
        g = _replace(g, trusted=None)
    pos = {k: i for i, k in enumerate(tr.keys)}
    gen_elems = [s for _, s in oracle.gens]
    table = np.array([[pos.get(spec.multiply(x, s), -1) for s in gen_elems] for x in tr.keys], dtype=np.int64).reshape(g.n, len(gen_elems))
    inverse = np.array([gen_elems.index(spec.inverse(s)) for s in gen_elems], dtype=np.int64)
    data = CayleyData(
        generator_names=tuple(name for name, _ in oracle.gens),
        table=table,
        inverse=inverse,
        abelian=spec.abelian,
    )
    return _replace(g, cayley=data)
