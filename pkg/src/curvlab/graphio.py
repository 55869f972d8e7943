"""Text formats for graphs and vertex functions."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .graph import MARKOV, MODES, UNNORMALIZED, WeightedGraph, build_from_conductance, build_from_kernel


class GraphFormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _records(text: str) -> Iterable[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _num(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise GraphFormatError(lineno, f"not a number: {tok!r}") from None


def parse_graph(text: str) -> WeightedGraph:
    fmt, mode = None, None
    vertices: list[tuple[str, float]] = []
    edges: list[tuple[str, str, float, float]] = []
    conds: list[tuple[str, str, float]] = []
    for lineno, tok in _records(text):
        head = tok[0]
        if head == "format":
            if len(tok) != 2 or tok[1] not in ("kernel", "conductance"):
                raise GraphFormatError(lineno, "expected 'format kernel|conductance'")
            fmt = tok[1]
        elif head == "mode":
            if len(tok) != 2 or tok[1] not in MODES:
                raise GraphFormatError(lineno, "expected 'mode markov|unnormalized'")
            mode = tok[1]
        elif fmt is None:
            raise GraphFormatError(lineno, "records must follow a 'format' header")
        elif head == "vertex":
            if len(tok) != 3:
                raise GraphFormatError(lineno, "expected 'vertex <label> <mu>'")
            vertices.append((tok[1], _num(tok[2], lineno)))
        elif head == "edge" and fmt == "kernel":
            if len(tok) != 5:
                raise GraphFormatError(lineno, "expected 'edge <x> <y> <p_xy> <p_yx>'")
            edges.append((tok[1], tok[2], _num(tok[3], lineno), _num(tok[4], lineno)))
        elif head == "cond" and fmt == "conductance":
            if len(tok) != 4:
                raise GraphFormatError(lineno, "expected 'cond <x> <y> <omega>'")
            conds.append((tok[1], tok[2], _num(tok[3], lineno)))
        else:
            raise GraphFormatError(lineno, f"unexpected record {head!r} in {fmt} format")
    if fmt is None:
        raise GraphFormatError(0, "missing 'format' header")
    if fmt == "kernel":
        return build_from_kernel(vertices, edges, mode or MARKOV)
    if vertices:
        if mode == MARKOV:
            raise GraphFormatError(0, "an explicit measure makes a conductance graph unnormalized")
        return build_from_conductance(conds, measure=dict(vertices), vertices=[v for v, _ in vertices])
    if mode == UNNORMALIZED:
        raise GraphFormatError(0, "conductance graphs without a measure are markov")
    return build_from_conductance(conds)


def read_graph(path: str) -> WeightedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def format_graph(g: WeightedGraph, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines += ["format kernel", f"mode {g.mode}"]
    lines += [f"vertex {lab} {m:.17g}" for lab, m in zip(g.labels, g.mu)]
    for x, y, w in zip(g.edge_rows, g.indices, g.weights):
        if x <= y:
            back = g.p(y, x) if x != y else w
            lines.append(f"edge {g.labels[x]} {g.labels[y]} {w:.17g} {back:.17g}")
    return "\n".join(lines) + "\n"


def format_conductance(conds: Iterable[tuple[str, str, float]], measure: dict[str, float] | None = None, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines += ["format conductance", f"mode {UNNORMALIZED if measure else MARKOV}"]
    if measure:
        lines += [f"vertex {lab} {m:.17g}" for lab, m in measure.items()]
    lines += [f"cond {x} {y} {w:.17g}" for x, y, w in conds]
    return "\n".join(lines) + "\n"


def parse_function(text: str, g: WeightedGraph) -> np.ndarray:
    """Lines '<label> <value>'; vertices that are not listed get 0."""
    f = np.zeros(g.n)
    for lineno, tok in _records(text):
        if len(tok) != 2:
            raise GraphFormatError(lineno, "expected '<vertex-label> <value>'")
        try:
            i = g.vertex(tok[0])
        except KeyError:
            raise GraphFormatError(lineno, f"unknown vertex {tok[0]!r}") from None
        v = _num(tok[1], lineno)
        if not np.isfinite(v):
            raise GraphFormatError(lineno, "function values must be finite")
        f[i] = v
    return f


def read_function(path: str, g: WeightedGraph) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return parse_function(fh.read(), g)


def format_function(g: WeightedGraph, f) -> str:
    return "".join(f"{lab} {v:.17g}\n" for lab, v in zip(g.labels, np.asarray(f, dtype=float)))
