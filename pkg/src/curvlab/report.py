"""Deterministic report serialization, run manifests and a bounded thread pool."""

from __future__ import annotations

import hashlib
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, TypeVar

import numpy as np

from . import __version__

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    raw = os.environ.get("CURVLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Ordered map, threaded up to CURVLAB_THREADS workers (serial by default)."""
    items = list(items)
    k = thread_count()
    if k == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.17g" % x


def _dump(obj: Any, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(fmt_float(float(obj)))
    elif isinstance(obj, str):
        import json

        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f'{pad}"{k}": ')
            _dump(v, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(seq):
            out.append(pad)
            _dump(v, out, indent, level + 1)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON with 17 significant digits, insertion key order, non-finite floats as strings."""
    out: list[str] = []
    _dump(obj, out, indent, 0)
    return "".join(out) + "\n"


def file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


@dataclass
class RunManifest:
    command: str
    inputs: dict[str, str] = field(default_factory=dict)  # path -> sha256
    seed: int | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    hypotheses: dict[str, Any] = field(default_factory=dict)
    deterministic: bool = True
    started: float = field(default_factory=time.perf_counter)

    def finish(self, body: dict) -> dict:
        """Attach the manifest to ``body`` and return the full report."""
        digest = hashlib.sha256(dumps(body).encode()).hexdigest()
        manifest = {
            "command": self.command,
            "inputs": dict(self.inputs),
            "seed": self.seed,
            "tolerances": dict(self.tolerances),
            "hypotheses": dict(self.hypotheses),
            "tool_version": __version__,
            "wall_clock_seconds": None if self.deterministic else time.perf_counter() - self.started,
            "output_digest": digest,
        }
        return {"manifest": manifest, **body}
