"""Small text formats: weights, labeled sets and community files."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError
from .sideinfo import validate_weights


def _lines(path):
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if s and not s.startswith("#"):
                yield lineno, s


def save_weights(weights, path: str | Path) -> None:
    with open(path, "w") as fh:
        for i, w in enumerate(weights):
            fh.write(f"{i} {w:.6f}\n")


def load_weights(path: str | Path, n: int) -> np.ndarray:
    """Read ``node_id weight`` lines; nodes not listed get weight 0."""
    w = np.zeros(n)
    for lineno, s in _lines(path):
        parts = s.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'node weight', got {s!r}", lineno)
        try:
            i, v = int(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(f"bad entry {s!r}", lineno) from None
        if not 0 <= i < n:
            raise ParseError(f"node id {i} out of range for n={n}", lineno)
        w[i] = v
    return validate_weights(w, n)


def load_node_set(path: str | Path) -> np.ndarray:
    """One node id per line (labeled sets and community files)."""
    ids = []
    for lineno, s in _lines(path):
        try:
            ids.append(int(s))
        except ValueError:
            raise ParseError(f"bad node id {s!r}", lineno) from None
    return np.array(ids, dtype=np.int64)


def save_node_set(nodes, path: str | Path) -> None:
    with open(path, "w") as fh:
        for i in nodes:
            fh.write(f"{int(i)}\n")
