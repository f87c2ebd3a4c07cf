from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class PartitionScheme:
    """Four disjoint, balanced quarters of ``range(n)`` (each sorted)."""

    quarters: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    n: int

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(q.size for q in self.quarters)

    def roles(self, rotation: int) -> tuple[np.ndarray, ...]:
        """Quarters in role order (P1, P2, P3, P4) for a cyclic rotation.

        Rotation ``s`` hands role P1 to quarter ``s``, P2 to ``s+1`` and so on.
        """
        s = rotation % 4
        return tuple(self.quarters[(s + i) % 4] for i in range(4))

    def quarter_of(self) -> np.ndarray:
        """Length-n array with the quarter index of every node."""
        out = np.empty(self.n, dtype=np.int64)
        for i, q in enumerate(self.quarters):
            out[q] = i
        return out


def partition_nodes(n: int, seed: int) -> PartitionScheme:
    """Uniformly random balanced split of ``range(n)`` into four quarters."""
    if n < 4:
        raise ParameterError("need at least 4 nodes to partition")
    perm = np.random.default_rng(seed).permutation(n)
    parts = tuple(np.sort(p) for p in np.array_split(perm, 4))
    for p in parts:
        p.flags.writeable = False
    return PartitionScheme(parts, n)
