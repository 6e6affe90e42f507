"""Triangular two-time matrix fields F(s_k, t_j), t_j <= s_k, on a shared grid.

Rows are indexed by the running time s_k and hold one matrix block per
initial time t_j <= s_k, so row k has k+1 blocks and a complete field has
(N+1)(N+2)/2 blocks.  Storage is dense; blocks are rejected at write time
if any entry is non-finite.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .problem import GridSpec

__all__ = ["TriField", "IncompleteField", "IndexOut"]


class IncompleteField(RuntimeError):
    """A read required blocks that were never written."""


class IndexOut(IndexError):
    """Row or column index outside the grid triangle."""


class TriField:
    """Dense triangular storage for a two-time matrix field."""

    def __init__(self, grid: GridSpec, rows: int, cols: int):
        self.grid = grid
        self.block_shape = (rows, cols)
        self._rows: list[np.ndarray | None] = [None] * (grid.n_steps + 1)

    @property
    def n_steps(self) -> int:
        return self.grid.n_steps

    @property
    def block_count(self) -> int:
        n = self.n_steps + 1
        return n * (n + 1) // 2

    def set_row(self, k: int, blocks: np.ndarray) -> None:
        """Store row k: blocks[j] = F(s_k, t_j) for j = 0..k."""
        if not 0 <= k <= self.n_steps:
            raise IndexOut(f"row {k} outside 0..{self.n_steps}")
        blocks = np.asarray(blocks, dtype=float)
        if blocks.shape != (k + 1, *self.block_shape):
            raise ValueError(f"row {k} must have shape {(k + 1, *self.block_shape)}, "
                             f"got {blocks.shape}")
        if not np.all(np.isfinite(blocks)):
            raise ValueError(f"row {k} contains non-finite entries")
        stored = blocks.copy()
        stored.flags.writeable = False
        self._rows[k] = stored

    def row(self, k: int) -> np.ndarray:
        if not 0 <= k <= self.n_steps:
            raise IndexOut(f"row {k} outside 0..{self.n_steps}")
        if self._rows[k] is None:
            raise IncompleteField(f"row {k} was never written")
        return self._rows[k]

    def at(self, k: int, j: int) -> np.ndarray:
        """Block F(s_k, t_j), j <= k."""
        if not 0 <= j <= k:
            raise IndexOut(f"pair (k={k}, j={j}) outside the triangle")
        return self.row(k)[j]

    def is_complete(self) -> bool:
        return all(r is not None for r in self._rows)

    def diagonal(self) -> np.ndarray:
        """Schedule k -> F(s_k, s_k), shape (N+1, rows, cols)."""
        out = np.empty((self.n_steps + 1, *self.block_shape))
        for k in range(self.n_steps + 1):
            if self._rows[k] is None:
                raise IncompleteField(f"diagonal block {k} unset")
            out[k] = self._rows[k][k]
        return out

    def column(self, j: int) -> np.ndarray:
        """Schedule s_k -> F(s_k, t_j) for k = j..N, shape (N+1-j, rows, cols)."""
        if not 0 <= j <= self.n_steps:
            raise IndexOut(f"column {j} outside 0..{self.n_steps}")
        out = np.empty((self.n_steps + 1 - j, *self.block_shape))
        for i, k in enumerate(range(j, self.n_steps + 1)):
            if self._rows[k] is None:
                raise IncompleteField(f"block (k={k}, j={j}) unset")
            out[i] = self._rows[k][j]
        return out

    def max_abs(self) -> float:
        vals = [float(np.max(np.abs(r))) for r in self._rows if r is not None and r.size]
        return max(vals) if vals else 0.0

    # -- CSV export ---------------------------------------------------

    def to_csv(self, path: str | Path) -> None:
        """One row per pair (s_k, t_j): columns s, t, then row-major entries."""
        nodes = self.grid.nodes
        r, c = self.block_shape
        header = "s,t," + ",".join(f"f_{i + 1}{j + 1}" for i in range(r) for j in range(c))
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for k in range(self.n_steps + 1):
                row = self.row(k)
                for j in range(k + 1):
                    entries = ",".join(_fmt(v) for v in row[j].ravel())
                    fh.write(f"{_fmt(nodes[k])},{_fmt(nodes[j])},{entries}\n")

    def diagonal_to_csv(self, path: str | Path) -> None:
        write_schedule_csv(path, self.grid.nodes, self.diagonal(), time_label="s")


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_schedule_csv(path: str | Path, times: np.ndarray, blocks: np.ndarray,
                       time_label: str = "t") -> None:
    """Export a time-indexed matrix schedule: columns time, row-major entries."""
    blocks = np.asarray(blocks)
    r, c = blocks.shape[-2:]
    header = time_label + "," + ",".join(f"f_{i + 1}{j + 1}" for i in range(r) for j in range(c))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for t, blk in zip(times, blocks):
            fh.write(_fmt(t) + "," + ",".join(_fmt(v) for v in blk.ravel()) + "\n")
