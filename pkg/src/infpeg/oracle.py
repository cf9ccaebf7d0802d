"""Exhaustive search on finite boards.

Deliberately independent of ``game.legal_moves``: moves come from a
precomputed table of 3-vertex paths inside the playable set, and states are
sorted hole tuples.  Vertices outside the playable set are frozen.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .game import Jump, State
from .graphs import Graph, Vertex, encode_vertex


@dataclass
class OracleResult:
    reachable_min_pegs: int
    solvable: bool
    witness: list[Jump] | None
    explored_states: int
    truncated: bool

    def to_json(self) -> dict[str, Any]:
        return {
            "reachable_min_pegs": self.reachable_min_pegs,
            "solvable": self.solvable,
            "witness": None if self.witness is None else [j.to_json() for j in self.witness],
            "explored_states": self.explored_states,
            "truncated": self.truncated,
        }


class Board3Paths:
    """All ordered paths u-v-w with every vertex in the playable set."""

    def __init__(self, g: Graph, playable: Iterable[Vertex]) -> None:
        self.cells = sorted(set(playable))
        cellset = set(self.cells)
        for x in self.cells:
            g.check(x)
        paths = []
        for v in self.cells:
            nbrs = [x for x in g.neighbors(v) if x in cellset]
            for u in nbrs:
                for w in nbrs:
                    if u != w:
                        paths.append((u, v, w))
        self.paths = sorted(paths)
        self.cellset = cellset

    def moves(self, holes: frozenset) -> list[Jump]:
        return [Jump(u, v, w) for u, v, w in self.paths if w in holes and u not in holes and v not in holes]


def _playable(g: Graph, window: Iterable[Vertex] | None) -> list[Vertex]:
    if window is not None:
        return list(window)
    if not g.finite:
        raise ValueError(f"{g.spec} is infinite; give a finite window")
    return g.vertices()


def brute_force(
    g: Graph,
    s0: State,
    window: Iterable[Vertex] | None = None,
    max_states: int = 1_000_000,
    max_depth: int | None = None,
) -> OracleResult:
    """Breadth-first search over hole sets within the playable set.

    Each jump removes one peg, so the BFS depth of a state is the number of
    pegs lost; the deepest state found first gives the minimum and its path
    is the witness.
    """
    board = Board3Paths(g, _playable(g, window))
    start = frozenset(x for x in board.cells if not s0.has_peg(x))
    n_cells = len(board.cells)
    parent: dict[frozenset, tuple[frozenset, Jump] | None] = {start: None}
    depth = {start: 0}
    queue = deque([start])
    best = start
    truncated = False
    while queue:
        h = queue.popleft()
        d = depth[h]
        if d > depth[best]:
            best = h
        moves = board.moves(h)
        if max_depth is not None and d >= max_depth:
            if moves:
                truncated = True
            continue
        for j in moves:
            nxt = (h - {j.w}) | {j.u, j.v}
            if nxt in parent:
                continue
            if len(parent) >= max_states:
                truncated = True
                break
            parent[nxt] = (h, j)
            depth[nxt] = d + 1
            queue.append(nxt)
        if truncated and len(parent) >= max_states:
            break
    witness = []
    cur = best
    while parent[cur] is not None:
        prev, j = parent[cur]
        witness.append(j)
        cur = prev
    witness.reverse()
    min_pegs = n_cells - len(best)
    return OracleResult(min_pegs, min_pegs == 1 and not truncated, witness, len(parent), truncated)


@dataclass
class ReachabilityReport:
    ok: bool
    checked: int
    index: int | None = None
    reason: str = ""


def oracle_reachable(g: Graph, s0: State, jumps: Sequence[Jump], window: Iterable[Vertex] | None = None) -> ReachabilityReport:
    """Confirm each prefix state is reachable under the oracle's move table.

    The window defaults to every vertex touched by the jumps.
    """
    if window is None:
        cells = set()
        for j in jumps:
            cells.update(j)
        window = cells
    board = Board3Paths(g, window)
    holes = frozenset(x for x in board.cells if not s0.has_peg(x))
    for i, j in enumerate(jumps):
        if not set(j) <= board.cellset:
            return ReachabilityReport(False, i, i, f"jump {j} leaves the window")
        if (j.u, j.v, j.w) not in _path_set(board):
            return ReachabilityReport(False, i, i, f"{j} is not a path of the board")
        if j.w not in holes or j.u in holes or j.v in holes:
            return ReachabilityReport(False, i, i, f"{j} not available in the oracle state")
        holes = (holes - {j.w}) | {j.u, j.v}
    return ReachabilityReport(True, len(jumps))


def _path_set(board: Board3Paths) -> set:
    cached = getattr(board, "_pathset", None)
    if cached is None:
        cached = set(board.paths)
        board._pathset = cached
    return cached


def describe_holes(holes: Iterable[Vertex]) -> list[str]:
    return [encode_vertex(x) for x in sorted(holes)]
