"""Peg states, the jump rule, and finite play.

A state is a base configuration (everything pegged, nothing pegged, or a
decidable predicate) plus a finite set of flipped vertices.  States never
hold a graph; every operation takes it explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, NamedTuple

from .graphs import Graph, NotAVertex, Vertex, build, decode_vertex, encode_vertex


class IllegalJump(ValueError):
    def __init__(self, reason: str, index: int | None = None, jump: "Jump | None" = None) -> None:
        self.reason = reason
        self.index = index
        self.jump = jump
        where = f"jump {index}: " if index is not None else ""
        super().__init__(f"{where}{reason}")


# ---------------------------------------------------------------------------
# bases


class Base:
    name = "?"

    def contains(self, v: Vertex) -> bool:
        raise NotImplementedError

    def to_text(self) -> str:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<Base {self.to_text()}>"


class _Full(Base):
    name = "FULL"

    def contains(self, v):
        return True

    def to_text(self):
        return "FULL"


class _Empty(Base):
    name = "EMPTY"

    def contains(self, v):
        return False

    def to_text(self):
        return "EMPTY"


FULL = _Full()
EMPTY = _Empty()


def _odd_or_zero(v, p):
    return v == 0 or v % 2 == 1


def _evens(v, p):
    return v % 2 == 0


def _odds(v, p):
    return v % 2 == 1


def _coord_residue(v, p):
    # pegged unless the chosen coordinate lies in residue class r mod m
    return v[p["coord"]] % p["m"] != p["r"]


def _fiber_empty(v, p):
    return v[p["coord"]] != p["value"]


PREDICATES: dict[str, Callable[[Vertex, dict], bool]] = {
    "odd-or-zero": _odd_or_zero,
    "evens": _evens,
    "odds": _odds,
    "coord-residue": _coord_residue,
    "fiber-empty": _fiber_empty,
}


@dataclass(frozen=True)
class Pred(Base):
    """A named predicate from the closed catalog ``PREDICATES``."""

    pred_name: str
    params: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        if self.pred_name not in PREDICATES:
            raise ValueError(f"unknown predicate {self.pred_name!r}")

    @property
    def name(self) -> str:
        return self.pred_name

    @property
    def param_dict(self) -> dict[str, int]:
        return dict(self.params)

    def contains(self, v):
        return PREDICATES[self.pred_name](v, self.param_dict)

    def to_text(self):
        if not self.params:
            return f"pred:{self.pred_name}"
        args = ",".join(f"{k}={val}" for k, val in self.params)
        return f"pred:{self.pred_name}:{args}"


def make_pred(name: str, **params: int) -> Pred:
    return Pred(name, tuple(sorted(params.items())))


def parse_base(text: str) -> Base:
    if text == "FULL":
        return FULL
    if text == "EMPTY":
        return EMPTY
    if text.startswith("pred:"):
        body = text[len("pred:"):]
        name, _, args = body.partition(":")
        params = {}
        if args:
            for item in args.split(","):
                k, _, val = item.partition("=")
                params[k] = int(val)
        return make_pred(name, **params)
    raise ValueError(f"unknown base {text!r}")


# ---------------------------------------------------------------------------
# states and jumps


@dataclass(frozen=True)
class State:
    base: Base
    diff: frozenset = frozenset()

    def has_peg(self, v: Vertex) -> bool:
        return self.base.contains(v) != (v in self.diff)

    def set_pegs(self, updates: dict[Vertex, bool]) -> State:
        diff = set(self.diff)
        for v, pegged in updates.items():
            if self.base.contains(v) == pegged:
                diff.discard(v)
            else:
                diff.add(v)
        return State(self.base, frozenset(diff))

    def pegs_in(self, window: Iterable[Vertex]) -> set:
        return {v for v in window if self.has_peg(v)}

    def holes_in(self, window: Iterable[Vertex]) -> set:
        return {v for v in window if not self.has_peg(v)}

    def holes(self) -> frozenset:
        """All holes; only finite (and defined) over the FULL base."""
        if self.base is not FULL:
            raise ValueError("hole set is only enumerable over the FULL base")
        return self.diff

    def pegs(self) -> frozenset:
        if self.base is not EMPTY:
            raise ValueError("peg set is only enumerable over the EMPTY base")
        return self.diff

    def to_json(self) -> dict[str, Any]:
        return {"base": self.base.to_text(), "diff": sorted_codec(self.diff)}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> State:
        return cls(parse_base(data["base"]), frozenset(decode_vertex(x) for x in data.get("diff", [])))


def full_minus(*holes: Vertex) -> State:
    return State(FULL, frozenset(holes))


def empty_plus(*pegs: Vertex) -> State:
    return State(EMPTY, frozenset(pegs))


def sorted_codec(vertices: Iterable[Vertex]) -> list[str]:
    return [encode_vertex(v) for v in sorted(vertices)]


class Jump(NamedTuple):
    u: Vertex
    v: Vertex
    w: Vertex

    @property
    def vertices(self) -> tuple[Vertex, Vertex, Vertex]:
        return (self.u, self.v, self.w)

    def __str__(self) -> str:
        return f"{encode_vertex(self.u)}.{encode_vertex(self.v)}>{encode_vertex(self.w)}"

    def to_json(self) -> list[str]:
        return [encode_vertex(x) for x in self]

    @classmethod
    def from_json(cls, data: list[str]) -> Jump:
        u, v, w = (decode_vertex(x) for x in data)
        return cls(u, v, w)

    def mapped(self, f: Callable[[Vertex], Vertex]) -> Jump:
        return Jump(f(self.u), f(self.v), f(self.w))


def why_illegal(g: Graph, s: State, j: Jump) -> str | None:
    """Reason the jump is illegal in ``s``, or None when it is legal."""
    for x in j:
        if not g.contains(x):
            raise NotAVertex(f"{x!r} is not a vertex of {g.spec}")
    u, v, w = j
    if u == w:
        return "source equals target"
    if not g.adjacent(u, v):
        return f"{encode_vertex(u)} is not adjacent to {encode_vertex(v)}"
    if not g.adjacent(v, w):
        return f"{encode_vertex(v)} is not adjacent to {encode_vertex(w)}"
    if not s.has_peg(u):
        return f"no peg on source {encode_vertex(u)}"
    if not s.has_peg(v):
        return f"no peg on jumped vertex {encode_vertex(v)}"
    if s.has_peg(w):
        return f"target {encode_vertex(w)} is occupied"
    return None


def is_legal(g: Graph, s: State, j: Jump) -> bool:
    return why_illegal(g, s, j) is None


def apply(g: Graph, s: State, j: Jump, index: int | None = None) -> State:
    reason = why_illegal(g, s, j)
    if reason is not None:
        raise IllegalJump(reason, index, j)
    return s.set_pegs({j.u: False, j.v: False, j.w: True})


def apply_unchecked(s: State, j: Jump) -> State:
    return s.set_pegs({j.u: False, j.v: False, j.w: True})


class Board:
    """Mutable counterpart of State for long simulations.

    Copying a frozen diff on every jump makes replay quadratic; a board
    edits its diff in place and converts back with ``to_state``.
    """

    def __init__(self, s: State) -> None:
        self.base = s.base
        self.diff = set(s.diff)

    def has_peg(self, v: Vertex) -> bool:
        return self.base.contains(v) != (v in self.diff)

    def _set(self, v: Vertex, pegged: bool) -> None:
        if self.base.contains(v) == pegged:
            self.diff.discard(v)
        else:
            self.diff.add(v)

    def play(self, g: Graph, j: Jump, index: int | None = None) -> None:
        reason = why_illegal(g, self, j)
        if reason is not None:
            raise IllegalJump(reason, index, j)
        self.play_unchecked(j)

    def play_unchecked(self, j: Jump) -> None:
        self._set(j.u, False)
        self._set(j.v, False)
        self._set(j.w, True)

    def to_state(self) -> State:
        return State(self.base, frozenset(self.diff))


def independent(j1: Jump, j2: Jump) -> bool:
    return not (set(j1) & set(j2))


def legal_moves(g: Graph, s: State, window: Iterable[Vertex] | None = None) -> list[Jump]:
    """All legal jumps, sorted in codec order.

    Over FULL only holes can be targets and over EMPTY only pegs can be
    sources, so the search is finite.  Other bases need an explicit window
    containing all three vertices of each move.
    """
    moves: set[Jump] = set()
    if window is not None:
        win = set(window)
        for u in win:
            if not s.has_peg(u):
                continue
            for v in g.neighbors(u):
                if v not in win or not s.has_peg(v):
                    continue
                for w in g.neighbors(v):
                    if w != u and w in win and not s.has_peg(w):
                        moves.add(Jump(u, v, w))
    elif s.base is FULL:
        for w in s.diff:
            for v in g.neighbors(w):
                if not s.has_peg(v):
                    continue
                for u in g.neighbors(v):
                    if u != w and s.has_peg(u):
                        moves.add(Jump(u, v, w))
    elif s.base is EMPTY:
        for u in s.diff:
            for v in g.neighbors(u):
                if not s.has_peg(v):
                    continue
                for w in g.neighbors(v):
                    if w != u and not s.has_peg(w):
                        moves.add(Jump(u, v, w))
    else:
        raise ValueError("legal_moves over a predicate base needs a window")
    return sorted(moves)


# ---------------------------------------------------------------------------
# traces


@dataclass
class Trace:
    graph: Graph
    initial: State
    jumps: list[Jump] = field(default_factory=list)
    final: State | None = None

    def __len__(self) -> int:
        return len(self.jumps) + 1

    def states(self):
        s = self.initial
        yield s
        for j in self.jumps:
            s = apply_unchecked(s, j)
            yield s

    def state_at(self, i: int) -> State:
        """State after the first ``i`` jumps (recomputed from the start)."""
        if not 0 <= i <= len(self.jumps):
            raise IndexError(i)
        board = Board(self.initial)
        for j in self.jumps[:i]:
            board.play_unchecked(j)
        return board.to_state()

    def to_json(self) -> dict[str, Any]:
        return {
            "graph": self.graph.spec,
            "base": self.initial.base.to_text(),
            "diff": sorted_codec(self.initial.diff),
            "jumps": [j.to_json() for j in self.jumps],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any], check: bool = True) -> Trace:
        g = build(data["graph"])
        s0 = State(parse_base(data["base"]), frozenset(decode_vertex(x) for x in data.get("diff", [])))
        jumps = [Jump.from_json(j) for j in data.get("jumps", [])]
        if check:
            return apply_sequence(g, s0, jumps)
        return cls(g, s0, jumps)


def apply_sequence(g: Graph, s0: State, jumps: Iterable[Jump]) -> Trace:
    """Play ``jumps`` in order, failing at the first illegal one."""
    board = Board(s0)
    played = []
    for i, j in enumerate(jumps):
        board.play(g, j, index=i)
        played.append(j)
    return Trace(g, s0, played, board.to_state())
