"""Executable clearing, solving and reaching strategies.

Every constructor returns a StrategyResult: a transfinite schedule, the
claim it is meant to establish, and the windows on which that claim gets
verified.  Strategies are registered by name so that exported artifacts
can be rebuilt and re-verified from JSON.
"""

from __future__ import annotations

import functools
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable

from .game import EMPTY, Board, Jump, State, Trace, apply_sequence, full_minus, legal_moves, make_pred
from .graphs import (
    BFSEnumeration,
    FibVertex,
    Graph,
    Product,
    Vertex,
    build,
    cartesian_product,
    decode_vertex,
    encode_vertex,
)
from .schedule import (
    BUILTIN_LOADERS,
    AffinePhase,
    CompressionResult,
    DovetailPhase,
    MappedPhase,
    Phase,
    PrefixedPhase,
    ScheduleError,
    TablePhase,
    TransfiniteSchedule,
    compress,
)


class StrategyError(ValueError):
    pass


class ForcedPlayViolation(StrategyError):
    def __init__(self, step: int, moves: list[Jump]) -> None:
        self.step = step
        self.moves = moves
        super().__init__(f"step {step}: expected exactly one legal move, found {len(moves)}")


class InvariantViolation(AssertionError):
    pass


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class Claim:
    kind: str  # CLEARABLE | SOLVABLE | REACH | SCENARIO
    hole: Vertex | None = None
    survivor: Vertex | None = None
    target: Vertex | None = None
    jump_count: int | None = None
    name: str | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        for key in ("hole", "survivor", "target"):
            val = getattr(self, key)
            if val is not None:
                out[key] = encode_vertex(val)
        if self.jump_count is not None:
            out["jump_count"] = self.jump_count
        if self.name is not None:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> Claim:
        kw: dict[str, Any] = {"kind": data["kind"]}
        for key in ("hole", "survivor", "target"):
            if key in data:
                kw[key] = decode_vertex(data[key])
        kw["jump_count"] = data.get("jump_count")
        kw["name"] = data.get("name")
        return cls(**kw)


@dataclass
class StrategyResult:
    name: str
    args: dict[str, Any]
    schedule: TransfiniteSchedule
    claim: Claim
    windows: list[str]
    horizon: int = 1000
    info: dict[str, Any] = field(default_factory=dict)
    _compressed: CompressionResult | None = field(default=None, repr=False)

    @property
    def graph(self) -> Graph:
        return self.schedule.graph

    @property
    def initial(self) -> State:
        return self.schedule.initial

    def compressed(self) -> CompressionResult:
        """The omega-form of the schedule (cached; built lazily)."""
        if self._compressed is None:
            sched = self.schedule
            if sched.xi == 1 and not sched.tail:
                from .schedule import CompressionResult as CR

                self._compressed = CR(sched.block(0), None)
            else:
                self._compressed = compress(sched)
        return self._compressed

    def omega_schedule(self) -> TransfiniteSchedule:
        return TransfiniteSchedule(self.graph, self.initial, [self.compressed().phase])


def _tag_blocks(result: StrategyResult) -> StrategyResult:
    """Give composite phases a serial form that rebuilds them by name."""
    blocks = result.schedule.blocks
    if isinstance(blocks, list):
        for q, p in enumerate(blocks):
            if not isinstance(p, (AffinePhase, TablePhase)):
                p.builtin = ("strategy-block", {"strategy": result.name, "args": result.args, "block": q})
    return result


STRATEGIES: dict[str, Callable[..., StrategyResult]] = {}


def register(name: str):
    def deco(fn):
        STRATEGIES[name] = fn
        return fn

    return deco


def build_strategy(name: str, args: dict[str, Any] | None = None) -> StrategyResult:
    if name not in STRATEGIES:
        raise StrategyError(f"unknown strategy {name!r}; known: {', '.join(sorted(STRATEGIES))}")
    return _cached_build(name, _freeze(args or {}))


def _freeze(obj):
    if isinstance(obj, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in obj.items()))
    if isinstance(obj, list):
        return ("__list__",) + tuple(_freeze(v) for v in obj)
    return obj


def _thaw(obj):
    if isinstance(obj, tuple):
        if obj and obj[0] == "__list__":
            return [_thaw(v) for v in obj[1:]]
        return {k: _thaw(v) for k, v in obj}
    return obj


@functools.lru_cache(maxsize=64)
def _cached_build(name: str, frozen_args) -> StrategyResult:
    return STRATEGIES[name](**_thaw(frozen_args))


def _load_block(params: dict[str, Any]) -> Phase:
    res = build_strategy(params["strategy"], params.get("args", {}))
    return res.schedule.block(params["block"])


BUILTIN_LOADERS["strategy-block"] = _load_block


# ---------------------------------------------------------------------------
# the ray


def _ray_clear_blocks() -> list[Phase]:
    phase1 = AffinePhase((2, 1), (2, 0), (2, -1), n0=1, limit_tag=make_pred("odd-or-zero"))
    # "two spaces ahead each turn": the peg from 0 sweeps right over the odd pegs
    phase2 = AffinePhase((2, 0), (2, 1), (2, 2), n0=0)
    return [phase1, phase2]


def _ray_solve_blocks() -> list[Phase]:
    phase1 = AffinePhase((2, 2), (2, 1), (2, 0), n0=1)
    phase2 = AffinePhase((2, 1), (2, 2), (2, 3), n0=0)
    return [phase1, phase2]


@register("ray_clear")
def ray_clear() -> StrategyResult:
    """Empty the ray from a single hole at 1 in two omega-blocks."""
    g = build("ray")
    sched = TransfiniteSchedule(g, full_minus(1), _ray_clear_blocks())
    return StrategyResult("ray_clear", {}, sched, Claim("CLEARABLE", hole=1), ["int:0..200"], 1000)


@register("ray_solve")
def ray_solve() -> StrategyResult:
    """Hole at 2: clear the subray from 1, shifted copy of ray_clear; 0 survives."""
    g = build("ray")
    sched = TransfiniteSchedule(g, full_minus(2), _ray_solve_blocks())
    return StrategyResult("ray_solve", {}, sched, Claim("SOLVABLE", hole=2, survivor=0), ["int:0..200"], 1000)


@register("ray_hole0_forced")
def ray_hole0_forced(horizon: int = 100) -> StrategyResult:
    """With the hole at 0 every move is forced: (2n).(2n-1)>(2n-2).

    Verified by enumerating all legal moves at each of the first
    ``horizon`` steps.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    g = build("ray")
    s = full_minus(0)
    phase = AffinePhase((2, 0), (2, -1), (2, -2), n0=1, limit_tag=make_pred("evens"))
    for n in range(horizon):
        moves = legal_moves(g, s)
        if len(moves) != 1 or moves[0] != phase.jump(n):
            raise ForcedPlayViolation(n + 1, moves)
        s = s.set_pegs({moves[0].u: False, moves[0].v: False, moves[0].w: True})
    sched = TransfiniteSchedule(g, full_minus(0), [phase])
    return StrategyResult(
        "ray_hole0_forced",
        {"horizon": horizon},
        sched,
        Claim("SCENARIO", name="N-hole0"),
        [f"int:0..{2 * horizon}"],
        horizon,
        {"forced_steps": horizon},
    )


# ---------------------------------------------------------------------------
# integers with chords


def _shifted(phase: Phase, offset: int, start: int) -> Phase:
    """Ray phase moved onto {start, start+1, ...} by x -> x + offset."""
    return MappedPhase(phase, lambda x: x + offset, lambda y: y - offset if isinstance(y, int) and y >= start else None)


def _mirrored(phase: Phase, c: int) -> Phase:
    """Ray phase moved onto {c, c-1, ...} by x -> c - x."""
    return MappedPhase(phase, lambda x: c - x, lambda y: c - y if isinstance(y, int) and y <= c else None)


def _two_sided(opening: Jump, right: list[Phase], left: list[Phase]) -> list[Phase]:
    blocks: list[Phase] = []
    for q, (r, l) in enumerate(zip(right, left)):
        d = DovetailPhase([r, l])
        blocks.append(PrefixedPhase([opening], d) if q == 0 else d)
    return blocks


CHORD_VARIANTS = {
    # name: (graph spec for hole c, needs hole 0)
    "clear_single": (lambda c: "z-chord:-1,2", True),
    "solve_single": (lambda c: "z-chord:-1,3", True),
    "freely_clear": (lambda c: "z-chords:3", False),
    "freely_solve": (lambda c: "z-chords:4", False),
}


@register("chord")
def chord_strategies(which: str, hole: int = 0) -> StrategyResult:
    if which not in CHORD_VARIANTS:
        raise StrategyError(f"unknown chord variant {which!r}")
    spec_of, fixed = CHORD_VARIANTS[which]
    if fixed and hole != 0:
        raise StrategyError(f"{which} is only defined for the hole at 0")
    if isinstance(hole, bool) or not isinstance(hole, int):
        raise StrategyError("hole must be an integer")
    c = hole
    g = build(spec_of(c))
    left = [_mirrored(p, c) for p in _ray_clear_blocks()]
    if which in ("clear_single", "freely_clear"):
        # jump over c-1 along the chord {c-1, c+2}: holes become {c-1, c+2}
        opening = Jump(c + 2, c - 1, c)
        right = [_shifted(p, c + 1, c + 1) for p in _ray_clear_blocks()]
        claim = Claim("CLEARABLE", hole=c)
    else:
        opening = Jump(c + 3, c - 1, c)
        right = [_shifted(p, c + 1, c + 1) for p in _ray_solve_blocks()]
        claim = Claim("SOLVABLE", hole=c, survivor=c + 1)
    sched = TransfiniteSchedule(g, full_minus(c), _two_sided(opening, right, left))
    res = StrategyResult("chord", {"which": which, "hole": hole}, sched, claim, [f"int:{c - 200}..{c + 200}"], 1000)
    return _tag_blocks(res)


# ---------------------------------------------------------------------------
# the double ray


@dataclass
class Scenario:
    name: str
    trace: Trace
    expect_holes: frozenset | None = None
    expect_pegged: frozenset = frozenset()

    def check(self) -> bool:
        final = self.trace.final
        ok = all(final.has_peg(x) for x in self.expect_pegged)
        if self.expect_holes is not None:
            ok = ok and final.holes() == self.expect_holes
        return ok


def double_ray_scenarios() -> list[Scenario]:
    """Regression traces for the double ray, in both orientations.

    From a single hole at 0 no two jumps produce three holes of the shape
    {-2, -1, 1}, so the opening starts from the isomorphic hole at -1
    (and at 1 for the reflection).
    """
    g = build("zray")
    out = []
    for label, sgn in (("left", 1), ("right", -1)):
        f = lambda x, s=sgn: s * x  # noqa: E731
        start = full_minus(f(-1))
        opening = [Jump(f(1), f(0), f(-1)), Jump(f(-2), f(-1), f(0))]
        t = apply_sequence(g, start, opening)
        out.append(Scenario(f"opening-{label}", t, frozenset(f(x) for x in (-2, -1, 1))))
        cont = opening + [Jump(f(3), f(2), f(1))]
        t = apply_sequence(g, start, cont)
        out.append(Scenario(f"continuation-{label}", t, frozenset(f(x) for x in (-2, -1, 2, 3)), frozenset({f(0), f(1)})))
        t = apply_sequence(g, start, cont + [Jump(f(0), f(1), f(2))])
        out.append(Scenario(f"branch-forward-{label}", t, frozenset(f(x) for x in (-2, -1, 0, 1, 3))))
        t = apply_sequence(g, start, cont + [Jump(f(1), f(0), f(-1))])
        out.append(Scenario(f"branch-back-{label}", t, frozenset(f(x) for x in (-2, 0, 1, 2, 3))))
    return out


@register("double_ray_scenario")
def double_ray_scenario(name: str) -> StrategyResult:
    table = {s.name: s for s in double_ray_scenarios()}
    if name not in table:
        raise StrategyError(f"unknown scenario {name!r}")
    sc = table[name]
    sched = TransfiniteSchedule(sc.trace.graph, sc.trace.initial, [TablePhase(sc.trace.jumps)])
    info = {"expect_holes": sorted(sc.expect_holes), "expect_pegged": sorted(sc.expect_pegged)}
    return StrategyResult("double_ray_scenario", {"name": name}, sched, Claim("SCENARIO", name=name), ["int:-6..6"], 10, info)


# ---------------------------------------------------------------------------
# products


def _row(phase: Phase, h: Vertex) -> Phase:
    """G-phase placed on the fiber G_h = {(g, h)}."""
    return MappedPhase(phase, lambda g: (g, h), lambda x: x[0] if x[1] == h else None)


def _column(phase: Phase, g: Vertex) -> Phase:
    """H-phase placed on the fiber H_g = {(g, h)}."""
    return MappedPhase(phase, lambda h: (g, h), lambda x: x[1] if x[0] == g else None)


def _product_graph(G: Graph, H: Graph) -> Product:
    if G.spec == "ray" and H.spec == "ray":
        return build("grid:2")
    return cartesian_product(G, H)


def _clearing_blocks(strat: StrategyResult) -> tuple[Vertex, list[Phase]]:
    if strat.claim.kind != "CLEARABLE":
        raise StrategyError(f"{strat.name} does not claim CLEARABLE")
    if strat.schedule.xi is None or strat.schedule.tail:
        raise StrategyError("factor strategies must have finitely many blocks and no tail")
    return strat.claim.hole, list(strat.schedule.blocks)


@register("product_clear")
def product_clear_by_name(g: dict, h: Any = "P2") -> StrategyResult:
    gs = build_strategy(g["name"], g.get("args", {}))
    hs = "P2" if h == "P2" else build_strategy(h["name"], h.get("args", {}))
    res = product_clear(gs, hs)
    res.args = {"g": g, "h": h}
    return _tag_blocks(res)


def product_clear(g_strat: StrategyResult, h: StrategyResult | str = "P2") -> StrategyResult:
    """Clear G x P2 or G x H from a clearing strategy of G (and of H)."""
    G = g_strat.graph
    g0, gblocks = _clearing_blocks(g_strat)
    blocks: list[Phase] = []
    if h == "P2":
        nbrs = G.neighbors(g0)
        if not nbrs:
            raise StrategyError(f"{encode_vertex(g0)} has no neighbour")
        g1 = nbrs[0]
        if not G.adjacent(g0, g1):
            raise StrategyError("g1 must be adjacent to g0")
        P = cartesian_product(G, build("path:2"))
        opening = Jump((g0, 1), (g0, 0), (g1, 0))
        for q, blk in enumerate(gblocks):
            d = DovetailPhase([_row(blk, 0), _row(blk, 1)])
            blocks.append(PrefixedPhase([opening], d) if q == 0 else d)
        hole = (g1, 0)
        windows = ["prod:0..49,0..1"]
    else:
        if not isinstance(h, StrategyResult):
            raise StrategyError("h must be 'P2' or a clearing strategy")
        H = h.graph
        h0, hblocks = _clearing_blocks(h)
        P = _product_graph(G, H)
        blocks.extend(_column(b, g0) for b in hblocks)
        order = BFSEnumeration(H, h0)

        def router(x):
            return order.index(x[1])

        for blk in gblocks:
            blocks.append(DovetailPhase(lambda i, blk=blk: _row(blk, order[i]), router=router))
        hole = (g0, h0)
        windows = ["prod:0..49,0..49"]
    sched = TransfiniteSchedule(P, full_minus(hole), blocks)
    return StrategyResult("product_clear", {}, sched, Claim("CLEARABLE", hole=hole), windows, 1000)


def traversal(h: Graph, h0: Vertex, count: int) -> list[Vertex]:
    """Prefix of a traversal: BFS order, ties broken in codec order."""
    return BFSEnumeration(h, h0).prefix(count)


class ColumnPairingPhase(Phase):
    """Moves the hole of each new column next to an earlier one.

    Step k (jump k-1) visits the k-th traversal vertex h_k of H, picks the
    least a_k < k with h_{a_k} adjacent to h_k, and jumps inside the
    columns over (g1, h_{a_k}) into the hole (g0, h_{a_k}), or symmetrically
    over (g0, h_{a_k}) into (g1, h_{a_k}).  Afterwards every visited
    column has exactly one hole, at g0 or g1.
    """

    def __init__(self, G: Graph, H: Graph, g0: Vertex, g1: Vertex, h0: Vertex) -> None:
        if not G.adjacent(g0, g1):
            raise StrategyError("g1 must be adjacent to g0")
        self.G, self.H = G, H
        self.g0, self.g1 = g0, g1
        self.order = BFSEnumeration(H, h0)
        self.hole_at: list[Vertex] = [g0]
        self.a: list[int] = [-1]
        self.jumps: list[Jump] = []
        self.children: dict[int, list[int]] = {}
        self.repeats: Counter = Counter()
        self.length = len(H.vertices()) - 1 if H.finite else None

    def _extend(self, n: int) -> None:
        while len(self.jumps) <= n:
            k = len(self.jumps) + 1
            if self.length is not None and k > self.length:
                raise IndexError(n)
            hk = self.order[k]
            m = min(i for i in (self.order.index(y) for y in self.H.neighbors(hk)) if i < k)
            self.repeats[m] += 1
            if self.repeats[m] > self.H.degree(self.order[m]):
                raise StrategyError(f"index {m} repeated {self.repeats[m]} times as a_k")
            hm = self.order[m]
            g0, g1 = self.g0, self.g1
            if self.hole_at[m] == g0:
                j = Jump((g1, hk), (g1, hm), (g0, hm))
                new = g1
            elif self.hole_at[m] == g1:
                j = Jump((g0, hk), (g0, hm), (g1, hm))
                new = g0
            else:
                raise InvariantViolation(f"column {m} has its hole at {self.hole_at[m]!r}")
            self.hole_at[m] = new
            self.hole_at.append(new)
            self.a.append(m)
            self.children.setdefault(m, []).append(k)
            self.jumps.append(j)

    def jump(self, n):
        self._check_index(n)
        self._extend(n)
        return self.jumps[n]

    def _last_step(self, m: int) -> int:
        hm = self.order[m]
        return max([m] + [self.order.index(y) for y in self.H.neighbors(hm)])

    def final_hole(self, m: int) -> Vertex:
        last = self._last_step(m)
        if last >= 1:
            self._extend(last - 1)
        return self.hole_at[m]

    def involving(self, x):
        g, h = x
        if g not in (self.g0, self.g1):
            return []
        m = self.order.index(h)
        last = self._last_step(m)
        if last >= 1:
            self._extend(last - 1)
        steps = ([m] if m >= 1 else []) + self.children.get(m, [])
        return sorted(k - 1 for k in steps if x in self.jumps[k - 1])


PROVIDERS: dict[str, Callable[[int], StrategyResult]] = {
    "z-chords:3": lambda c: build_strategy("chord", {"which": "freely_clear", "hole": c}),
}


@register("freely_clear_product")
def freely_clear_product_by_name(g: str = "z-chords:3", h: str = "ray", g0: Any = 0, g1: Any = 1, h0: Any = 0) -> StrategyResult:
    if g not in PROVIDERS:
        raise StrategyError(f"no freely clearing provider for {g!r}")
    res = freely_clear_product(PROVIDERS[g], build(g), build(h), g0, g1, h0)
    res.args = {"g": g, "h": h, "g0": g0, "g1": g1, "h0": h0}
    return _tag_blocks(res)


def freely_clear_product(
    provider: Callable[[Vertex], StrategyResult], G: Graph, H: Graph, g0: Vertex, g1: Vertex, h0: Vertex
) -> StrategyResult:
    """Clear G x H from one hole when G is freely clearable.

    Block 0 pairs up the columns so each holds exactly one hole; the
    remaining blocks clear every row G_h with the provider's strategy for
    that row's hole, all rows dovetailed together.
    """
    P = _product_graph(G, H)
    phase_a = ColumnPairingPhase(G, H, g0, g1, h0)
    order = phase_a.order
    provided = functools.lru_cache(maxsize=None)(lambda c: _clearing_blocks(provider(c))[1])
    nblocks = len(provided(g0))
    if len(provided(g1)) != nblocks:
        raise StrategyError("provider strategies must share a block count")

    def router(x):
        return order.index(x[1])

    blocks: list[Phase] = [phase_a]
    for q in range(nblocks):
        blocks.append(
            DovetailPhase(lambda i, q=q: _row(provided(phase_a.final_hole(i))[q], order[i]), router=router)
        )
    sched = TransfiniteSchedule(P, full_minus((g0, h0)), blocks)
    return StrategyResult(
        "freely_clear_product", {}, sched, Claim("CLEARABLE", hole=(g0, h0)), ["prod:-24..25,0..49"], 1000
    )


def check_column_invariant(phase: ColumnPairingPhase, steps: int, checkpoint: int = 1000) -> int:
    """Replay ``steps`` jumps of the column phase on a board and confirm,
    independently of the phase's own bookkeeping, that every visited column
    holds exactly one hole at g0 or g1.  Returns the number of columns checked.
    """
    G, H = phase.G, phase.H
    P = cartesian_product(G, H)
    h0 = phase.order[0]
    board = Board(full_minus((phase.g0, h0)))
    col_holes: dict[Vertex, set] = {h0: {phase.g0}}
    allowed = {phase.g0, phase.g1}

    def check(h):
        holes = col_holes.get(h, set())
        if len(holes) != 1 or not holes <= allowed:
            raise InvariantViolation(f"column {encode_vertex(h)} holds holes {sorted(holes)}")

    for n in range(steps):
        j = phase.jump(n)
        board.play(P, j, index=n)
        for x in (j.u, j.v):
            col_holes.setdefault(x[1], set()).add(x[0])
        col_holes.setdefault(j.w[1], set()).discard(j.w[0])
        for x in j:
            check(x[1])
        if (n + 1) % checkpoint == 0:
            for h in col_holes:
                check(h)
    visited = [phase.order[m] for m in range(steps + 1)]
    for h in visited:
        check(h)
    return len(visited)


# ---------------------------------------------------------------------------
# the Fibonacci tree


@register("fib_tree_reach")
def fib_tree_reach(k: int) -> StrategyResult:
    """Deliver a peg to the root from pegs on row k in 2^k - 1 jumps.

    Stage by stage every unmarked vertex jumps over its marked left
    neighbour onto that neighbour's parent, refilling the row above.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    g = build("fibtree")
    jumps = []
    for row in range(k, 0, -1):
        for i in range(2 ** (row - 1)):
            jumps.append(Jump(FibVertex(row, 2 * i + 1), FibVertex(row, 2 * i), FibVertex(row - 1, i)))
    root = g.base_vertex
    initial = State(EMPTY, frozenset(FibVertex(k, i) for i in range(2**k)))
    sched = TransfiniteSchedule(g, initial, [TablePhase(jumps)])
    claim = Claim("REACH", target=root, jump_count=2**k - 1)
    return StrategyResult("fib_tree_reach", {"k": k}, sched, claim, [f"fib:rows<={k}"], len(jumps))


# ---------------------------------------------------------------------------
# registry helpers


def replay_prefix(result: StrategyResult, count: int) -> list[Jump]:
    """First ``count`` jumps of the omega-form, checked for legality."""
    phase = result.compressed().phase
    stop = count if phase.length is None else min(count, phase.length)
    board = Board(result.initial)
    out = []
    for n in range(stop):
        j = phase.jump(n)
        board.play(result.graph, j, index=n)
        out.append(j)
    return out


__all__ = [
    "Claim",
    "StrategyResult",
    "STRATEGIES",
    "build_strategy",
    "ray_clear",
    "ray_solve",
    "ray_hole0_forced",
    "chord_strategies",
    "double_ray_scenarios",
    "product_clear",
    "traversal",
    "freely_clear_product",
    "fib_tree_reach",
    "check_column_invariant",
    "ScheduleError",
]
