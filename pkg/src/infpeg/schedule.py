"""Infinite jump schedules, their limits, and compression to length omega.

A phase is an indexable, possibly infinite, sequence of jumps that can
also answer "which indices involve vertex x".  A transfinite schedule is a
list of phases (one per omega-block, finitely many or omega many) plus a
finite tail.  Limits are never guessed: a window is evaluated by replaying,
with legality checks, exactly the jumps that can influence it.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, NamedTuple, Sequence

from .game import Base, Board, IllegalJump, Jump, Pred, State
from .graphs import Graph, Vertex, encode_vertex

DEFAULT_HORIZON = 10_000
DEFAULT_WINDOW_LIMIT = 1_000


class ScheduleError(ValueError):
    pass


class LimitUndefined(ScheduleError):
    def __init__(self, x: Vertex) -> None:
        self.vertex = x
        super().__init__(f"limit undefined at {encode_vertex(x) if x is not None else x}")


class HorizonExceeded(ScheduleError):
    pass


# ---------------------------------------------------------------------------
# ordinals below omega^2 + omega


@functools.total_ordering
class _Omega:
    def __eq__(self, other):
        return isinstance(other, _Omega)

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return not isinstance(other, _Omega)

    def __hash__(self):
        return hash("omega")

    def __repr__(self):
        return "omega"


OMEGA = _Omega()


class OrdinalIndex(NamedTuple):
    """The ordinal ``omega*q + r``; ``q`` may be OMEGA (the tail after omega^2)."""

    q: Any
    r: int

    def __str__(self) -> str:
        if self.q == 0:
            return str(self.r)
        head = "omega^2" if self.q is OMEGA else ("omega" if self.q == 1 else f"omega*{self.q}")
        return head if self.r == 0 else f"{head}+{self.r}"


# ---------------------------------------------------------------------------
# phases


class Phase:
    """A sequence of jumps; ``length`` None means omega."""

    length: int | None = None
    limit_tag: Pred | None = None
    builtin: tuple[str, dict] | None = None

    def jump(self, n: int) -> Jump:
        raise NotImplementedError

    def involving(self, x: Vertex) -> list[int]:
        """Sorted indices of jumps involving ``x``; LimitUndefined if infinite."""
        if self.length is None:
            raise NotImplementedError
        return [n for n in range(self.length) if x in self.jump(n)]

    def locality(self, x: Vertex) -> int:
        inv = self.involving(x)
        return inv[-1] if inv else -1

    def _check_index(self, n: int) -> None:
        if n < 0 or (self.length is not None and n >= self.length):
            raise IndexError(n)

    def prefix(self, count: int) -> list[Jump]:
        stop = count if self.length is None else min(count, self.length)
        return [self.jump(n) for n in range(stop)]

    def to_json(self) -> dict[str, Any]:
        if self.builtin is None:
            raise ScheduleError(f"{type(self).__name__} has no serial form")
        name, params = self.builtin
        return {"kind": "builtin", "name": name, "params": params}


class TablePhase(Phase):
    def __init__(self, jumps: Sequence[Jump]) -> None:
        self.jumps = list(jumps)
        self.length = len(self.jumps)
        self._index: dict[Vertex, list[int]] = {}
        for n, j in enumerate(self.jumps):
            for x in set(j):
                self._index.setdefault(x, []).append(n)

    def jump(self, n):
        self._check_index(n)
        return self.jumps[n]

    def involving(self, x):
        return list(self._index.get(x, ()))

    def to_json(self):
        return {"kind": "table", "jumps": [j.to_json() for j in self.jumps]}


Form = tuple[int, int]


class AffinePhase(Phase):
    """Jump ``i`` is ``(a_u n + b_u) . (a_v n + b_v) > (a_w n + b_w)`` at ``n = n0 + i``."""

    def __init__(
        self,
        u: Form,
        v: Form,
        w: Form,
        n0: int = 0,
        length: int | None = None,
        limit_tag: Pred | None = None,
    ) -> None:
        self.forms = (tuple(u), tuple(v), tuple(w))
        self.n0 = n0
        self.length = length
        self.limit_tag = limit_tag

    def jump(self, i):
        self._check_index(i)
        n = self.n0 + i
        return Jump(*(a * n + b for a, b in self.forms))

    def involving(self, x):
        if isinstance(x, bool) or not isinstance(x, int):
            return []
        out = set()
        for a, b in self.forms:
            if a == 0:
                if b == x:
                    if self.length is None:
                        raise LimitUndefined(x)
                    out.update(range(self.length))
                continue
            if (x - b) % a == 0:
                i = (x - b) // a - self.n0
                if i >= 0 and (self.length is None or i < self.length):
                    out.add(i)
        return sorted(out)

    def to_json(self):
        u, v, w = self.forms
        out = {"kind": "affine", "u": list(u), "v": list(v), "w": list(w), "n0": self.n0, "length": self.length}
        if self.limit_tag is not None:
            out["limit"] = self.limit_tag.to_text()
        return out


class FunctionPhase(Phase):
    """Jumps from a function of the index with an explicit involvement oracle."""

    def __init__(
        self,
        fn: Callable[[int], Jump],
        involving: Callable[[Vertex], list[int]],
        length: int | None = None,
        limit_tag: Pred | None = None,
    ) -> None:
        self._fn = fn
        self._involving = involving
        self.length = length
        self.limit_tag = limit_tag

    def jump(self, n):
        self._check_index(n)
        return self._fn(n)

    def involving(self, x):
        return self._involving(x)


class MappedPhase(Phase):
    """Image of a phase under an injective vertex map with partial inverse."""

    def __init__(self, base: Phase, fwd: Callable[[Vertex], Vertex], inv: Callable[[Vertex], Vertex | None]) -> None:
        self.base = base
        self.fwd = fwd
        self.inv = inv
        self.length = base.length

    def jump(self, n):
        return self.base.jump(n).mapped(self.fwd)

    def involving(self, x):
        y = self.inv(x)
        return [] if y is None else self.base.involving(y)


class PrefixedPhase(Phase):
    def __init__(self, prefix: Sequence[Jump], base: Phase) -> None:
        self.head = TablePhase(prefix)
        self.base = base
        self.length = None if base.length is None else base.length + self.head.length

    def jump(self, n):
        self._check_index(n)
        if n < self.head.length:
            return self.head.jump(n)
        return self.base.jump(n - self.head.length)

    def involving(self, x):
        k = self.head.length
        return self.head.involving(x) + [i + k for i in self.base.involving(x)]


class InsertedPhase(Phase):
    """``base`` with one extra jump placed at index ``pos``."""

    def __init__(self, base: Phase, pos: int, extra: Jump) -> None:
        self.base = base
        self.pos = pos
        self.extra = extra
        self.length = None if base.length is None else base.length + 1

    def jump(self, n):
        self._check_index(n)
        if n < self.pos:
            return self.base.jump(n)
        if n == self.pos:
            return self.extra
        return self.base.jump(n - 1)

    def involving(self, x):
        out = [i if i < self.pos else i + 1 for i in self.base.involving(x)]
        if x in self.extra:
            out.append(self.pos)
        return sorted(out)


def cantor_pair(i: int, j: int) -> int:
    s = i + j
    return s * (s + 1) // 2 + j


def cantor_unpair(n: int) -> tuple[int, int]:
    s = 0
    while (s + 1) * (s + 2) // 2 <= n:
        s += 1
    j = n - s * (s + 1) // 2
    return s - j, j


class DovetailPhase(Phase):
    """Interleave pairwise independent omega-phases into one omega-phase.

    With a finite list the copies take turns; with ``count=None`` the copies
    are ``copies(i)`` for every i, interleaved by Cantor pairing, and
    ``router(x)`` names the only copy that can involve ``x``.
    """

    def __init__(
        self,
        copies: Sequence[Phase] | Callable[[int], Phase],
        router: Callable[[Vertex], int | None] | None = None,
        count: int | None = None,
        limit_tag: Pred | None = None,
    ) -> None:
        self.limit_tag = limit_tag
        self.router = router
        self.length = None
        if callable(copies):
            if router is None:
                raise ValueError("an infinite dovetail needs a router")
            self._copy_fn = functools.lru_cache(maxsize=None)(copies)
            self.count = count
        else:
            copies = list(copies)
            if any(c.length is not None for c in copies):
                raise ValueError("dovetailed copies must all have length omega")
            self._copy_fn = copies.__getitem__
            self.count = len(copies)

    def copy(self, i: int) -> Phase:
        return self._copy_fn(i)

    def jump(self, n):
        self._check_index(n)
        if self.count is not None:
            i, j = n % self.count, n // self.count
        else:
            i, j = cantor_unpair(n)
        return self.copy(i).jump(j)

    def _position(self, i: int, j: int) -> int:
        return j * self.count + i if self.count is not None else cantor_pair(i, j)

    def involving(self, x):
        if self.router is not None:
            i = self.router(x)
            if i is None:
                return []
            return [self._position(i, j) for j in self.copy(i).involving(x)]
        out = []
        for i in range(self.count):
            out.extend(self._position(i, j) for j in self.copy(i).involving(x))
        return sorted(out)


# ---------------------------------------------------------------------------
# phase serialization

BUILTIN_LOADERS: dict[str, Callable[[dict], Phase]] = {}


def phase_from_json(data: dict[str, Any]) -> Phase:
    from .game import parse_base

    kind = data.get("kind")
    if kind == "table":
        return TablePhase([Jump.from_json(j) for j in data["jumps"]])
    if kind == "affine":
        tag = parse_base(data["limit"]) if data.get("limit") else None
        return AffinePhase(data["u"], data["v"], data["w"], data.get("n0", 0), data.get("length"), tag)
    if kind == "builtin":
        name = data["name"]
        if name not in BUILTIN_LOADERS:
            # loaders are registered when the strategy catalog is imported
            from . import strategies  # noqa: F401
        if name not in BUILTIN_LOADERS:
            raise ScheduleError(f"unknown builtin phase {name!r}")
        return BUILTIN_LOADERS[name](data.get("params", {}))
    raise ScheduleError(f"unknown phase kind {kind!r}")


# ---------------------------------------------------------------------------
# lazy limit bases


class LimitBase(Base):
    """Membership in the limit of ``phase`` played from ``prev``.

    After the last jump of the phase that involves x, x stays as that jump
    left it: pegged iff it was the target.  Sound only for schedules that
    replay legally; ``evaluate_window`` is the checked alternative.
    """

    name = "limit"

    def __init__(self, prev: State, phase: Phase) -> None:
        self.prev = prev
        self.phase = phase

    def contains(self, v):
        inv = self.phase.involving(v)
        if inv:
            return self.phase.jump(inv[-1]).w == v
        return self.prev.has_peg(v)

    def to_text(self):
        return "limit"


# ---------------------------------------------------------------------------
# schedules


class BlockFamily:
    """Omega-many blocks: ``block(q)`` plus ``block_locality(x)``, the
    largest block index whose phase involves x (-1 for none)."""

    def __init__(self, block: Callable[[int], Phase], block_locality: Callable[[Vertex], int], builtin=None) -> None:
        self._block = functools.lru_cache(maxsize=None)(block)
        self.block_locality = block_locality
        self.builtin = builtin

    def __getitem__(self, q: int) -> Phase:
        if q < 0:
            raise IndexError(q)
        return self._block(q)


@dataclass
class WindowResult:
    window: list
    pegs: frozenset
    played: int
    block_lengths: list[int]
    final: State

    @property
    def empty(self) -> bool:
        return not self.pegs


@dataclass
class TransfiniteSchedule:
    """Blocks indexed by q < xi (xi finite or omega), then a finite tail.

    The jump at ordinal ``omega*q + l`` is ``block(q).jump(l)``; the tail
    jump ``r`` sits at ``omega*xi + r``.
    """

    graph: Graph
    initial: State
    blocks: list[Phase] | BlockFamily
    tail: list[Jump] = field(default_factory=list)

    @property
    def xi(self) -> int | None:
        return None if isinstance(self.blocks, BlockFamily) else len(self.blocks)

    @property
    def xi_text(self) -> str:
        return "omega" if self.xi is None else str(self.xi)

    def block(self, q: int) -> Phase:
        if self.xi is not None and q >= self.xi:
            raise IndexError(q)
        return self.blocks[q]

    def blocks_touching(self, x: Vertex) -> range:
        if self.xi is None:
            return range(self.blocks.block_locality(x) + 1)
        return range(self.xi)

    def jump_at(self, idx: OrdinalIndex) -> Jump:
        if idx.q is OMEGA or (self.xi is not None and idx.q == self.xi):
            return self.tail[idx.r]
        return self.block(idx.q).jump(idx.r)

    def evaluate_window(
        self, window: Iterable[Vertex], horizon: int = 10 * DEFAULT_HORIZON, check: bool = True
    ) -> WindowResult:
        """Exact restriction of the final state to ``window``.

        Walks the blocks backwards to find, for each block, the last index
        that can affect the vertices needed later; then replays those
        finite prefixes forwards with legality checks.  Anything beyond the
        computed prefixes never touches the window.
        """
        window = list(window)
        need = set(window)
        for j in self.tail:
            need.update(j)
        for x in need:
            self.graph.check(x)
        if self.xi is None:
            top = max((self.blocks.block_locality(x) for x in need), default=-1)
        else:
            top = self.xi - 1
        cutoffs = [-1] * (top + 1)
        for q in range(top, -1, -1):
            phase = self.block(q)
            n_q = max((phase.locality(x) for x in need), default=-1)
            if n_q >= horizon:
                raise HorizonExceeded(f"block {q} needs {n_q + 1} jumps, above horizon {horizon}")
            cutoffs[q] = n_q
            for n in range(n_q + 1):
                need.update(phase.jump(n))
        board = Board(self.initial)
        played = 0
        for q in range(top + 1):
            phase = self.block(q)
            for n in range(cutoffs[q] + 1):
                j = phase.jump(n)
                if check:
                    try:
                        board.play(self.graph, j, index=played)
                    except IllegalJump as e:
                        raise IllegalJump(f"block {q} jump {n}: {e.reason}", played, j) from None
                else:
                    board.play_unchecked(j)
                played += 1
        for r, j in enumerate(self.tail):
            if check:
                try:
                    board.play(self.graph, j, index=played)
                except IllegalJump as e:
                    raise IllegalJump(f"tail jump {r}: {e.reason}", played, j) from None
            else:
                board.play_unchecked(j)
            played += 1
        pegs = frozenset(x for x in window if board.has_peg(x))
        return WindowResult(window, pegs, played, [c + 1 for c in cutoffs], board.to_state())

    def to_json(self) -> dict[str, Any]:
        if self.xi is None:
            if self.blocks.builtin is None:
                raise ScheduleError("omega-many blocks need a builtin name to serialize")
            name, params = self.blocks.builtin
            phases: Any = {"kind": "builtin-family", "name": name, "params": params}
        else:
            phases = [p.to_json() for p in self.blocks]
        return {"phases": phases, "xi": self.xi_text, "tail": [j.to_json() for j in self.tail]}


def single_phase(g: Graph, s0: State, phase: Phase) -> TransfiniteSchedule:
    return TransfiniteSchedule(g, s0, [phase])


@dataclass
class LimitResult:
    pegs: frozenset
    window: list
    tag: Pred | None
    jumps_simulated: int


def limit_state(g: Graph, s0: State, phase: Phase, window: Iterable[Vertex], horizon: int = 10 * DEFAULT_HORIZON) -> LimitResult:
    """The limit of ``phase`` from ``s0`` restricted to ``window``.

    When the phase declares a catalog predicate for its limit and the
    window agrees with it, the predicate is attached as a tag.
    """
    res = single_phase(g, s0, phase).evaluate_window(window, horizon)
    tag = phase.limit_tag
    if tag is not None and any(tag.contains(x) != (x in res.pegs) for x in res.window):
        tag = None
    return LimitResult(res.pegs, res.window, tag, res.played)


@dataclass
class InvolvementVerdict:
    passed: bool
    vertex: Vertex | None = None
    index: int | None = None
    reason: str = ""


def check_finite_involvement(phase: Phase, window: Iterable[Vertex], horizon: int) -> InvolvementVerdict:
    """Spot-check locality: no jump in (locality(x), horizon] involves x."""
    loc = {}
    for x in window:
        try:
            loc[x] = phase.locality(x)
        except LimitUndefined:
            return InvolvementVerdict(False, x, None, "involved in infinitely many jumps")
    stop = horizon + 1 if phase.length is None else min(horizon + 1, phase.length)
    for n in range(stop):
        for x in set(phase.jump(n)):
            if x in loc and n > loc[x]:
                return InvolvementVerdict(False, x, n, f"jump {n} involves it beyond its locality {loc[x]}")
    return InvolvementVerdict(True)


# ---------------------------------------------------------------------------
# compression


def default_enumeration() -> Iterator[int]:
    """0, 0,1, 0,1,2, 0,1,2,3, ...: every index appears infinitely often."""
    for top in itertools.count():
        yield from range(top + 1)


def _enumeration(a: Iterable[int] | None, xi: int | None) -> Iterator[int]:
    source = default_enumeration() if a is None else iter(a)
    for v in source:
        if v < 0:
            raise ScheduleError(f"enumeration value {v} is negative")
        if xi is None or v < xi:
            yield v
        elif a is not None:
            raise ScheduleError(f"enumeration value {v} is not below xi={xi}")


def check_enumeration(values: Sequence[int], xi: int, min_hits: int = 2) -> None:
    """Corroborate the infinite-hitting requirement on a finite prefix."""
    counts = [0] * xi
    for v in values:
        if 0 <= v < xi:
            counts[v] += 1
    for q, c in enumerate(counts):
        if c < min_hits:
            raise ScheduleError(f"enumeration prefix hits block {q} only {c} times")


Ordinal = tuple[int, int]


@dataclass
class CompressionWitness:
    a: list[int] = field(default_factory=list)
    pairs: list[Ordinal] = field(default_factory=list)
    deps: list[frozenset] = field(default_factory=list)
    surjectivity: str = "asymptotic: guaranteed by the construction, not decidable from a prefix"

    def injective(self) -> bool:
        return len(set(self.pairs)) == len(self.pairs)

    def dependencies_resolved(self) -> bool:
        seen: set[Ordinal] = set()
        for pair, d in zip(self.pairs, self.deps):
            if not d <= seen:
                return False
            seen.add(pair)
        return True

    def to_json(self, limit: int | None = None) -> dict[str, Any]:
        n = len(self.pairs) if limit is None else min(limit, len(self.pairs))
        return {
            "a": self.a[:n],
            "map": [[k, l] for k, l in self.pairs[:n]],
            "deps": [sorted([k, l] for k, l in d) for d in self.deps[:n]],
            "injective": self.injective(),
            "dependencies_resolved": self.dependencies_resolved(),
            "surjectivity": self.surjectivity,
        }


class Compressor:
    """Incremental bijection ``n -> omega*k_n + l_n`` onto the blocks.

    ``k_n`` is the least block at or above ``a_n`` holding an unemitted
    jump whose dependencies are all emitted, and ``l_n`` the least such
    jump in block ``k_n``.  The searches over l (and over k when there are
    omega blocks) are confined to bounded windows above the lowest
    unemitted index; this never loses surjectivity because the lowest
    unemitted jump of every block eventually becomes available.
    """

    def __init__(
        self,
        sched: TransfiniteSchedule,
        a: Iterable[int] | None = None,
        ell_window: int = 64,
        block_window: int = 64,
    ) -> None:
        self.sched = sched
        self.xi = sched.xi
        self._a = _enumeration(a, self.xi)
        self.ell_window = ell_window
        self.block_window = block_window
        self.emitted: dict[int, set[int]] = {}
        self.low: dict[int, int] = {}
        self.position: dict[Ordinal, int] = {}
        self.witness = CompressionWitness()
        self._deps: dict[Ordinal, frozenset] = {}

    def deps(self, k: int, l: int) -> frozenset:
        key = (k, l)
        d = self._deps.get(key)
        if d is None:
            out = set()
            for x in set(self.sched.block(k).jump(l)):
                for k2 in self.sched.blocks_touching(x):
                    if k2 > k:
                        break
                    for l2 in self.sched.block(k2).involving(x):
                        if (k2, l2) < key:
                            out.add((k2, l2))
                        elif k2 == k:
                            break
            d = frozenset(out)
            self._deps[key] = d
        return d

    def _is_emitted(self, k: int, l: int) -> bool:
        return l < self.low.get(k, 0) or l in self.emitted.get(k, ())

    def _valid(self, k: int, l: int) -> bool:
        if self._is_emitted(k, l):
            return False
        return all(self._is_emitted(k2, l2) for k2, l2 in self.deps(k, l))

    def _first_valid(self, k: int) -> int | None:
        length = self.sched.block(k).length
        lo = self.low.get(k, 0)
        for l in range(lo, lo + self.ell_window + 1):
            if length is not None and l >= length:
                return None
            if self._valid(k, l):
                return l
        return None

    def _blocks_from(self, start: int) -> range:
        if self.xi is None:
            return range(start, start + self.block_window + 1)
        return range(start, self.xi)

    def step(self) -> Ordinal:
        a_n = next(self._a)
        choice = None
        for k in self._blocks_from(a_n):
            l = self._first_valid(k)
            if l is not None:
                choice = (k, l)
                break
        if choice is None:
            # T_n empty: fall back to block 0, then to any block with work
            for k in self._blocks_from(0):
                l = self._first_valid(k)
                if l is not None:
                    choice = (k, l)
                    break
        if choice is None:
            raise HorizonExceeded("dependency set not resolvable within the search windows")
        k, l = choice
        self.emitted.setdefault(k, set()).add(l)
        low = self.low.get(k, 0)
        em = self.emitted[k]
        while low in em:
            em.discard(low)
            low += 1
        self.low[k] = low
        n = len(self.witness.pairs)
        self.position[choice] = n
        self.witness.a.append(a_n)
        self.witness.pairs.append(choice)
        self.witness.deps.append(self.deps(k, l))
        return choice

    def extend_to(self, n: int) -> None:
        while len(self.witness.pairs) <= n:
            self.step()


class CompressedPhase(Phase):
    """The omega-schedule produced by a Compressor, generated on demand."""

    def __init__(self, compressor: Compressor, horizon: int = DEFAULT_HORIZON * 10) -> None:
        self.c = compressor
        self.horizon = horizon
        self.length = None

    def jump(self, n):
        if n >= self.horizon:
            raise HorizonExceeded(f"compressed index {n} beyond horizon {self.horizon}")
        self.c.extend_to(n)
        k, l = self.c.witness.pairs[n]
        return self.c.sched.block(k).jump(l)

    def involving(self, x):
        sched = self.c.sched
        sources = []
        for k in sched.blocks_touching(x):
            sources.extend((k, l) for l in sched.block(k).involving(x))
        out = []
        for src in sources:
            while src not in self.c.position:
                if len(self.c.witness.pairs) >= self.horizon:
                    raise HorizonExceeded(f"jump {src} not emitted within horizon {self.horizon}")
                self.c.step()
            out.append(self.c.position[src])
        return sorted(out)


@dataclass
class CompressionResult:
    phase: Phase
    witness: CompressionWitness | None
    insertions: list[int] = field(default_factory=list)

    def schedule(self, g: Graph, s0: State) -> TransfiniteSchedule:
        return TransfiniteSchedule(g, s0, [self.phase])


def compress_omega_xi(
    sched: TransfiniteSchedule,
    a: Iterable[int] | None = None,
    horizon: int = DEFAULT_HORIZON * 10,
    ell_window: int = 64,
    block_window: int = 64,
) -> CompressionResult:
    if sched.xi == 0:
        raise ScheduleError("nothing to compress: no omega-blocks")
    c = Compressor(sched, a, ell_window, block_window)
    return CompressionResult(CompressedPhase(c, horizon), c.witness)


def compress_omega_plus_r(phase: Phase, tail: Sequence[Jump], horizon: int = DEFAULT_HORIZON * 10) -> CompressionResult:
    """Fold trailing jumps into an omega-phase.

    Each tail jump goes right after the last phase jump sharing a vertex
    with it; later jumps never touch its vertices, so it sees exactly the
    limit state there.  Repeating for each tail jump keeps dependent tail
    jumps in their original order.
    """
    p = phase
    positions = []
    for j in tail:
        try:
            m = max(p.locality(x) for x in set(j))
        except (LimitUndefined, HorizonExceeded):
            raise ScheduleError("insertion point not found within horizon") from None
        if m >= horizon:
            raise ScheduleError("insertion point not found within horizon")
        p = InsertedPhase(p, m + 1, j)
        positions.append(m + 1)
    return CompressionResult(p, None, positions)


def compress(
    sched: TransfiniteSchedule,
    a: Iterable[int] | None = None,
    horizon: int = DEFAULT_HORIZON * 10,
    ell_window: int = 64,
) -> CompressionResult:
    """Rewrite a schedule of length ``omega*xi + r`` as one omega-phase."""
    inner = compress_omega_xi(sched, a, horizon, ell_window)
    if not sched.tail:
        return inner
    outer = compress_omega_plus_r(inner.phase, sched.tail, horizon)
    return CompressionResult(outer.phase, inner.witness, outer.insertions)


# ---------------------------------------------------------------------------
# walks


class WalkOracleError(ScheduleError):
    def __init__(self, message: str, index: int) -> None:
        self.index = index
        super().__init__(message)


def walk_to_ray(
    walk: Sequence[Vertex] | Callable[[int], Vertex],
    last_occurrence: Callable[[Vertex], int],
    prefix_len: int,
    scan_limit: int | None = None,
    g: Graph | None = None,
) -> list[Vertex]:
    """Extract a ray from a walk in which every vertex repeats finitely often.

    ``r_0 = w_0`` and ``r_{n+1} = w_{a_n}`` with ``a_n`` one past the last
    occurrence of ``r_n``.  The oracle is checked against the walk up to
    ``scan_limit`` (default: the sequence length when known).
    """
    at = walk if callable(walk) else walk.__getitem__
    if scan_limit is None and not callable(walk):
        scan_limit = len(walk)
    out: list[Vertex] = []
    idx = 0
    for _ in range(prefix_len):
        r = at(idx)
        out.append(r)
        last = last_occurrence(r)
        if last < idx or (scan_limit is not None and last >= scan_limit) or at(last) != r:
            raise WalkOracleError(f"last_occurrence({r!r}) = {last} does not point at {r!r}", last)
        if scan_limit is not None:
            for i in range(last + 1, scan_limit):
                if at(i) == r:
                    raise WalkOracleError(f"{r!r} occurs again at index {i} after its claimed last occurrence {last}", i)
        idx = last + 1
        if scan_limit is not None and idx >= scan_limit:
            break
    if len(set(out)) != len(out):
        raise WalkOracleError("extracted vertices repeat", len(out))
    if g is not None:
        for n, (x, y) in enumerate(zip(out, out[1:])):
            if not g.adjacent(x, y):
                raise WalkOracleError(f"{x!r} and {y!r} are not adjacent", n)
    return out
