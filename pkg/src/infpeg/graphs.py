"""Lazily enumerable, locally finite graphs.

Graphs are never materialized; each family answers ``neighbors(v)`` on
demand.  Families are built from a small textual DSL::

    ray | zray | fibtree | z-chord:<a>,<b> | z-chords:<k> | path:<n>
    | cycle:<n> | complete:<n> | prod(<spec>,<spec>) | grid:<k>

Vertices are ints, ``FibVertex(row, index)`` for the Fibonacci tree, and
tuples for products.  ``encode_vertex``/``decode_vertex`` give the text
codec (``-3``, ``r2.1``, ``(0,(1,2))``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Hashable, Iterable, Iterator, NamedTuple, Sequence

from .golden import fibonacci

Vertex = Hashable

DEFAULT_BUDGET = 10**6


class GraphSpecError(ValueError):
    def __init__(self, message: str, pos: int | None = None) -> None:
        self.pos = pos
        super().__init__(message if pos is None else f"{message} (at position {pos})")


class NotAVertex(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class FibVertex(NamedTuple):
    row: int
    index: int

    @property
    def marked(self) -> bool:
        return self.index % 2 == 0


# ---------------------------------------------------------------------------
# vertex codec


def encode_vertex(v: Vertex) -> str:
    if isinstance(v, FibVertex):
        return f"r{v.row}.{v.index}"
    if isinstance(v, tuple):
        return "(" + ",".join(encode_vertex(x) for x in v) + ")"
    if isinstance(v, int) and not isinstance(v, bool):
        return str(v)
    raise TypeError(f"cannot encode vertex {v!r}")


def decode_vertex(text: str) -> Vertex:
    text = text.strip()
    v, pos = _decode(text, 0)
    if pos != len(text):
        raise ValueError(f"trailing characters in vertex {text!r} at {pos}")
    return v


def _decode(s: str, i: int) -> tuple[Vertex, int]:
    if i >= len(s):
        raise ValueError(f"unexpected end of vertex text {s!r}")
    if s[i] == "(":
        items = []
        i += 1
        while True:
            v, i = _decode(s, i)
            items.append(v)
            if i < len(s) and s[i] == ",":
                i += 1
                continue
            if i < len(s) and s[i] == ")":
                return tuple(items), i + 1
            raise ValueError(f"malformed tuple vertex {s!r} at {i}")
    if s[i] == "r":
        j = i + 1
        while j < len(s) and s[j] not in ",)":
            j += 1
        row, _, idx = s[i + 1 : j].partition(".")
        try:
            return FibVertex(int(row), int(idx)), j
        except ValueError:
            raise ValueError(f"malformed tree vertex {s[i:j]!r}") from None
    j = i
    if j < len(s) and s[j] == "-":
        j += 1
    while j < len(s) and s[j].isdigit():
        j += 1
    try:
        return int(s[i:j]), j
    except ValueError:
        raise ValueError(f"malformed vertex {s!r} at {i}") from None


def vertex_key(v: Vertex):
    """Sort key realizing codec order (ints numerically, tuples lexicographically)."""
    return v


# ---------------------------------------------------------------------------
# layer descriptions


@dataclass(frozen=True)
class LayerForm:
    """Exact layer counts ``d_n`` from a fixed root, valid for every n.

    When ``degree`` is not None, ``count(n)`` agrees with a polynomial of that
    degree for all ``n >= poly_from``; this is what makes tails summable in
    closed form.  ``degree is None`` marks exponential families.
    """

    tag: str
    count: Callable[[int], int]
    poly_from: int | None
    degree: int | None

    @property
    def polynomial(self) -> bool:
        return self.degree is not None


@dataclass
class LayerTable:
    root: Vertex
    layers: list[list[Vertex]]
    counts: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.counts:
            self.counts = [len(layer) for layer in self.layers]


# ---------------------------------------------------------------------------
# graph families


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and not isinstance(v, FibVertex)


class Graph:
    """Base class: a connected, locally finite graph given by a neighbor oracle."""

    spec: str = "?"
    finite: bool = False
    locally_finite: bool = True

    def contains(self, v: Vertex) -> bool:
        raise NotImplementedError

    def _neighbors(self, v: Vertex) -> Sequence[Vertex]:
        raise NotImplementedError

    def neighbors(self, v: Vertex) -> tuple[Vertex, ...]:
        self.check(v)
        return tuple(sorted(set(self._neighbors(v))))

    def check(self, v: Vertex) -> None:
        if not self.contains(v):
            raise NotAVertex(f"{v!r} is not a vertex of {self.spec}")

    def adjacent(self, u: Vertex, v: Vertex) -> bool:
        return self.contains(u) and self.contains(v) and v in self._neighbors(u)

    def degree(self, v: Vertex) -> int:
        return len(self.neighbors(v))

    @property
    def base_vertex(self) -> Vertex:
        raise NotImplementedError

    def layer_form(self, root: Vertex) -> LayerForm | None:
        return None

    def metric(self, u: Vertex, v: Vertex) -> int | None:
        """Closed-form distance where the family has one; None otherwise."""
        return None

    def vertices(self) -> list[Vertex]:
        raise TypeError(f"{self.spec} is infinite")

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and other.spec == self.spec

    def __hash__(self) -> int:
        return hash(self.spec)

    def __repr__(self) -> str:
        return f"<Graph {self.spec}>"


class Ray(Graph):
    def __init__(self, spec: str = "ray") -> None:
        self.spec = spec

    def contains(self, v):
        return _is_int(v) and v >= 0

    def _neighbors(self, v):
        return (v - 1, v + 1) if v > 0 else (1,)

    @property
    def base_vertex(self):
        return 0

    def metric(self, u, v):
        return abs(u - v)

    def layer_form(self, root):
        self.check(root)
        r = root

        def count(n: int) -> int:
            if n == 0:
                return 1
            return 2 if n <= r else 1

        return LayerForm("ray", count, r + 1, 0)


class DoubleRay(Graph):
    def __init__(self, spec: str = "zray") -> None:
        self.spec = spec

    def contains(self, v):
        return _is_int(v)

    def _neighbors(self, v):
        return (v - 1, v + 1)

    @property
    def base_vertex(self):
        return 0

    def metric(self, u, v):
        return abs(u - v)

    def layer_form(self, root):
        self.check(root)
        return LayerForm("zray", lambda n: 1 if n == 0 else 2, 1, 0)


class ZChord(Graph):
    """The double ray plus the single extra edge {a, b}."""

    def __init__(self, a: int, b: int, spec: str | None = None) -> None:
        if a == b:
            raise GraphSpecError("chord endpoints must differ")
        self.a, self.b = a, b
        self.spec = spec or f"z-chord:{a},{b}"

    def contains(self, v):
        return _is_int(v)

    def _neighbors(self, v):
        out = [v - 1, v + 1]
        if v == self.a:
            out.append(self.b)
        elif v == self.b:
            out.append(self.a)
        return out

    @property
    def base_vertex(self):
        return 0

    def layer_form(self, root):
        self.check(root)
        # beyond the chord's reach only the two outer rays contribute
        n0 = max(abs(root - self.a), abs(root - self.b)) + 1
        prefix = bfs_layers(self, root, n0).counts

        def count(n: int) -> int:
            return prefix[n] if n < n0 else 2

        return LayerForm(self.spec, count, n0, 0)


class ZChords(Graph):
    """The double ray plus every edge {n, n+k} (k >= 2)."""

    def __init__(self, k: int, spec: str | None = None) -> None:
        if k < 2:
            raise GraphSpecError("z-chords needs k >= 2")
        self.k = k
        self.spec = spec or f"z-chords:{k}"

    def contains(self, v):
        return _is_int(v)

    def _neighbors(self, v):
        k = self.k
        return (v - k, v - 1, v + 1, v + k)

    @property
    def base_vertex(self):
        return 0

    def _residue_cost(self, r: int) -> int:
        return min(r, self.k + 1 - r)

    def metric(self, u, v):
        m = abs(u - v)
        q, r = divmod(m, self.k)
        return q + self._residue_cost(r)

    def layer_form(self, root):
        self.check(root)
        costs = [self._residue_cost(r) for r in range(self.k)]

        def count(n: int) -> int:
            if n == 0:
                return 1
            # one positive vertex per residue class r with cost(r) <= n
            return 2 * sum(1 for c in costs if c <= n)

        return LayerForm(self.spec, count, max(costs) + 1, 0)


class FibTree(Graph):
    """The tree whose root-distance layers follow the Fibonacci numbers.

    Row k holds 2**k vertices (k >= 1).  Every vertex (k, i) has the child
    (k+1, 2i); marked vertices (even index, root included) in rows k >= 1
    also carry an unmarked right neighbor (k, i+1), adjacent only to them
    and to its own child.
    """

    def __init__(self, spec: str = "fibtree") -> None:
        self.spec = spec

    def contains(self, v):
        if not isinstance(v, FibVertex):
            return False
        row, idx = v
        if row == 0:
            return idx == 0
        return row > 0 and 0 <= idx < 2**row

    def _neighbors(self, v):
        row, idx = v
        out = []
        if idx % 2 == 0:
            if row >= 1:
                out.append(FibVertex(row - 1, idx // 2))
                out.append(FibVertex(row, idx + 1))
        else:
            out.append(FibVertex(row, idx - 1))
        out.append(FibVertex(row + 1, 2 * idx))
        return out

    @property
    def base_vertex(self):
        return FibVertex(0, 0)

    @staticmethod
    def _up(v: FibVertex) -> FibVertex:
        row, idx = v
        return FibVertex(row, idx - 1) if idx % 2 else FibVertex(row - 1, idx // 2)

    @staticmethod
    def depth(v: FibVertex) -> int:
        # marked vertex: one edge above its tree parent; unmarked: one past its left neighbor
        row, idx = v
        return row + bin(idx).count("1")

    def metric(self, u, v):
        self.check(u)
        self.check(v)
        du, dv = self.depth(u), self.depth(v)
        steps = 0
        while du > dv:
            u, du, steps = self._up(u), du - 1, steps + 1
        while dv > du:
            v, dv, steps = self._up(v), dv - 1, steps + 1
        while u != v:
            u, v, steps = self._up(u), self._up(v), steps + 2
        return steps

    def layer_form(self, root):
        self.check(root)
        if root != self.base_vertex:
            return None
        return LayerForm("fibtree", lambda n: fibonacci(n + 1), None, None)


class _Finite(Graph):
    finite = True

    def __init__(self, n: int, spec: str) -> None:
        if n < 1:
            raise GraphSpecError(f"{spec}: need at least one vertex")
        self.n = n
        self.spec = spec

    def contains(self, v):
        return _is_int(v) and 0 <= v < self.n

    def vertices(self):
        return list(range(self.n))

    @property
    def base_vertex(self):
        return 0

    def layer_form(self, root):
        table = bfs_layers(self, root, self.n)
        counts = table.counts

        def count(n: int) -> int:
            return counts[n] if n < len(counts) else 0

        return LayerForm(self.spec, count, len(counts), 0)


class Path(_Finite):
    def __init__(self, n: int, spec: str | None = None) -> None:
        super().__init__(n, spec or f"path:{n}")

    def _neighbors(self, v):
        return [x for x in (v - 1, v + 1) if 0 <= x < self.n]

    def metric(self, u, v):
        return abs(u - v)


class Cycle(_Finite):
    def __init__(self, n: int, spec: str | None = None) -> None:
        if n < 3:
            raise GraphSpecError("cycle needs at least 3 vertices")
        super().__init__(n, spec or f"cycle:{n}")

    def _neighbors(self, v):
        return [(v - 1) % self.n, (v + 1) % self.n]

    def metric(self, u, v):
        d = abs(u - v)
        return min(d, self.n - d)


class Complete(_Finite):
    def __init__(self, n: int, spec: str | None = None) -> None:
        super().__init__(n, spec or f"complete:{n}")

    def _neighbors(self, v):
        return [x for x in range(self.n) if x != v]

    def metric(self, u, v):
        return 0 if u == v else 1


class Product(Graph):
    """Cartesian product of factor graphs; vertices are tuples.

    Two vertices are adjacent iff they differ in exactly one coordinate and
    are adjacent in that factor.
    """

    def __init__(self, factors: Sequence[Graph], spec: str | None = None) -> None:
        if len(factors) < 2:
            raise GraphSpecError("a product needs at least two factors")
        self.factors = tuple(factors)
        self.spec = spec or "prod(" + ",".join(f.spec for f in factors) + ")"
        self.finite = all(f.finite for f in factors)

    def contains(self, v):
        return (
            isinstance(v, tuple)
            and not isinstance(v, FibVertex)
            and len(v) == len(self.factors)
            and all(f.contains(x) for f, x in zip(self.factors, v))
        )

    def _neighbors(self, v):
        out = []
        for i, f in enumerate(self.factors):
            for y in f._neighbors(v[i]):
                out.append(v[:i] + (y,) + v[i + 1 :])
        return out

    @property
    def base_vertex(self):
        return tuple(f.base_vertex for f in self.factors)

    def vertices(self):
        if not self.finite:
            raise TypeError(f"{self.spec} is infinite")
        out = [()]
        for f in self.factors:
            out = [p + (x,) for p in out for x in f.vertices()]
        return out

    def metric(self, u, v):
        total = 0
        for f, a, b in zip(self.factors, u, v):
            d = f.metric(a, b)
            if d is None:
                return None
            total += d
        return total

    def fiber(self, coord: int, fixed: Vertex) -> Callable[[Vertex], Vertex]:
        """Embedding of factor ``coord`` with the remaining coordinates set to ``fixed``.

        For a binary product, ``fiber(0, h)`` embeds G as G_h and
        ``fiber(1, g)`` embeds H as H_g.
        """
        others = fixed if isinstance(fixed, tuple) and len(self.factors) > 2 else (fixed,)

        def embed(x: Vertex) -> Vertex:
            rest = list(others)
            rest.insert(coord, x)
            return tuple(rest)

        return embed

    def layer_form(self, root):
        self.check(root)
        forms = [f.layer_form(x) for f, x in zip(self.factors, root)]
        if any(fm is None or not fm.polynomial for fm in forms):
            return None
        n0 = sum(fm.poly_from for fm in forms)
        degree = sum(fm.degree for fm in forms) + len(forms) - 1
        counts = [fm.count for fm in forms]

        @lru_cache(maxsize=None)
        def count(n: int, i: int = len(counts) - 1) -> int:
            if i == 0:
                return counts[0](n)
            return sum(count(m, i - 1) * counts[i](n - m) for m in range(n + 1))

        return LayerForm(self.spec, lambda n: count(n), n0, degree)


def cartesian_product(g: Graph, h: Graph) -> Product:
    if not (g.locally_finite and h.locally_finite):
        raise ValueError("factors must be locally finite")
    return Product((g, h))


# ---------------------------------------------------------------------------
# DSL


class _Parser:
    def __init__(self, text: str) -> None:
        self.s = text
        self.i = 0

    def error(self, msg: str):
        raise GraphSpecError(msg, self.i)

    def eat(self, token: str) -> bool:
        if self.s.startswith(token, self.i):
            self.i += len(token)
            return True
        return False

    def expect(self, token: str) -> None:
        if not self.eat(token):
            self.error(f"expected {token!r}")

    def integer(self, signed: bool = False) -> int:
        j = self.i
        if signed and j < len(self.s) and self.s[j] == "-":
            j += 1
        k = j
        while k < len(self.s) and self.s[k].isdigit():
            k += 1
        if k == j:
            self.error("expected an integer")
        value = int(self.s[self.i : k])
        self.i = k
        return value

    def graph(self) -> Graph:
        start = self.i
        if self.eat("prod("):
            g = self.graph()
            self.expect(",")
            h = self.graph()
            self.expect(")")
            return Product((g, h), f"prod({g.spec},{h.spec})")
        if self.eat("z-chords:"):
            k = self.integer()
            return ZChords(k, f"z-chords:{k}")
        if self.eat("z-chord:"):
            a = self.integer(signed=True)
            self.expect(",")
            b = self.integer(signed=True)
            return ZChord(a, b, f"z-chord:{a},{b}")
        for name, cls in (("path:", Path), ("cycle:", Cycle), ("complete:", Complete)):
            if self.eat(name):
                n = self.integer()
                return cls(n, f"{name}{n}")
        if self.eat("grid:"):
            k = self.integer()
            if k < 1:
                self.error("grid dimension must be >= 1")
            if k == 1:
                return Ray("grid:1")
            return Product([Ray() for _ in range(k)], f"grid:{k}")
        # bare names last so that e.g. "zray" is not read as a prefix of something else
        for name, cls in (("zray", DoubleRay), ("ray", Ray), ("fibtree", FibTree)):
            if self.eat(name):
                return cls(name)
        self.i = start
        word = self.s[start:].split(",")[0].split(")")[0]
        self.error(f"unknown graph family {word!r}")


def build(spec: str) -> Graph:
    text = "".join(spec.split())
    if not text:
        raise GraphSpecError("empty graph spec", 0)
    p = _Parser(text)
    g = p.graph()
    if p.i != len(text):
        p.error("unexpected trailing input")
    return g


# ---------------------------------------------------------------------------
# traversal primitives


def bfs_layers(g: Graph, v: Vertex, n_max: int) -> LayerTable:
    g.check(v)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    layers = [[v]]
    seen = {v}
    frontier = [v]
    for _ in range(n_max):
        nxt = []
        for x in frontier:
            for y in g.neighbors(x):
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        nxt.sort()
        layers.append(nxt)
        frontier = nxt
    return LayerTable(v, layers)


def distance(g: Graph, u: Vertex, v: Vertex, budget: int = DEFAULT_BUDGET) -> int:
    """Shortest-path distance by bidirectional BFS.

    ``budget`` caps the number of visited vertices; hitting it raises
    ``BudgetExceeded`` (graphs are connected, so it only means the budget
    was too small).
    """
    g.check(u)
    g.check(v)
    if u == v:
        return 0
    dist_u, dist_v = {u: 0}, {v: 0}
    front_u, front_v = [u], [v]
    visited = 2
    while front_u and front_v:
        # expand the smaller frontier one whole layer
        if len(front_u) <= len(front_v):
            front, dist, other = front_u, dist_u, dist_v
        else:
            front, dist, other = front_v, dist_v, dist_u
        nxt = []
        best = None
        for x in front:
            for y in g.neighbors(x):
                if y in other:
                    cand = dist[x] + 1 + other[y]
                    best = cand if best is None else min(best, cand)
                if y not in dist:
                    dist[y] = dist[x] + 1
                    nxt.append(y)
                    visited += 1
                    if visited > budget:
                        raise BudgetExceeded(f"distance search exceeded budget of {budget} vertices")
        if best is not None:
            return best
        if front is front_u:
            front_u = nxt
        else:
            front_v = nxt
    raise BudgetExceeded("search exhausted without meeting; graph is disconnected")


class BFSEnumeration:
    """Lazy BFS order from ``start`` with ties broken in codec order.

    Every prefix induces a connected subgraph, and every vertex of a
    connected locally finite graph eventually appears.
    """

    def __init__(self, g: Graph, start: Vertex, budget: int = DEFAULT_BUDGET) -> None:
        g.check(start)
        self.g = g
        self.order: list[Vertex] = [start]
        self.index_of: dict[Vertex, int] = {start: 0}
        self.parent_index: list[int] = [-1]
        self._cursor = 0
        self.budget = budget

    def _grow(self) -> bool:
        if self._cursor >= len(self.order):
            return False
        x = self.order[self._cursor]
        for y in self.g.neighbors(x):
            if y not in self.index_of:
                self.index_of[y] = len(self.order)
                self.order.append(y)
                self.parent_index.append(self._cursor)
        self._cursor += 1
        return True

    def __getitem__(self, i: int) -> Vertex:
        while len(self.order) <= i:
            if not self._grow():
                raise IndexError(i)
            if len(self.order) > self.budget:
                raise BudgetExceeded("enumeration budget exceeded")
        return self.order[i]

    def index(self, v: Vertex) -> int:
        self.g.check(v)
        while v not in self.index_of:
            if not self._grow():
                raise NotAVertex(f"{v!r} not reachable from {self.order[0]!r}")
            if len(self.order) > self.budget:
                raise BudgetExceeded("enumeration budget exceeded")
        return self.index_of[v]

    def prefix(self, count: int) -> list[Vertex]:
        if count > 0:
            try:
                self[count - 1]
            except IndexError:
                pass
        return self.order[:count]

    def __iter__(self) -> Iterator[Vertex]:
        i = 0
        while True:
            try:
                yield self[i]
            except IndexError:
                return
            i += 1


def ball(g: Graph, v: Vertex, radius: int) -> list[Vertex]:
    return [x for layer in bfs_layers(g, v, radius).layers for x in layer]


def parse_window(text: str) -> list[Vertex]:
    """Window SPEC: ``int:a..b``, ``prod:a..b,c..d`` or ``fib:rows<=k``."""
    kind, _, body = text.partition(":")

    def rng(part: str) -> range:
        lo, sep, hi = part.partition("..")
        if not sep:
            raise ValueError(f"bad range {part!r}")
        return range(int(lo), int(hi) + 1)

    if kind == "int":
        return list(rng(body))
    if kind == "prod":
        a, b = _split_ranges(body)
        return [(x, y) for x in rng(a) for y in rng(b)]
    if kind == "fib":
        if not body.startswith("rows<="):
            raise ValueError(f"bad fib window {text!r}")
        k = int(body[len("rows<="):])
        return [FibVertex(0, 0)] + [FibVertex(r, i) for r in range(1, k + 1) for i in range(2**r)]
    raise ValueError(f"unknown window kind {kind!r}")


def _split_ranges(body: str) -> tuple[str, str]:
    # "a..b,c..d" where a..d may be negative
    parts = body.split(",")
    if len(parts) != 2:
        raise ValueError(f"bad product window {body!r}")
    return parts[0], parts[1]


def encode_window(vertices: Iterable[Vertex]) -> list[str]:
    return [encode_vertex(v) for v in vertices]


def describe(g: Graph) -> dict[str, Any]:
    return {"spec": g.spec, "finite": g.finite}
