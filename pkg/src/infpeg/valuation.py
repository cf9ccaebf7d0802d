"""Pagoda values of peg states.

The workhorse is the distance pagoda ``sigma**d(u, root)``.  State values
are exact elements of Q(phi) whenever the layer counts of the graph have a
declared polynomial closed form; otherwise they are bracketed using a
growth certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Iterator, Union

from .game import EMPTY, FULL, Jump, Pred, State, apply
from .golden import (
    ONE,
    ZERO,
    GoldenNum,
    approx,
    decimal_str,
    phi_pow,
    rational_root_upper,
    sigma_pow,
    sign,
)
from .graphs import DEFAULT_BUDGET, BudgetExceeded, Graph, LayerForm, Ray, Vertex, encode_vertex


class NotCertifiable(ValueError):
    pass


class MonotonicityError(AssertionError):
    """A legal jump increased a distance-pagoda value (cannot happen mathematically)."""


# ---------------------------------------------------------------------------
# pagodas


class DistanceMap:
    """Distances from a fixed root, grown by BFS on demand."""

    def __init__(self, g: Graph, root: Vertex, budget: int = DEFAULT_BUDGET) -> None:
        g.check(root)
        self.g = g
        self.root = root
        self.dist = {root: 0}
        self.frontier = [root]
        self.radius = 0
        self.budget = budget

    def grow(self) -> None:
        nxt = []
        for x in self.frontier:
            for y in self.g.neighbors(x):
                if y not in self.dist:
                    self.dist[y] = self.radius + 1
                    nxt.append(y)
        self.frontier = nxt
        self.radius += 1
        if len(self.dist) > self.budget:
            raise BudgetExceeded(f"distance map from {self.root!r} exceeded {self.budget} vertices")

    def __call__(self, u: Vertex) -> int:
        while u not in self.dist:
            if not self.frontier:
                raise ValueError(f"{u!r} unreachable from {self.root!r}")
            self.grow()
        return self.dist[u]


class SigmaDist:
    """The pagoda ``u -> sigma**d(u, root)``."""

    kind = "SIGMA_DIST"

    def __init__(self, g: Graph, root: Vertex, use_metric: bool = True) -> None:
        self.g = g
        self.root = root
        self._bfs = DistanceMap(g, root)
        self._use_metric = use_metric

    def distance(self, u: Vertex) -> int:
        if self._use_metric:
            d = self.g.metric(u, self.root)
            if d is not None:
                return d
        return self._bfs(u)

    def __call__(self, u: Vertex) -> GoldenNum:
        return sigma_pow(self.distance(u))


class TablePagoda:
    kind = "TABLE"

    def __init__(self, table: dict[Vertex, GoldenNum], default: GoldenNum | int = 0) -> None:
        self.table = {k: GoldenNum.coerce(v) for k, v in table.items()}
        self.default = GoldenNum.coerce(default)

    def __call__(self, u: Vertex) -> GoldenNum:
        return self.table.get(u, self.default)


Pagoda = Union[SigmaDist, TablePagoda]


@dataclass
class PagodaVerdict:
    passed: bool
    checked: int
    witness: tuple[Vertex, Vertex, Vertex] | None = None
    equalities: list[tuple[Vertex, Vertex, Vertex]] = field(default_factory=list)


def pagoda_check(g: Graph, p: Pagoda, root: Vertex, radius: int) -> PagodaVerdict:
    """Check ``p(a) <= p(b) + p(c)`` on every ordered 3-vertex path a-b-c
    with all three vertices within ``radius`` of ``root``."""
    if radius < 2:
        raise ValueError("radius must be >= 2")
    from .graphs import ball

    inside = set(ball(g, root, radius))
    checked = 0
    equalities = []
    for b in sorted(inside):
        nbrs = [x for x in g.neighbors(b) if x in inside]
        for a in nbrs:
            for c in nbrs:
                if a == c:
                    continue
                checked += 1
                s = sign(p(b) + p(c) - p(a))
                if s < 0:
                    return PagodaVerdict(False, checked, (a, b, c), equalities)
                if s == 0:
                    equalities.append((a, b, c))
    return PagodaVerdict(True, checked, None, equalities)


def aligned(p: SigmaDist, path: tuple[Vertex, Vertex, Vertex]) -> bool:
    a, b, c = (p.distance(x) for x in path)
    return a + 2 == b + 1 == c


# ---------------------------------------------------------------------------
# layer sums


def poly_tail(form: LayerForm, k: int) -> GoldenNum:
    """``sum_{n>=k} d_n sigma^n`` for ``k >= form.poly_from``.

    Writes ``d_{k+m}`` in the binomial basis via forward differences and
    uses ``sum_m C(m, j) sigma^m = sigma^j / (1 - sigma)^(j+1) = phi^(j+2)``.
    """
    if not form.polynomial or k < form.poly_from:
        raise ValueError("closed-form tail needs a polynomial layer form beyond poly_from")
    vals = [form.count(k + i) for i in range(form.degree + 1)]
    total = ZERO
    j = 0
    while vals:
        total = total + vals[0] * phi_pow(j + 2)
        vals = [b - a for a, b in zip(vals, vals[1:])]
        j += 1
    return sigma_pow(k) * total


def layer_tail(form: LayerForm, k: int) -> GoldenNum:
    """Exact ``sum_{n>=k} d_n sigma^n`` from a polynomial layer form."""
    if not form.polynomial:
        raise NotCertifiable(f"layers of {form.tag} grow exponentially; the tail diverges")
    head = ZERO
    n = k
    while n < form.poly_from:
        head = head + form.count(n) * sigma_pow(n)
        n += 1
    return head + poly_tail(form, n)


def full_value(g: Graph, root: Vertex) -> GoldenNum:
    form = g.layer_form(root)
    if form is None:
        raise NotCertifiable(f"{g.spec} declares no layer closed form from {root!r}")
    return layer_tail(form, 0)


def iter_layer_counts(g: Graph, root: Vertex) -> Iterator[int]:
    seen = {root}
    frontier = [root]
    while frontier:
        yield len(frontier)
        nxt = []
        for x in frontier:
            for y in g.neighbors(x):
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    while True:
        yield 0


# ---------------------------------------------------------------------------
# growth certificates


@dataclass(frozen=True)
class GrowthCertificate:
    graph: str
    root: Vertex
    epsilon: Fraction
    C: Fraction
    n0: int
    checked_to: int
    closed_form_tag: str | None = None

    @property
    def prefix_only(self) -> bool:
        return self.closed_form_tag is None

    def to_json(self) -> dict[str, Any]:
        return {
            "graph": self.graph,
            "root": encode_vertex(self.root),
            "epsilon": str(self.epsilon),
            "C": str(self.C),
            "n0": self.n0,
            "checked_to": self.checked_to,
            "closed_form_tag": self.closed_form_tag,
            "coverage": "prefix-only" if self.prefix_only else "all n (closed form)",
        }


@dataclass(frozen=True)
class GrowthViolation:
    n: int
    d_n: int


def within_growth_bound(d: int, n: int, epsilon: Fraction, C: Fraction) -> bool:
    """Exact test of ``d <= C * phi**(epsilon*n)``.

    With ``epsilon = p/q`` this is ``(d/C)**q <= phi**(p*n)``.
    """
    p, q = epsilon.numerator, epsilon.denominator
    lhs = (Fraction(d) / C) ** q
    return sign(phi_pow(p * n) - lhs) >= 0


def certify_growth(
    g: Graph, root: Vertex, epsilon, C, N: int
) -> GrowthCertificate | GrowthViolation:
    epsilon, C = Fraction(epsilon), Fraction(C)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if C <= 0:
        raise ValueError("C must be positive")
    form = g.layer_form(root)
    form_ok = form is not None and form.polynomial
    counts = iter_layer_counts(g, root)
    for n in range(N + 1):
        d = next(counts)
        if not within_growth_bound(d, n, epsilon, C):
            return GrowthViolation(n, d)
        if form_ok and form.count(n) != d:
            form_ok = False
    tag = form.tag if form_ok else None
    return GrowthCertificate(g.spec, root, epsilon, C, 0, N, tag)


def certified_tail_bound(cert: GrowthCertificate, start: int) -> Fraction:
    """Rational upper bound on ``sum_{n>=start} C phi^(eps n) sigma^n``.

    The ratio ``sigma**(1-eps)`` is irrational in general; it is replaced by
    a rational upper bound found with exact comparisons.
    """
    gap = 1 - cert.epsilon
    x = rational_root_upper(sigma_pow(gap.numerator), gap.denominator)
    if x >= 1:
        raise NotCertifiable("ratio bound not below 1")
    return cert.C * x**start / (1 - x)


@dataclass
class ThresholdProof:
    graph: str
    vertex: Vertex
    k: int
    tail_k: GoldenNum
    tail_prev: GoldenNum | None
    certificate: GrowthCertificate

    def to_json(self) -> dict[str, Any]:
        return {
            "graph": self.graph,
            "vertex": encode_vertex(self.vertex),
            "k": self.k,
            "tail_k": self.tail_k.to_json(),
            "tail_k_decimal": decimal_str(self.tail_k),
            "tail_prev": None if self.tail_prev is None else self.tail_prev.to_json(),
            "tail_prev_decimal": None if self.tail_prev is None else decimal_str(self.tail_prev),
            "claim": "no initial state outside the ball of radius k-1 can ever peg the vertex",
            "certificate": self.certificate.to_json(),
        }


def unreachable_threshold(g: Graph, v: Vertex, cert: GrowthCertificate, k_max: int = 100_000) -> ThresholdProof:
    """Smallest k with ``sum_{n>=k} d_n(v) sigma^n < 1``, decided exactly."""
    if isinstance(cert, GrowthViolation):
        raise NotCertifiable(f"growth bound fails at n={cert.n}")
    if cert.prefix_only:
        raise NotCertifiable("certificate only covers a finite prefix; it cannot bound an infinite tail")
    if cert.root != v:
        raise ValueError("certificate root does not match the vertex")
    form = g.layer_form(v)
    prev = None
    for k in range(k_max + 1):
        t = layer_tail(form, k)
        if sign(t - ONE) < 0:
            return ThresholdProof(g.spec, v, k, t, prev, cert)
        prev = t
    raise RuntimeError(f"no threshold found below {k_max}")


# ---------------------------------------------------------------------------
# state values


@dataclass(frozen=True)
class ValueResult:
    lower: GoldenNum
    upper: GoldenNum
    exact: GoldenNum | None = None
    conditional: bool = False  # bound relies on a prefix-only growth certificate

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")
        if self.exact is not None and not (self.lower <= self.exact <= self.upper):
            raise ValueError("exact value outside bounds")

    @classmethod
    def of(cls, x: GoldenNum) -> ValueResult:
        return cls(x, x, x)


def _ray_pred_value(root: int, pred: Pred) -> GoldenNum | None:
    """Exact ``sum_{x>=0, pred(x)} sigma^|x-root|`` for the parity predicates."""
    name = pred.pred_name
    if name not in ("evens", "odds", "odd-or-zero"):
        return None
    parity = 0 if name == "evens" else 1
    head = ZERO
    for x in range(root):
        if pred.contains(x):
            head = head + sigma_pow(root - x)
    first = root if root % 2 == parity else root + 1
    tail = sigma_pow(first - root) / (ONE - sigma_pow(2))
    extra = ZERO
    if name == "odd-or-zero" and root == 0:
        extra = ONE  # vertex 0 itself, even, not counted by the odd tail
    return head + tail + extra


def _bounded_value(g: Graph, p: SigmaDist, s: State, cert: GrowthCertificate | None, depth: int) -> ValueResult:
    form = g.layer_form(p.root)
    exact_tail = form is not None and form.polynomial
    if not exact_tail and cert is None:
        raise NotCertifiable("value not certifiable: no layer closed form and no growth certificate")
    N = cert.checked_to if (cert is not None and not exact_tail) else depth
    lower = ZERO
    seen = {p.root}
    frontier = [p.root]
    for n in range(N + 1):
        for x in frontier:
            if s.has_peg(x):
                lower = lower + sigma_pow(n)
        nxt = []
        for x in frontier:
            for y in g.neighbors(x):
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    if exact_tail:
        return ValueResult(lower, lower + layer_tail(form, N + 1))
    tail = GoldenNum(certified_tail_bound(cert, N + 1))
    return ValueResult(lower, lower + tail, conditional=cert.prefix_only)


def state_value(
    g: Graph, p: SigmaDist, s: State, cert: GrowthCertificate | None = None, depth: int = 40
) -> ValueResult:
    """``val_root(s) = sum_{u in s} sigma^d(u, root)``, exact or bracketed."""
    if not isinstance(p, SigmaDist):
        raise TypeError("state_value needs a distance pagoda")
    diff_sum = ZERO
    for x in s.diff:
        diff_sum = diff_sum + p(x)
    if s.base is EMPTY:
        return ValueResult.of(diff_sum)
    if s.base is FULL:
        form = g.layer_form(p.root)
        if form is not None and form.polynomial:
            return ValueResult.of(layer_tail(form, 0) - diff_sum)
        return _bounded_value(g, p, s, cert, depth)
    if isinstance(s.base, Pred) and isinstance(g, Ray):
        base_val = _ray_pred_value(p.root, s.base)
        if base_val is not None:
            signed = ZERO
            for x in s.diff:
                signed = signed + (-p(x) if s.base.contains(x) else p(x))
            return ValueResult.of(base_val + signed)
    return _bounded_value(g, p, s, cert, depth)


def jump_delta(p: Pagoda, j: Jump) -> GoldenNum:
    return p(j.w) - p(j.u) - p(j.v)


# ---------------------------------------------------------------------------
# valued graphs


@dataclass
class TransferBound:
    w: Vertex
    v: Vertex
    k: int
    bound: GoldenNum
    head: GoldenNum


def valued_transfer(g: Graph, w: Vertex, cert: GrowthCertificate | GrowthViolation, v: Vertex) -> TransferBound:
    """Upper bound on ``val_v(V)`` from summability at ``w``.

    Uses ``d_n(v) <= sum_{i=-k}^{k} d_{n+i}(w)`` for ``n >= k = d(v, w)``,
    which after reindexing gives
    ``val_v(V) <= sum_{n<k} d_n(v) sigma^n + sum_{i=0}^{2k} sigma^(k-i) T_w(i)``
    with ``T_w(i) = sum_{m>=i} d_m(w) sigma^m``.
    """
    if isinstance(cert, GrowthViolation):
        raise NotCertifiable(f"no valid certificate at {w!r}: growth bound fails at n={cert.n}")
    if cert.prefix_only:
        raise NotCertifiable("no valid certificate: prefix-only bounds cannot certify a valued graph")
    from .graphs import bfs_layers, distance

    form = g.layer_form(w)
    k = g.metric(v, w)
    if k is None:
        k = distance(g, v, w)
    head = ZERO
    counts = bfs_layers(g, v, max(k - 1, 0)).counts
    for n in range(k):
        head = head + counts[n] * sigma_pow(n)
    body = ZERO
    for i in range(2 * k + 1):
        body = body + phi_pow(i - k) * layer_tail(form, i)
    return TransferBound(w, v, k, head + body, head)


@dataclass
class DivergenceWitness:
    root: Vertex
    bound: Fraction
    N: int
    partial_sum: GoldenNum
    counts_source: str


def divergence_witness(g: Graph, root: Vertex, bound, n_limit: int = 10_000) -> DivergenceWitness:
    """First N with ``sum_{n<=N} d_n sigma^n > bound``."""
    bound = Fraction(bound)
    form = g.layer_form(root)
    if form is not None:
        counts: Iterable[int] = (form.count(n) for n in range(n_limit + 1))
        source = f"layer form {form.tag}"
    else:
        counts = iter_layer_counts(g, root)
        source = "BFS"
    total = ZERO
    for n, d in zip(range(n_limit + 1), counts):
        total = total + d * sigma_pow(n)
        if sign(total - GoldenNum(bound)) > 0:
            return DivergenceWitness(root, bound, n, total, source)
    raise NotCertifiable(f"partial sums stay below {bound} up to n={n_limit}")


@dataclass
class ValuedVerdict:
    graph: str
    vertex: Vertex
    valued: bool
    full_value: GoldenNum | None = None
    witness: DivergenceWitness | None = None
    tag: str | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"graph": self.graph, "vertex": encode_vertex(self.vertex), "valued": self.valued}
        if self.full_value is not None:
            out["full_value"] = self.full_value.to_json()
            out["full_value_decimal"] = decimal_str(self.full_value)
            out["closed_form"] = self.tag
        if self.witness is not None:
            out["divergence"] = {
                "bound": str(self.witness.bound),
                "N": self.witness.N,
                "partial_sum": self.witness.partial_sum.to_json(),
                "partial_sum_decimal": decimal_str(self.witness.partial_sum),
                "counts": self.witness.counts_source,
            }
        return out


def valued_verdict(g: Graph, v: Vertex, divergence_bound=100) -> ValuedVerdict:
    form = g.layer_form(v)
    if form is not None and form.polynomial:
        return ValuedVerdict(g.spec, v, True, full_value=layer_tail(form, 0), tag=form.tag)
    if form is not None:
        return ValuedVerdict(g.spec, v, False, witness=divergence_witness(g, v, divergence_bound))
    raise NotCertifiable(f"{g.spec} declares no layer form from {v!r}; supply a certificate")


# ---------------------------------------------------------------------------
# value monotonicity along play


@dataclass
class ConvergenceReport:
    vertex: Vertex
    deltas: list[GoldenNum]
    values: list[GoldenNum] | None
    steps: int
    first_within_tol: int | None = None

    @property
    def strictly_decreasing_steps(self) -> int:
        return sum(1 for d in self.deltas if sign(d) < 0)


def value_convergence_check(
    g: Graph,
    v: Vertex,
    s0: State,
    jumps: Iterable[Jump],
    horizon: int,
    limit_value: GoldenNum | None = None,
    tol: Fraction | None = None,
    initial_value: GoldenNum | None = None,
    check_legality: bool = True,
) -> ConvergenceReport:
    """Replay up to ``horizon`` jumps and verify ``val_v`` never increases.

    Every delta ``sigma^d(w) - sigma^d(u) - sigma^d(jumped)`` is checked for
    exact non-positivity.  When the initial value is known the running
    values are reported, and if ``limit_value`` and ``tol`` are given the
    first step within ``tol`` of the limit is recorded.
    """
    p = SigmaDist(g, v)
    if initial_value is None:
        try:
            r = state_value(g, p, s0)
            initial_value = r.exact
        except NotCertifiable:
            initial_value = None
    deltas = []
    values = [initial_value] if initial_value is not None else None
    first = None
    if values is not None and limit_value is not None and tol is not None:
        if _close(values[0], limit_value, tol):
            first = 0
    s = s0
    n = 0
    for n, j in enumerate(jumps):
        if n >= horizon:
            n -= 1
            break
        if check_legality:
            s = apply(g, s, j, index=n)
        d = jump_delta(p, j)
        if sign(d) > 0:
            raise MonotonicityError(f"value of {v!r} increased at jump {n} ({j}): delta {d}")
        deltas.append(d)
        if values is not None:
            values.append(values[-1] + d)
            if first is None and limit_value is not None and tol is not None and _close(values[-1], limit_value, tol):
                first = n + 1
    return ConvergenceReport(v, deltas, values, len(deltas), first)


def _close(x: GoldenNum, y: GoldenNum, tol: Fraction) -> bool:
    iv = approx(x - y, tol / 4)
    return max(abs(iv.lo), abs(iv.hi)) < tol
