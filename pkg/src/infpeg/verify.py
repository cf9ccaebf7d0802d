"""Artifact export and independent re-verification.

Two artifact shapes are accepted: a plain trace
``{"graph", "base", "diff", "jumps"}`` and a strategy artifact carrying a
schedule, a claim, and the windows to check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

from .game import Board, IllegalJump, Jump, State, Trace, legal_moves, parse_base
from .golden import sign
from .graphs import GraphSpecError, Vertex, build, decode_vertex, encode_vertex, parse_window
from .schedule import (
    BlockFamily,
    HorizonExceeded,
    LimitUndefined,
    ScheduleError,
    TransfiniteSchedule,
    compress,
    phase_from_json,
)
from .strategies import Claim, StrategyError, StrategyResult, build_strategy
from .valuation import SigmaDist, jump_delta

PREFIX_LEN = 8


class ArtifactError(ValueError):
    """The artifact does not parse; ``where`` locates the offending field."""

    def __init__(self, where: str, message: str) -> None:
        self.where = where
        super().__init__(f"{where}: {message}")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerifyReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = "") -> Check:
        c = Check(name, passed, detail)
        self.checks.append(c)
        return c

    def first_failure(self) -> Check | None:
        return next((c for c in self.checks if not c.passed), None)

    def to_json(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }

    def lines(self) -> list[str]:
        out = [f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f": {c.detail}" if c.detail else "") for c in self.checks]
        out.append("RESULT " + ("PASS" if self.passed else "FAIL"))
        return out


# ---------------------------------------------------------------------------
# export / load


def export_artifact(res: StrategyResult, prefix_len: int = PREFIX_LEN) -> dict[str, Any]:
    sched = res.schedule
    prefix = []
    if sched.xi is not None:
        for p in sched.blocks:
            prefix.append([j.to_json() for j in p.prefix(prefix_len)])
    return {
        "graph": res.graph.spec,
        "initial": res.initial.to_json(),
        "schedule": sched.to_json(),
        "claim": res.claim.to_json(),
        "verify": {"windows": list(res.windows), "horizon": res.horizon},
        "strategy": {"name": res.name, "args": res.args},
        "prefix": prefix,
        "info": _json_info(res.info),
    }


def _json_info(info: dict[str, Any]) -> dict[str, Any]:
    out = {}
    for k, v in info.items():
        if isinstance(v, (list, tuple, set, frozenset)):
            out[k] = [encode_vertex(x) for x in v]
        else:
            out[k] = v
    return out


@dataclass
class LoadedArtifact:
    schedule: TransfiniteSchedule
    claim: Claim
    windows: list[str]
    horizon: int
    strategy: dict[str, Any] | None
    prefix: list[list[Jump]]
    info: dict[str, Any]


def load_artifact(data: dict[str, Any]) -> LoadedArtifact:
    try:
        g = build(data["graph"])
    except KeyError:
        raise ArtifactError("graph", "missing") from None
    except GraphSpecError as e:
        raise ArtifactError("graph", str(e)) from None
    try:
        init = data["initial"]
        s0 = State(parse_base(init["base"]), frozenset(decode_vertex(x) for x in init.get("diff", [])))
    except (KeyError, ValueError) as e:
        raise ArtifactError("initial", str(e)) from None
    sched_data = data.get("schedule")
    if not isinstance(sched_data, dict):
        raise ArtifactError("schedule", "missing")
    phases = sched_data.get("phases")
    try:
        if isinstance(phases, dict):
            if phases.get("kind") != "builtin-family":
                raise ArtifactError("schedule.phases", "expected a list or a builtin family")
            strat = data.get("strategy") or {}
            blocks: Any = build_strategy(strat["name"], strat.get("args", {})).schedule.blocks
            if not isinstance(blocks, BlockFamily):
                raise ArtifactError("schedule.phases", "builtin family does not rebuild to omega blocks")
        else:
            blocks = []
            for q, p in enumerate(phases or []):
                try:
                    blocks.append(phase_from_json(p))
                except (ScheduleError, StrategyError, KeyError, TypeError, ValueError) as e:
                    raise ArtifactError(f"schedule.phases[{q}]", str(e)) from None
        tail = [Jump.from_json(j) for j in sched_data.get("tail", [])]
    except (StrategyError, KeyError) as e:
        raise ArtifactError("schedule", str(e)) from None
    try:
        claim = Claim.from_json(data["claim"])
    except (KeyError, TypeError, ValueError) as e:
        raise ArtifactError("claim", str(e)) from None
    ver = data.get("verify", {})
    prefix = [[Jump.from_json(j) for j in blk] for blk in data.get("prefix", [])]
    return LoadedArtifact(
        TransfiniteSchedule(g, s0, blocks, tail),
        claim,
        list(ver.get("windows", [])),
        int(ver.get("horizon", 1000)),
        data.get("strategy"),
        prefix,
        data.get("info", {}),
    )


# ---------------------------------------------------------------------------
# verification


def _claim_check(art: LoadedArtifact, window: list[Vertex], pegs: frozenset, played: int) -> tuple[bool, str]:
    c = art.claim
    sched = art.schedule
    if c.kind == "CLEARABLE":
        return (not pegs, "window empty" if not pegs else f"pegs remain: {_fmt(pegs)}")
    if c.kind == "SOLVABLE":
        want = {c.survivor} & set(window)
        return (pegs == want, f"pegs {_fmt(pegs)}, expected {_fmt(want)}")
    if c.kind == "REACH":
        total = _finite_length(sched)
        ok = c.target in pegs and (c.jump_count is None or total == c.jump_count)
        return (ok, f"target pegged: {c.target in pegs}; jumps {total}, claimed {c.jump_count}")
    if c.kind == "SCENARIO":
        if c.name == "N-hole0":
            want = {x for x in window if isinstance(x, int) and x % 2 == 0}
            return (pegs == want, f"pegs {'are' if pegs == want else 'are not'} exactly the evens")
        holes = art.info.get("expect_holes")
        if holes is not None:
            want_holes = {decode_vertex(x) for x in holes}
            got = {x for x in window if x not in pegs}
            ok = got == want_holes & set(window)
            pegged = {decode_vertex(x) for x in art.info.get("expect_pegged", [])}
            ok = ok and pegged <= pegs
            return (ok, f"holes {_fmt(got)}, expected {_fmt(want_holes & set(window))}")
        return (True, "no scenario expectations recorded")
    return (False, f"unknown claim kind {c.kind}")


def _finite_length(sched: TransfiniteSchedule) -> int | None:
    if sched.xi is None:
        return None
    total = len(sched.tail)
    for p in sched.blocks:
        if p.length is None:
            return None
        total += p.length
    return total


def _fmt(vs: Iterable[Vertex], limit: int = 10) -> str:
    vs = sorted(vs)
    body = ", ".join(encode_vertex(v) for v in vs[:limit])
    return "{" + body + (", ..." if len(vs) > limit else "") + "}"


def _value_vertices(art: LoadedArtifact, window: list[Vertex]) -> list[Vertex]:
    c = art.claim
    cands = [c.hole, c.target, c.survivor, window[0], window[len(window) // 2], window[-1]]
    out = []
    for v in cands:
        if v is not None and v not in out and art.schedule.graph.contains(v):
            out.append(v)
    return out[:3]


def verify_artifact(
    data: dict[str, Any],
    windows: list[str] | None = None,
    horizon: int | None = None,
    value_steps: int = 1000,
    check_compressed: bool = True,
) -> VerifyReport:
    art = load_artifact(data)
    rep = VerifyReport()
    sched = art.schedule
    g = sched.graph

    # exported prefixes must match what the schedule actually generates
    ok = True
    for q, blk in enumerate(art.prefix):
        try:
            mine = sched.block(q).prefix(len(blk))
        except IndexError:
            mine = []
        for n, (a, b) in enumerate(zip(mine, blk)):
            if a != b:
                rep.add("prefix", False, f"block {q} jump {n}: schedule gives {a}, artifact says {b}")
                ok = False
                break
        if not ok:
            break
    if ok and art.prefix:
        rep.add("prefix", True, f"{sum(len(b) for b in art.prefix)} exported jumps match")

    windows = windows or art.windows
    horizon = horizon or art.horizon
    for spec in windows:
        try:
            window = parse_window(spec)
        except ValueError as e:
            raise ArtifactError("verify.windows", str(e)) from None
        try:
            res = sched.evaluate_window(window)
        except IllegalJump as e:
            rep.add(f"legality {spec}", False, f"illegal jump at index {e.index}: {e.reason}")
            continue
        except (LimitUndefined, HorizonExceeded) as e:
            rep.add(f"legality {spec}", False, str(e))
            continue
        rep.add(f"legality {spec}", True, f"{res.played} jumps replayed")
        passed, detail = _claim_check(art, window, res.pegs, res.played)
        rep.add(f"claim {art.claim.kind} {spec}", passed, detail)
        if check_compressed and (sched.xi is None or sched.xi > 1 or sched.tail):
            try:
                comp = compress(sched)
                cres = TransfiniteSchedule(g, sched.initial, [comp.phase]).evaluate_window(window)
                same = cres.pegs == res.pegs
                rep.add(f"compressed {spec}", same, f"omega-form agrees ({cres.played} jumps)" if same else "omega-form disagrees")
            except (IllegalJump, ScheduleError) as e:
                rep.add(f"compressed {spec}", False, str(e))

    if art.claim.kind == "SCENARIO" and art.claim.name == "N-hole0":
        rep.checks.append(_forced_check(sched, horizon))

    rep.checks.append(_monotonicity_check(art, parse_window(windows[0]) if windows else [], value_steps))
    return rep


def _forced_check(sched: TransfiniteSchedule, steps: int) -> Check:
    s = sched.initial
    phase = sched.block(0)
    for n in range(steps):
        moves = legal_moves(sched.graph, s)
        if len(moves) != 1 or moves[0] != phase.jump(n):
            return Check("forced moves", False, f"step {n + 1}: {len(moves)} legal moves")
        j = moves[0]
        s = s.set_pegs({j.u: False, j.v: False, j.w: True})
    return Check("forced moves", True, f"exactly one legal move at each of {steps} steps")


def _monotonicity_check(art: LoadedArtifact, window: list[Vertex], steps: int) -> Check:
    sched = art.schedule
    g = sched.graph
    try:
        if sched.xi == 1 and not sched.tail:
            phase = sched.block(0)
        else:
            phase = compress(sched).phase
        stop = steps if phase.length is None else min(steps, phase.length)
        board = Board(sched.initial)
        vs = _value_vertices(art, window) if window else [g.base_vertex]
        pags = [SigmaDist(g, v) for v in vs]
        for n in range(stop):
            j = phase.jump(n)
            board.play(g, j, index=n)
            for v, p in zip(vs, pags):
                if sign(jump_delta(p, j)) > 0:
                    return Check("value monotonicity", False, f"value at {encode_vertex(v)} rises at jump {n}")
    except (IllegalJump, ScheduleError) as e:
        return Check("value monotonicity", False, str(e))
    return Check("value monotonicity", True, f"{stop} jumps, vertices {', '.join(encode_vertex(v) for v in vs)}")


def verify_trace(data: dict[str, Any]) -> VerifyReport:
    rep = VerifyReport()
    try:
        g = build(data["graph"])
        s0 = State(parse_base(data["base"]), frozenset(decode_vertex(x) for x in data.get("diff", [])))
        jumps = [Jump.from_json(j) for j in data.get("jumps", [])]
    except (KeyError, ValueError) as e:
        raise ArtifactError("trace", str(e)) from None
    board = Board(s0)
    for i, j in enumerate(jumps):
        try:
            board.play(g, j, index=i)
        except IllegalJump as e:
            rep.add("legality", False, f"jump {i} ({j}): {e.reason}")
            return rep
    rep.add("legality", True, f"{len(jumps)} jumps")
    if "claim" in data:
        claim = Claim.from_json(data["claim"])
        final = board.to_state()
        if claim.kind == "REACH":
            rep.add("claim REACH", final.has_peg(claim.target), f"peg on {encode_vertex(claim.target)}")
    return rep


def verify(data: dict[str, Any], **kw) -> VerifyReport:
    if "jumps" in data and "schedule" not in data:
        return verify_trace(data)
    return verify_artifact(data, **kw)


def trace_to_json(t: Trace) -> dict[str, Any]:
    return t.to_json()
