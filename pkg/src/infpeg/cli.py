"""Command-line interface.

Exit codes: 0 pass, 1 verification failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from typing import Any

from .game import IllegalJump, Jump, State, apply_sequence, parse_base
from .graphs import GraphSpecError, bfs_layers, build, decode_vertex, encode_vertex, parse_window
from .oracle import brute_force
from .schedule import ScheduleError, compress
from .strategies import STRATEGIES, StrategyError, build_strategy
from .valuation import (
    GrowthViolation,
    NotCertifiable,
    certify_growth,
    unreachable_threshold,
    valued_verdict,
)
from .verify import ArtifactError, export_artifact, load_artifact, verify

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(obj: Any) -> None:
    print(json.dumps(obj, indent=2))


def _read_json(path: str) -> Any:
    try:
        with open(path) if path != "-" else sys.stdin as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read {path}: {e}") from None


def _vertex(text: str):
    try:
        return decode_vertex(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


# ---------------------------------------------------------------------------
# commands


def cmd_layers(args) -> int:
    g = build(args.graph)
    v = _vertex(args.vertex)
    table = bfs_layers(g, v, args.n_max)
    if args.csv:
        w = csv.writer(sys.stdout)
        w.writerow(["n", "d_n"])
        for n, d in enumerate(table.counts):
            w.writerow([n, d])
    else:
        _emit({"graph": g.spec, "root": encode_vertex(v), "counts": table.counts})
    return EXIT_PASS


def cmd_simulate(args) -> int:
    data = _read_json(args.file)
    if "schedule" in data:
        art = load_artifact(data)
        spec = args.window or (art.windows[0] if art.windows else None)
        if spec is None:
            raise UsageError("no window given")
        window = parse_window(spec)
        try:
            res = art.schedule.evaluate_window(window, horizon=args.horizon or 10**5)
        except IllegalJump as e:
            print(f"illegal jump at index {e.index}: {e.reason}", file=sys.stderr)
            return EXIT_FAIL
        _emit({"window": spec, "jumps_replayed": res.played, "pegs": [encode_vertex(x) for x in sorted(res.pegs)]})
        return EXIT_PASS
    g = build(data["graph"])
    s0 = State(parse_base(data["base"]), frozenset(decode_vertex(x) for x in data.get("diff", [])))
    jumps = [Jump.from_json(j) for j in data.get("jumps", [])]
    if args.horizon is not None:
        jumps = jumps[: args.horizon]
    try:
        t = apply_sequence(g, s0, jumps)
    except IllegalJump as e:
        print(f"illegal jump at index {e.index}: {e.reason}", file=sys.stderr)
        return EXIT_FAIL
    out: dict[str, Any] = {"graph": g.spec, "jumps_replayed": len(t.jumps), "final": t.final.to_json()}
    if args.window:
        window = parse_window(args.window)
        out["window"] = args.window
        out["pegs"] = [encode_vertex(x) for x in window if t.final.has_peg(x)]
    _emit(out)
    return EXIT_PASS


def cmd_certify(args) -> int:
    g = build(args.graph)
    v = _vertex(args.vertex)
    if args.kind == "unreachable":
        cert = certify_growth(g, v, Fraction(args.epsilon), Fraction(args.C), args.N)
        if isinstance(cert, GrowthViolation):
            _emit({"verdict": "growth bound violated", "n": cert.n, "d_n": cert.d_n})
            return EXIT_FAIL
        try:
            proof = unreachable_threshold(g, v, cert)
        except NotCertifiable as e:
            _emit({"verdict": "not certifiable", "reason": str(e), "certificate": cert.to_json()})
            return EXIT_FAIL
        _emit(proof.to_json())
        return EXIT_PASS
    try:
        verdict = valued_verdict(g, v, Fraction(args.bound))
    except NotCertifiable as e:
        _emit({"verdict": "not certifiable", "reason": str(e)})
        return EXIT_FAIL
    _emit(verdict.to_json())
    return EXIT_PASS if verdict.valued else EXIT_FAIL


def _parse_params(items: list[str]) -> dict[str, Any]:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"strategy parameter {item!r} is not key=value")
        try:
            out[key] = json.loads(val)
        except json.JSONDecodeError:
            out[key] = val
    return out


def cmd_strategy(args) -> int:
    try:
        res = build_strategy(args.name, _parse_params(args.params))
    except TypeError as e:
        raise UsageError(str(e)) from None
    art = export_artifact(res)
    if args.export:
        with open(args.export, "w") as fh:
            json.dump(art, fh, indent=2)
        print(f"wrote {args.export}")
    else:
        _emit(art)
    return EXIT_PASS


def _enumeration(spec: str):
    if spec == "default":
        return None
    data = _read_json(spec)
    if not isinstance(data, list) or not all(isinstance(x, int) for x in data):
        raise UsageError("enumeration file must hold a JSON list of integers")
    return data


def cmd_compress(args) -> int:
    art = load_artifact(_read_json(args.file))
    a = _enumeration(args.enum)
    res = compress(art.schedule, a, horizon=args.horizon)
    n = args.jumps
    jumps = [res.phase.jump(i).to_json() for i in range(n)]
    out: dict[str, Any] = {
        "graph": art.schedule.graph.spec,
        "initial": art.schedule.initial.to_json(),
        "xi_in": art.schedule.xi_text,
        "tail_in": len(art.schedule.tail),
        "omega_prefix": jumps,
        "tail_insertions": res.insertions,
    }
    if res.witness is not None:
        out["witness"] = res.witness.to_json(limit=n)
    _emit(out)
    return EXIT_PASS


def cmd_oracle(args) -> int:
    g = build(args.graph)
    holes = [_vertex(x) for x in args.holes.split(";")] if args.holes else []
    window = parse_window(args.window) if args.window else None
    s0 = State(parse_base("FULL"), frozenset(holes))
    res = brute_force(g, s0, window, max_states=args.max_states, max_depth=args.max_depth)
    _emit(res.to_json())
    return EXIT_PASS


def cmd_verify(args) -> int:
    data = _read_json(args.file)
    kw = {}
    if args.window:
        kw["windows"] = args.window
    if args.horizon:
        kw["horizon"] = args.horizon
    rep = verify(data, **kw) if "schedule" in data else verify(data)
    if args.json:
        _emit(rep.to_json())
    else:
        print("\n".join(rep.lines()))
    return EXIT_PASS if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="infpeg", description="Peg solitaire on infinite graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("layers", help="BFS layer counts d_n")
    s.add_argument("graph")
    s.add_argument("vertex")
    s.add_argument("--n-max", type=int, default=10)
    s.add_argument("--csv", action="store_true")
    s.set_defaults(func=cmd_layers)

    s = sub.add_parser("simulate", help="replay a trace or artifact")
    s.add_argument("file")
    s.add_argument("--window")
    s.add_argument("--horizon", type=int)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("certify", help="unreachability thresholds and valued-graph verdicts")
    s.add_argument("kind", choices=["unreachable", "valued"])
    s.add_argument("graph")
    s.add_argument("vertex")
    s.add_argument("--epsilon", default="1/2")
    s.add_argument("--C", default="2")
    s.add_argument("--N", type=int, default=50)
    s.add_argument("--bound", default="100", help="partial-sum bound for divergence witnesses")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("strategy", help="build and export a strategy artifact")
    s.add_argument("name", choices=sorted(STRATEGIES))
    s.add_argument("params", nargs="*", help="key=value (values parsed as JSON when possible)")
    s.add_argument("--export")
    s.set_defaults(func=cmd_strategy)

    s = sub.add_parser("compress", help="rewrite an artifact's schedule as an omega-schedule")
    s.add_argument("file")
    s.add_argument("--enum", default="default")
    s.add_argument("--horizon", type=int, default=100_000)
    s.add_argument("--jumps", type=int, default=50, help="number of output jumps to print")
    s.set_defaults(func=cmd_compress)

    s = sub.add_parser("oracle", help="exhaustive search on a finite board")
    s.add_argument("graph")
    s.add_argument("--holes", help="semicolon-separated vertices")
    s.add_argument("--window")
    s.add_argument("--max-states", type=int, default=1_000_000)
    s.add_argument("--max-depth", type=int)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("verify", help="re-verify an exported artifact or trace")
    s.add_argument("file")
    s.add_argument("--window", action="append")
    s.add_argument("--horizon", type=int)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_PASS
    try:
        return args.func(args)
    except (UsageError, GraphSpecError, ArtifactError, StrategyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ScheduleError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
