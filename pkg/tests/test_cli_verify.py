"""Artifact export/verify round trips and the command-line interface."""

import copy
import json

import pytest

from infpeg.cli import main
from infpeg.game import Jump, apply_sequence, full_minus
from infpeg.graphs import build
from infpeg.strategies import build_strategy
from infpeg.verify import ArtifactError, export_artifact, load_artifact, verify, verify_artifact


@pytest.fixture(scope="module")
def ray_clear_artifact():
    return export_artifact(build_strategy("ray_clear"))


def test_ray_clear_artifact_passes(ray_clear_artifact):
    rep = verify(json.loads(json.dumps(ray_clear_artifact)))
    assert rep.passed, rep.lines()
    names = [c.name for c in rep.checks]
    assert "prefix" in names
    assert any(n.startswith("claim CLEARABLE") for n in names)
    assert "value monotonicity" in names


def test_trace_tamper_fails_at_that_index():
    jumps = [Jump(3, 2, 1), Jump(5, 4, 3), Jump(7, 6, 5)]
    data = apply_sequence(build("ray"), full_minus(1), jumps).to_json()
    assert verify(data).passed
    bad = copy.deepcopy(data)
    bad["jumps"][2] = ["7", "6", "8"]  # 8 is pegged
    rep = verify(bad)
    assert not rep.passed
    assert rep.first_failure().detail.startswith("jump 2 ")


def test_table_artifact_tamper_reports_index():
    data = export_artifact(build_strategy("fib_tree_reach", {"k": 3}))
    assert verify(data).passed
    bad = copy.deepcopy(data)
    # jump 5 now lands on a vertex that is not adjacent to the jumped one
    bad["schedule"]["phases"][0]["jumps"][5][2] = "r2.0"
    rep = verify(bad)
    assert not rep.passed
    legality = next(c for c in rep.checks if c.name.startswith("legality"))
    assert not legality.passed
    assert "index 5" in legality.detail


def test_claim_mismatch_fails():
    data = export_artifact(build_strategy("ray_solve"))
    assert verify(data).passed
    bad = copy.deepcopy(data)
    bad["claim"] = {"kind": "CLEARABLE", "hole": "2"}
    rep = verify(bad)
    assert not rep.passed
    claim = next(c for c in rep.checks if c.name.startswith("claim"))
    assert not claim.passed and "{0}" in claim.detail


def test_prefix_mismatch_is_caught(ray_clear_artifact):
    bad = copy.deepcopy(ray_clear_artifact)
    bad["prefix"][0][1] = ["5", "4", "2"]
    rep = verify(bad)
    assert not rep.checks[0].passed and rep.checks[0].name == "prefix"


def test_builtin_blocks_round_trip():
    res = build_strategy("chord", {"which": "freely_clear", "hole": 17})
    art = load_artifact(json.loads(json.dumps(export_artifact(res))))
    assert art.schedule.block(0).prefix(20) == res.schedule.block(0).prefix(20)
    rep = verify_artifact(export_artifact(res), value_steps=200)
    assert rep.passed, rep.lines()


def test_forced_artifact_checks_forced_moves():
    rep = verify(export_artifact(build_strategy("ray_hole0_forced", {"horizon": 40})))
    assert rep.passed
    assert any(c.name == "forced moves" and c.passed for c in rep.checks)


@pytest.mark.parametrize(
    "data, where",
    [
        ({}, "graph"),
        ({"graph": "tree"}, "graph"),
        ({"graph": "ray", "initial": {"base": "HALF"}}, "initial"),
        ({"graph": "ray", "initial": {"base": "FULL"}}, "schedule"),
    ],
)
def test_malformed_artifacts(data, where):
    with pytest.raises(ArtifactError) as info:
        load_artifact(data)
    assert info.value.where == where


# --- CLI -------------------------------------------------------------------------


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_layers(capsys):
    code, out, _ = run(capsys, "layers", "fibtree", "r0.0", "--n-max", "7")
    assert code == 0
    assert json.loads(out)["counts"] == [1, 1, 2, 3, 5, 8, 13, 21]
    code, out, _ = run(capsys, "layers", "zray", "0", "--n-max", "2", "--csv")
    assert out.split() == ["n,d_n", "0,1", "1,2", "2,2"]


def test_cli_certify(capsys):
    code, out, _ = run(capsys, "certify", "unreachable", "ray", "0")
    assert code == 0 and json.loads(out)["k"] == 3
    code, out, _ = run(capsys, "certify", "unreachable", "zray", "0", "--epsilon", "1/10", "--C", "2")
    assert code == 0 and json.loads(out)["k"] == 4
    code, out, _ = run(capsys, "certify", "unreachable", "fibtree", "r0.0", "--C", "1", "--N", "30")
    assert code == 1 and json.loads(out)["verdict"] == "growth bound violated"
    code, out, _ = run(capsys, "certify", "valued", "fibtree", "r0.0")
    assert code == 1 and json.loads(out)["divergence"]["N"] == 137
    code, out, _ = run(capsys, "certify", "valued", "grid:2", "(0,0)")
    assert code == 0 and json.loads(out)["valued"]


def test_cli_strategy_export_and_verify(capsys, tmp_path):
    path = tmp_path / "clear.json"
    code, _, _ = run(capsys, "strategy", "ray_clear", "--export", str(path))
    assert code == 0
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 0 and out.strip().endswith("RESULT PASS")
    data = json.loads(path.read_text())
    data["claim"] = {"kind": "SOLVABLE", "hole": "1", "survivor": "0"}
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", str(path), "--json")
    assert code == 1 and not json.loads(out)["passed"]


def test_cli_strategy_params(capsys):
    code, out, _ = run(capsys, "strategy", "chord", "which=freely_clear", "hole=-7")
    assert code == 0
    assert json.loads(out)["claim"] == {"kind": "CLEARABLE", "hole": "-7"}
    code, _, err = run(capsys, "strategy", "chord", "which")
    assert code == 2 and "key=value" in err
    code, _, _ = run(capsys, "strategy", "chord", "which=clear_single", "hole=4")
    assert code == 2


def test_cli_simulate(capsys, tmp_path):
    trace = apply_sequence(build("ray"), full_minus(1), [Jump(3, 2, 1)]).to_json()
    trace["jumps"].append(["5", "4", "3"])
    path = tmp_path / "t.json"
    path.write_text(json.dumps(trace))
    code, out, _ = run(capsys, "simulate", str(path), "--window", "int:0..6")
    assert code == 0 and json.loads(out)["pegs"] == ["0", "1", "3", "6"]
    trace["jumps"].append(["1", "2", "3"])
    path.write_text(json.dumps(trace))
    code, _, err = run(capsys, "simulate", str(path))
    assert code == 1 and "index 2" in err


def test_cli_simulate_artifact(capsys, tmp_path):
    path = tmp_path / "a.json"
    path.write_text(json.dumps(export_artifact(build_strategy("ray_solve"))))
    code, out, _ = run(capsys, "simulate", str(path), "--window", "int:0..30")
    assert code == 0 and json.loads(out)["pegs"] == ["0"]


def test_cli_compress(capsys, tmp_path):
    path = tmp_path / "a.json"
    path.write_text(json.dumps(export_artifact(build_strategy("ray_clear"))))
    code, out, _ = run(capsys, "compress", str(path), "--jumps", "6")
    assert code == 0
    data = json.loads(out)
    assert data["xi_in"] == "2"
    assert data["omega_prefix"][0] == ["3", "2", "1"]
    assert data["witness"]["injective"] and data["witness"]["dependencies_resolved"]
    enum = tmp_path / "enum.json"
    enum.write_text("[0, 7]")
    code, _, _ = run(capsys, "compress", str(path), "--enum", str(enum), "--jumps", "3")
    assert code == 1


def test_cli_oracle(capsys):
    code, out, _ = run(capsys, "oracle", "path:3", "--holes", "0")
    assert code == 0 and json.loads(out)["solvable"]
    code, out, _ = run(capsys, "oracle", "path:3", "--holes", "1")
    assert json.loads(out)["reachable_min_pegs"] == 2
    code, out, _ = run(capsys, "oracle", "ray", "--holes", "1", "--window", "int:0..8")
    assert code == 0


def test_cli_usage_errors(capsys):
    assert run(capsys, "layers", "tree", "0")[0] == 2
    assert run(capsys, "layers", "ray", "(0")[0] == 2
    assert run(capsys, "verify", "/nonexistent/file.json")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "oracle", "ray")[0] == 2
