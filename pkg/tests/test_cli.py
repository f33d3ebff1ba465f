import json

import numpy as np
import pytest

from sublorentz.cli import emit_report, main, run_config
from sublorentz.config import load_config, parse_config
from sublorentz.errors import ConfigError
from sublorentz.presets import PRESETS


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


FAST_SOLVER = {"restarts": 2, "max_iter": 40, "inner_iter": 30}


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------


def test_parse_preset_expansion():
    cfg = parse_config({"version": 1, "preset": "minkowski11"})
    assert cfg.model is not None and cfg.cone is not None
    assert cfg.segments == 50
    assert np.allclose(cfg.x1, [5.0, 3.0])


def test_preset_keys_can_be_overridden():
    cfg = parse_config({"version": 1, "preset": "minkowski11",
                        "endpoints": {"x0": [0.0, 0.0], "x1": [2.0, 0.0]},
                        "segments": 10})
    assert np.allclose(cfg.x1, [2.0, 0.0])
    assert cfg.segments == 10


def test_unknown_top_level_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config({"version": 1, "preset": "minkowski11", "segmnts": 5})


def test_unknown_nested_key_rejected():
    with pytest.raises(ConfigError, match="cone.generatorz"):
        parse_config({"version": 1,
                      "model": {"kind": "abelian", "dim": 2},
                      "cone": {"kind": "polyhedral", "generatorz": [[1, 0]]}})


def test_missing_version_rejected():
    with pytest.raises(ConfigError, match="version"):
        parse_config({"preset": "minkowski11"})


def test_unknown_preset_rejected():
    with pytest.raises(ConfigError, match="unknown preset"):
        parse_config({"version": 1, "preset": "minkowski99"})


def test_bad_hyperbolic_endpoint_diagnostic():
    with pytest.raises(ConfigError, match="endpoints.x1"):
        parse_config({"version": 1, "preset": "hyperbolic",
                      "endpoints": {"x0": [0.0, 1.0], "x1": [0.0, -2.0]}})


def test_bad_json_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"version": 1,\n  "preset": }')
    with pytest.raises(ConfigError, match="line 2"):
        load_config(str(path))


def test_solver_section_validation():
    with pytest.raises(ConfigError, match="solver"):
        parse_config({"version": 1, "preset": "minkowski11",
                      "solver": {"tol": 1e-6, "bogus": 3}})


def test_carnot_model_from_structure_file(tmp_path):
    sc = tmp_path / "heis.txt"
    sc.write_text("layers: 2 1\n0 1 2 1.0\n")
    cfg = parse_config({"version": 1,
                        "model": {"kind": "carnot", "structure_file": str(sc)}})
    assert cfg.model.point_dim == 3


def test_all_presets_parse():
    for name in PRESETS:
        cfg = parse_config({"version": 1, "preset": name})
        assert cfg.model is not None
        assert cfg.timeform is not None


# ---------------------------------------------------------------------------
# subcommands via run_config
# ---------------------------------------------------------------------------


def test_solve_minkowski_preset(tmp_path):
    path = write_config(tmp_path, {"version": 1, "preset": "minkowski11",
                                   "solver": FAST_SOLVER})
    code, report = run_config(path, "solve")
    assert code == 0
    assert report.payload["solver_status"] == "solved"
    assert report.payload["objective"] == pytest.approx(4.0, rel=1e-3)
    assert "trajectory.csv" in report.artifacts


def test_solve_emits_files(tmp_path):
    out = tmp_path / "out"
    path = write_config(tmp_path, {"version": 1, "preset": "minkowski11",
                                   "solver": FAST_SOLVER})
    code, report = run_config(path, "solve", out_dir=str(out))
    assert code == 0
    traj = (out / "trajectory.csv").read_text().strip().split("\n")
    assert len(traj) == 1 + 50 + 1  # header + N + 1 rows
    record = json.loads((out / "report.json").read_text())
    assert record["subcommand"] == "solve"
    assert (out / "summary.txt").exists()
    assert (out / "history.csv").exists()


def test_solve_spacelike_exit_one(tmp_path):
    path = write_config(tmp_path, {
        "version": 1, "preset": "minkowski11",
        "endpoints": {"x0": [0.0, 0.0], "x1": [5.0, 7.0]}})
    code, report = run_config(path, "solve")
    assert code == 1
    assert report.payload["solver_status"] == "no_admissible_path"


def test_check_timeform_closed_and_not(tmp_path):
    closed = write_config(tmp_path, {"version": 1, "preset": "hyperbolic"},
                          "closed.json")
    code, rep = run_config(closed, "check-timeform")
    assert code == 0 and rep.payload["closed"]
    broken = write_config(tmp_path, {
        "version": 1, "preset": "hyperbolic",
        "timeform": {"kind": "hyperbolic_ab", "a": 1.0, "b": 1.0}},
        "open.json")
    code, rep = run_config(broken, "check-timeform")
    assert code == 1 and not rep.payload["closed"]
    # d tau = a / y^2 at the sampled scale
    assert rep.payload["max_sampled_dtau"] > 0.05


def test_check_structure_pass_and_fail(tmp_path):
    good = write_config(tmp_path, {"version": 1, "preset": "heisenberg-sl"},
                        "good.json")
    code, rep = run_config(good, "check-structure")
    assert code == 0 and rep.payload["pointed"]
    assert rep.payload["antinorm_axioms_passed"]
    bad = write_config(tmp_path, {
        "version": 1,
        "model": {"kind": "abelian", "dim": 2},
        "cone": {"kind": "polyhedral",
                 "generators": [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]},
        "antinorm": {"kind": "zero"}}, "bad.json")
    code, rep = run_config(bad, "check-structure")
    assert code == 1 and not rep.payload["pointed"]


def test_reach_cloud(tmp_path):
    out = tmp_path / "reach"
    path = write_config(tmp_path, {"version": 1, "preset": "minkowski11",
                                   "samples": 64})
    code, rep = run_config(path, "reach", out_dir=str(out))
    assert code == 0
    rows = (out / "cloud.csv").read_text().strip().split("\n")
    assert len(rows) == 1 + 64
    assert rows[0] == "x0,x1"


def test_determinism_byte_for_byte(tmp_path):
    cfgd = {"version": 1, "preset": "minkowski11", "samples": 32,
            "solver": FAST_SOLVER}
    path = write_config(tmp_path, cfgd)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        run_config(path, "solve", seed=7, out_dir=str(out))
        run_config(path, "reach", seed=7, out_dir=str(out / "r"))
        outs.append((
            (out / "report.json").read_bytes(),
            (out / "trajectory.csv").read_bytes(),
            (out / "r" / "cloud.csv").read_bytes(),
        ))
    assert outs[0] == outs[1]


def test_seed_changes_reach_output(tmp_path):
    path = write_config(tmp_path, {"version": 1, "preset": "minkowski11",
                                   "samples": 16})
    _, rep_a = run_config(path, "reach", seed=1)
    _, rep_b = run_config(path, "reach", seed=2)
    assert rep_a.artifacts["cloud.csv"] != rep_b.artifacts["cloud.csv"]


# ---------------------------------------------------------------------------
# main() entry point
# ---------------------------------------------------------------------------


def test_main_solve_exit_zero(tmp_path, capsys):
    path = write_config(tmp_path, {"version": 1, "preset": "minkowski11",
                                   "solver": FAST_SOLVER})
    assert main(["solve", "--config", path]) == 0
    assert "objective" in capsys.readouterr().out


def test_main_config_error_exit_two(tmp_path, capsys):
    path = write_config(tmp_path, {"version": 1, "typo": True})
    assert main(["solve", "--config", path]) == 2
    assert "config error" in capsys.readouterr().err


def test_main_missing_file_exit_two(capsys):
    assert main(["solve", "--config", "/nonexistent/x.json"]) == 2


def test_verify_subcommand_emits_json(tmp_path):
    out = tmp_path / "verify"
    code, rep = run_config(None, "verify", seed=0, out_dir=str(out))
    assert code == 0
    record = json.loads((out / "report.json").read_text())
    assert record["checks_passed"] == record["checks_total"]
    assert len(rep.payload["results"]) == record["checks_total"]


def test_emit_report_returns_paths(tmp_path):
    path = write_config(tmp_path, {"version": 1, "preset": "minkowski11",
                                   "samples": 8})
    _, rep = run_config(path, "reach")
    written = emit_report(rep, str(tmp_path / "emitted"))
    names = {p.split("/")[-1] for p in written}
    assert names == {"report.json", "summary.txt", "cloud.csv"}
