from pathlib import Path

import pytest

from src.config import (
    apply_overrides,
    config_hash,
    dump_yaml,
    expand_grid,
    load_suite,
    load_yaml,
    parse_set_values,
)
from src.utils.run_dir import ensure_run_dir, finish_manifest, make_run_id, start_manifest

ROOT = Path(__file__).resolve().parents[1]
BASE = ROOT / "configs" / "base.yaml"


def test_base_config_sections():
    cfg = load_yaml(BASE)
    assert set(cfg) >= {"run", "experiment", "solver", "material", "report"}
    assert cfg["experiment"]["preconditioner"] == "asm2"
    assert cfg["experiment"]["cycle"] == "multiplicative"
    assert "seed" not in cfg["run"]
    assert cfg["solver"]["rtol"] == pytest.approx(1e-12)


def test_load_yaml_rejects_non_mapping(tmp_path):
    p = tmp_path / "list.yaml"
    p.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_yaml(p)


def test_load_yaml_tolerates_bom(tmp_path):
    p = tmp_path / "bom.yaml"
    p.write_bytes("\ufeffexperiment:\n  degree: 3\n".encode("utf-8"))
    assert load_yaml(p) == {"experiment": {"degree": 3}}


def test_dump_yaml_round_trip_keeps_order(tmp_path):
    data = {"b": 1, "a": {"z": [1, 2], "y": "S"}}
    p = tmp_path / "out" / "cfg.yaml"
    dump_yaml(p, data)
    assert b"\r\n" not in p.read_bytes()
    assert list(load_yaml(p)) == ["b", "a"]


def test_overrides_and_set_values():
    pairs = parse_set_values(["experiment.degree=3", "solver.rtol=1e-10", "experiment.base_mesh=[4, 4]", "new.key=x"])
    assert pairs["experiment.degree"] == 3
    assert pairs["solver.rtol"] == pytest.approx(1e-10)
    assert pairs["experiment.base_mesh"] == [4, 4]
    cfg = apply_overrides({"experiment": {"degree": 2}}, pairs)
    assert cfg["experiment"] == {"degree": 3, "base_mesh": [4, 4]}
    assert cfg["new"] == {"key": "x"}
    with pytest.raises(ValueError):
        parse_set_values(["degree"])


def test_expand_grid_first_key_slowest():
    grid = expand_grid({"a": [1, 2], "b": ["x", "y", "z"]})
    assert len(grid) == 6
    assert grid[0] == {"a": 1, "b": "x"}
    assert grid[1] == {"a": 1, "b": "y"}
    assert grid[3] == {"a": 2, "b": "x"}
    with pytest.raises(ValueError):
        expand_grid({"a": 3})


def test_load_suite_applies_overrides_and_max_runs(tmp_path):
    suite = tmp_path / "suite.yaml"
    suite.write_text(
        "suite:\n  name: tiny\n  method: grid\n  max_runs: 3\n"
        "params:\n  experiment.degree: [2, 3]\n  experiment.family: [S, Q]\n"
        "overrides:\n  experiment.refine: 1\n",
        encoding="utf-8",
    )
    meta, variants = load_suite(suite, load_yaml(BASE))
    assert meta["name"] == "tiny"
    assert len(variants) == 3
    assert [v["experiment"]["family"] for v in variants] == ["S", "Q", "S"]
    assert all(v["experiment"]["refine"] == 1 for v in variants)
    assert variants[0]["solver"]["maxit"] == 500


def test_load_suite_rejects_random_search(tmp_path):
    suite = tmp_path / "suite.yaml"
    suite.write_text("suite:\n  method: random\nparams: {}\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_suite(suite, {})


def test_config_hash_ignores_bookkeeping_and_number_spelling():
    cfg = load_yaml(BASE)
    h = config_hash(cfg)
    assert len(h) == 64
    assert config_hash(apply_overrides(cfg, {"run.runs_root": "elsewhere", "report.timings": False})) == h
    assert config_hash(apply_overrides(cfg, {"material.E": 1})) == h
    assert config_hash(apply_overrides(cfg, {"experiment.degree": 3})) != h


def test_run_id_and_manifest(tmp_path):
    run_id = make_run_id("abcdef0123456789", timestamp="20260101_120000", command="solve")
    assert run_id == "solve_20260101_120000__abcdef01"
    assert make_run_id("abcdef0123456789", timestamp="20260101_120000") == "20260101_120000__abcdef01"
    run_dir = ensure_run_dir(tmp_path / "runs", run_id)
    artifact = run_dir / "results.csv"
    artifact.write_text("x\n", encoding="utf-8")
    manifest = start_manifest(run_id, "solve", "abcdef0123456789")
    path = finish_manifest(manifest, run_dir, [artifact])
    assert path.name == "manifest.json"
    assert manifest["artifacts"] == ["results.csv"]
    assert manifest["end_time"] is not None
