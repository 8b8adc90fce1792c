import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from scripts.bench import main
from src.assembly.boundary import apply_dirichlet
from src.assembly.dofmap import build_dofmap
from src.assembly.forms import assemble_operator
from src.bench import (
    ExperimentConfig,
    convergence_study,
    dof_count_closed_form,
    emit_dof_table,
    emit_patchsize_table,
    get_preset,
    observed_orders,
    problem_spec,
    run_experiment,
    run_suite,
    suite_configs,
)
from src.bench.experiment import build_preconditioner
from src.bench.io import format_summary, write_results_csv, write_results_json
from src.config import load_yaml
from src.fe.basis import build_basis
from src.mesh.hierarchy import refine_uniform
from src.multigrid import TwoGridPreconditioner
from src.schwarz import AsmPreconditioner

ROOT = Path(__file__).resolve().parents[1]
BASE = ROOT / "configs" / "base.yaml"


def _tiny(**overrides) -> ExperimentConfig:
    data = {"problem": "poisson2d", "base_mesh": (2, 2), "refine": 1, "degree": 2, "rtol": 1e-10}
    data.update(overrides)
    return ExperimentConfig(**data)


# ─── tables ───────────────────────────────────────────────────────────


def test_dof_table_values():
    df = emit_dof_table(["poisson2d"], ["S", "Q"], [2], refine=2)
    assert list(df.columns) == ["problem", "family", "degree", "mesh", "dofs"]
    s2 = df[(df["family"] == "S") & (df["mesh"] == "32x32")]
    assert s2["dofs"].tolist() == [3201]
    assert len(df) == 6


def test_dof_table_selected_levels_and_elasticity():
    df = emit_dof_table(["elasticity2d"], ["S"], [2], refine=2, levels=[2])
    assert df.to_dict("records") == [
        {"problem": "elasticity2d", "family": "S", "degree": 2, "mesh": "500x20", "dofs": 62082}
    ]


@pytest.mark.parametrize(
    "family, k, cells, value_dim, expected",
    [
        ("S", 2, (32, 32), 1, 3201),
        ("Q", 4, (512, 512), 1, 4198401),
        ("S", 3, (16, 16, 16), 1, 32657),
        ("Q", 4, (64, 64, 64), 1, 16974593),
        ("S", 4, (512, 512), 1, 2101249),
        ("S", 4, (4000, 160), 2, 10273282),
    ],
)
def test_dof_closed_form(family, k, cells, value_dim, expected):
    assert dof_count_closed_form(family, k, cells, value_dim) == expected


def test_patchsize_table():
    df2 = emit_patchsize_table(2, r_max=4)
    assert list(df2.columns) == ["r", "Pr", "Sr", "Qr"]
    assert df2.iloc[0].tolist() == [1, 1, 1, 1]
    assert df2.iloc[2].tolist() == [3, 19, 9, 25]
    df3 = emit_patchsize_table(3, r_max=3)
    assert df3.iloc[2].tolist() == [3, 65, 13, 125]
    with pytest.raises(ValueError):
        emit_patchsize_table(4)


# ─── configuration ────────────────────────────────────────────────────


def test_experiment_config_from_base_yaml():
    cfg = ExperimentConfig.from_mapping(load_yaml(BASE))
    assert cfg.preconditioner == "asm2"
    assert cfg.omega == "auto"
    assert cfg.levels == (0, 1, 2)
    assert cfg.timings is True
    assert cfg.cycle == "multiplicative"
    assert cfg.smoothing_steps == 2
    assert cfg.label == "poisson2d S_2 pc=asm2"


def test_experiment_config_parses_meshes():
    assert _tiny(base_mesh="4x4").base_mesh == (4, 4)
    assert _tiny(problem="poisson3d", base_mesh=2).base_mesh == (2, 2, 2)
    assert _tiny(omega="AUTO").omega == "auto"
    assert _tiny(omega=0.5).omega == 0.5


@pytest.mark.parametrize(
    "overrides",
    [
        {"base_mesh": (2, 2, 2)},
        {"degree": 7},
        {"report_levels": (0, 3)},
        {"omega": -1.0},
        {"preconditioner": "ilu"},
        {"cycle": "hybrid"},
        {"smoothing_steps": 0},
        {"unknown": 1},
    ],
)
def test_experiment_config_rejects(overrides):
    with pytest.raises(ValidationError):
        _tiny(**overrides)


def test_problem_spec_from_preset():
    spec = problem_spec(get_preset("elasticity2d"), E=2.0, nu=0.25, gravity=9.81)
    assert spec.kind == "elasticity"
    assert spec.dirichlet == ("xmin",)
    assert spec.forcing_value == 9.81
    assert spec.mu == pytest.approx(2.0 / 2.5)
    with pytest.raises(ValueError):
        get_preset("stokes2d")


# ─── experiments ──────────────────────────────────────────────────────


@pytest.mark.parametrize("pc", ["none", "patch", "asm2", "mg"])
def test_run_experiment_rows(pc):
    rows = run_experiment(_tiny(preconditioner=pc))
    assert [r.mesh for r in rows] == ["2x2", "4x4"]
    assert all(r.converged for r in rows)
    assert rows[1].dofs == 65
    assert rows[1].l2_error is not None and rows[1].l2_error > 0
    assert rows[1].preconditioner == pc
    assert rows[1].setup_seconds is not None


@pytest.mark.parametrize("cycle, kind", [("multiplicative", TwoGridPreconditioner), ("additive", AsmPreconditioner)])
def test_two_level_cycle_selects_preconditioner(cycle, kind):
    cfg = _tiny(cycle=cycle)
    preset = get_preset(cfg.problem)
    hierarchy = refine_uniform(preset.base(cfg.base_mesh), cfg.refine)
    spec = problem_spec(preset)
    mesh = hierarchy[1]
    basis = build_basis("S", 2, 2)
    dofmap = build_dofmap(mesh, basis, 1)
    A = assemble_operator(mesh, basis, dofmap, spec)
    apply_dirichlet(A, np.zeros(A.shape[0]), dofmap, spec.dirichlet)
    pc = build_preconditioner(cfg, hierarchy, 1, spec, dofmap, A)
    assert isinstance(pc, kind)
    rows = run_experiment(cfg)
    assert all(r.converged for r in rows)


def test_results_csv_is_byte_identical_without_timings(tmp_path):
    cfg = _tiny(timings=False, report_levels=(1,))
    a = write_results_csv(run_experiment(cfg), tmp_path / "a.csv")
    b = write_results_csv(run_experiment(cfg), tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()
    header = a.read_bytes().split(b"\n")[0].decode()
    assert header == (
        "problem,family,degree,mesh,dofs,iterations,converged,kappa_est,lambda_min,lambda_max,"
        "l2_error,setup_seconds,solve_seconds"
    )
    assert b"\r" not in a.read_bytes()


def test_results_json_carries_solve_report(tmp_path):
    rows = run_experiment(_tiny(report_levels=(1,)))
    path = write_results_json(rows, tmp_path / "r.json")
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data[0]["report"]["iterations"] == rows[0].iterations
    assert len(data[0]["report"]["residual_history"]) == rows[0].iterations + 1
    summary = format_summary("tiny", rows)
    assert "rows: 1" in summary and "non-converged: 0" in summary


def test_elasticity_experiment_has_no_l2_error():
    cfg = ExperimentConfig(problem="elasticity2d", base_mesh=(10, 2), refine=0, degree=2, rtol=1e-10)
    (row,) = run_experiment(cfg)
    assert row.converged
    assert row.l2_error is None
    assert row.dofs == 2 * dof_count_closed_form("S", 2, (10, 2))


def test_suite_runs_in_submission_order(tmp_path):
    suite = tmp_path / "suite.yaml"
    suite.write_text(
        "suite:\n  name: tiny\n  method: grid\n"
        "params:\n  experiment.family: [Q, S]\n"
        "overrides:\n  experiment.base_mesh: [2, 2]\n  experiment.refine: 1\n"
        "  experiment.report_levels: [1]\n  experiment.preconditioner: patch\n",
        encoding="utf-8",
    )
    meta, configs = suite_configs(suite, load_yaml(BASE))
    assert meta["name"] == "tiny"
    rows = run_suite(configs, jobs=1, progress=False)
    assert [r.family for r in rows] == ["Q", "S"]
    with pytest.raises(ValueError):
        run_suite(configs, jobs=0)


# ─── convergence ──────────────────────────────────────────────────────


def test_observed_orders():
    h = pd.Series([0.5, 0.25, 0.125])
    err = pd.Series([1.0, 0.125, 0.015625])
    orders = observed_orders(h, err)
    assert np.isnan(orders.iloc[0])
    np.testing.assert_allclose(orders.iloc[1:], [3.0, 3.0])


def test_convergence_study_order():
    df = convergence_study("poisson2d", "S", 2, refine=4, levels=[3, 4])
    assert list(df.columns) == ["level", "mesh", "h", "dofs", "l2_error", "observed_order", "interp_error"]
    assert df["mesh"].tolist() == ["64x64", "128x128"]
    assert df["observed_order"].iloc[1] >= 2.8
    assert (df["l2_error"] > 0).all()


def test_convergence_needs_manufactured_solution():
    with pytest.raises(ValueError):
        convergence_study("elasticity2d", "S", 2, refine=0)


# ─── command line ─────────────────────────────────────────────────────


def _cli(*args: str) -> int:
    return main([*args, "--config", str(BASE), "--quiet"])


def test_cli_dofs_to_file(tmp_path):
    out = tmp_path / "dofs.csv"
    code = _cli("dofs", "--problem", "poisson2d", "--family", "S,Q", "--degree", "2,3", "--refine", "2",
                "--levels", "2", "--out", str(out))
    assert code == 0
    df = pd.read_csv(out)
    assert df["dofs"].tolist() == [3201, 5313, 4225, 9409]


def test_cli_patchsize_json(tmp_path):
    out = tmp_path / "patch.json"
    assert _cli("patchsize", "--dim", "3", "--r-max", "2", "--out", str(out)) == 0
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data == [{"r": 1, "Pr": 1, "Sr": 1, "Qr": 1}, {"r": 2, "Pr": 15, "Sr": 7, "Qr": 27}]


def test_cli_solve_writes_run_directory(tmp_path, capsys):
    code = _cli("solve", "--problem", "poisson2d", "--degree", "2", "--base-mesh", "2,2", "--refine", "1",
                "--pc", "asm2", "--no-timings", "--set", f"run.runs_root={tmp_path.as_posix()}")
    assert code == 0
    (run_dir,) = [p for p in tmp_path.iterdir() if p.is_dir()]
    assert run_dir.name.startswith("solve_")
    manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
    assert sorted(manifest["artifacts"]) == ["config.yaml", "results.csv", "results.json", "summary.txt"]
    saved = load_yaml(run_dir / "config.yaml")
    assert saved["report"]["timings"] is False
    assert saved["experiment"]["base_mesh"] == [2, 2]
    rows = pd.read_csv(run_dir / "results.csv")
    assert rows["setup_seconds"].isna().all()
    assert "run_id:" in capsys.readouterr().out


def test_cli_strict_exit_code(tmp_path):
    out = tmp_path / "r.csv"
    args = ("solve", "--problem", "poisson2d", "--base-mesh", "4,4", "--refine", "1", "--pc", "none",
            "--maxit", "2", "--out", str(out))
    assert _cli(*args) == 0
    assert _cli(*args, "--strict") == 1
    assert not pd.read_csv(out)["converged"].any()


def test_cli_converge(tmp_path):
    out = tmp_path / "conv.csv"
    assert _cli("converge", "--problem", "poisson2d", "--degree", "2", "--base-mesh", "4,4", "--refine", "1",
                "--out", str(out)) == 0
    assert pd.read_csv(out)["mesh"].tolist() == ["4x4", "8x8"]
