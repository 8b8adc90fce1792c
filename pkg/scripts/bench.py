"""Config-driven benchmark CLI.

Usage:
  python -m scripts.bench solve --problem poisson2d --family S --degree 2 --refine 3 --pc asm2
  python -m scripts.bench suite --suite configs/suites/desk.yaml --jobs 2
  python -m scripts.bench dofs --problem poisson2d --family S,Q --degree 2,3,4 --refine 6
  python -m scripts.bench patchsize --dim 3
  python -m scripts.bench converge --problem poisson2d --family S --degree 2 --refine 4
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any

import pandas as pd

from src.bench.convergence import CONVERGENCE_COLUMNS, convergence_study
from src.bench.experiment import ExperimentConfig, ResultRow, run_experiment
from src.bench.io import format_summary, write_results_csv, write_results_json, write_summary, write_table_csv
from src.bench.suite import run_suite, suite_configs
from src.bench.tables import DOF_COLUMNS, PATCHSIZE_COLUMNS, emit_dof_table, emit_patchsize_table
from src.config import apply_overrides, config_hash, dump_yaml, load_yaml, parse_set_values
from src.utils.run_dir import ensure_run_dir, finish_manifest, make_run_id, start_manifest, write_json

logger = logging.getLogger("bench")

# CLI flag -> dotted config key
_FLAG_KEYS = {
    "problem": "experiment.problem",
    "family": "experiment.family",
    "degree": "experiment.degree",
    "base_mesh": "experiment.base_mesh",
    "refine": "experiment.refine",
    "levels": "experiment.report_levels",
    "pc": "experiment.preconditioner",
    "coarse": "experiment.coarse",
    "cycle": "experiment.cycle",
    "smoother": "experiment.smoother",
    "omega": "experiment.omega",
    "rtol": "solver.rtol",
    "maxit": "solver.maxit",
}


def _int_list(text: str) -> list[int]:
    return [int(p) for p in text.replace("x", ",").split(",") if p.strip()]


def _str_list(text: str) -> list[str]:
    return [p.strip().upper() for p in text.split(",") if p.strip()]


def _omega(text: str) -> str | float:
    return "auto" if text.strip().lower() == "auto" else float(text)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default="configs/base.yaml", help="Base config yaml")
    p.add_argument("--set", action="append", default=[], help="Override, format: key=value")
    p.add_argument("--out", default=None, help="Write the table to this file instead of a run directory")
    p.add_argument("--format", choices=("csv", "json"), default=None, help="Table format for --out")
    p.add_argument("--quiet", action="store_true", help="Warnings only, no progress bars")


def _add_experiment_flags(p: argparse.ArgumentParser, multi: bool = False) -> None:
    p.add_argument("--problem", choices=("poisson2d", "poisson3d", "elasticity2d"), default=None)
    if multi:
        p.add_argument("--family", type=_str_list, default=None, help="Comma list, e.g. S,Q")
        p.add_argument("--degree", type=_int_list, default=None, help="Comma list, e.g. 2,3,4")
    else:
        p.add_argument("--family", choices=("S", "Q"), default=None)
        p.add_argument("--degree", type=int, default=None)
    p.add_argument("--base-mesh", type=_int_list, default=None, help="NX[,NY[,NZ]]")
    p.add_argument("--refine", type=int, default=None, help="Number of uniform refinements of the base mesh")
    p.add_argument("--levels", type=_int_list, default=None, help="Reported refinement levels, e.g. 2,3,4")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Serendipity / tensor-product patch preconditioner benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="Solve one experiment on every reported level")
    _add_common(solve)
    _add_experiment_flags(solve)
    solve.add_argument("--pc", choices=("none", "patch", "asm2", "mg"), default=None)
    solve.add_argument("--coarse", choices=("direct", "q1mg"), default=None)
    solve.add_argument("--cycle", choices=("multiplicative", "additive"), default=None,
                       help="How asm2 couples the patch and coarse corrections")
    solve.add_argument("--smoother", choices=("patch", "chebyshev"), default=None)
    solve.add_argument("--rtol", type=float, default=None)
    solve.add_argument("--maxit", type=int, default=None)
    solve.add_argument("--omega", type=_omega, default=None, help="AUTO or a positive damping factor")
    solve.add_argument("--strict", action="store_true", help="Exit 1 when any solve does not converge")
    solve.add_argument("--no-timings", action="store_true", help="Blank timing columns for byte-identical output")

    suite = sub.add_parser("suite", help="Run a grid of experiments from a suite yaml")
    _add_common(suite)
    suite.add_argument("--suite", required=True, help="Suite yaml under configs/suites/")
    suite.add_argument("--jobs", type=int, default=1, help="Experiments run in parallel processes")
    suite.add_argument("--strict", action="store_true", help="Exit 1 when any solve does not converge")
    suite.add_argument("--no-timings", action="store_true", help="Blank timing columns for byte-identical output")

    dofs = sub.add_parser("dofs", help="Exact global DOF counts")
    _add_common(dofs)
    _add_experiment_flags(dofs, multi=True)

    patch = sub.add_parser("patchsize", help="Vertex-patch sizes r,Pr,Sr,Qr")
    _add_common(patch)
    patch.add_argument("--dim", type=int, choices=(2, 3), default=2)
    patch.add_argument("--r-max", type=int, default=8)

    conv = sub.add_parser("converge", help="L2 convergence study on a manufactured problem")
    _add_common(conv)
    _add_experiment_flags(conv)
    return parser


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    """Base yaml, then --set pairs, then explicit experiment flags."""
    cfg = load_yaml(args.config)
    if args.set:
        cfg = apply_overrides(cfg, parse_set_values(args.set))
    flags = {key: getattr(args, name) for name, key in _FLAG_KEYS.items() if getattr(args, name, None) is not None}
    if getattr(args, "no_timings", False):
        flags["report.timings"] = False
    return apply_overrides(cfg, flags)


class RunOutput:
    """Either a single ``--out`` file or a fresh ``runs/<run_id>/`` directory with config and manifest."""

    def __init__(self, args: argparse.Namespace, cfg: dict[str, Any]) -> None:
        self.out = Path(args.out) if args.out else None
        self.format = args.format or (self.out.suffix.lstrip(".") if self.out and self.out.suffix else "csv")
        if self.format not in ("csv", "json"):
            raise ValueError(f"Unsupported output format '{self.format}'")
        self.artifacts: list[Path] = []
        self.run_dir: Path | None = None
        if self.out is None:
            cfg_hash = config_hash(cfg)
            run_id = make_run_id(cfg_hash, command=args.command)
            self.run_dir = ensure_run_dir(cfg.get("run", {}).get("runs_root", "runs"), run_id)
            self.manifest = start_manifest(run_id, args.command, cfg_hash)
            dump_yaml(self.run_dir / "config.yaml", cfg)
            self.artifacts.append(self.run_dir / "config.yaml")
            print(f"run_id: {run_id}")
            print(f"run_dir: {self.run_dir.as_posix()}")

    def table(self, df: pd.DataFrame, name: str, columns) -> Path:
        if self.out is not None:
            path = self.out
        else:
            path = self.run_dir / f"{name}.{self.format}"
        if self.format == "json":
            write_json(path, json.loads(df.reindex(columns=list(columns)).to_json(orient="records")))
        else:
            write_table_csv(df, path, columns)
        self.artifacts.append(path)
        return path

    def results(self, rows: list[ResultRow], title: str) -> None:
        if self.out is not None:
            if self.format == "json":
                write_results_json(rows, self.out)
            else:
                write_results_csv(rows, self.out)
            self.artifacts.append(self.out)
            return
        self.artifacts.append(write_results_csv(rows, self.run_dir / "results.csv"))
        self.artifacts.append(write_results_json(rows, self.run_dir / "results.json"))
        self.artifacts.append(write_summary(title, rows, self.run_dir / "summary.txt"))

    def close(self) -> None:
        if self.run_dir is not None:
            path = finish_manifest(self.manifest, self.run_dir, self.artifacts)
            print(f"manifest: {path.as_posix()}")
        else:
            print(f"output: {self.out.as_posix()}")


def cmd_solve(args: argparse.Namespace, cfg: dict[str, Any]) -> int:
    exp = ExperimentConfig.from_mapping(cfg)
    output = RunOutput(args, cfg)
    rows = run_experiment(exp, progress=not args.quiet)
    output.results(rows, exp.label)
    output.close()
    print(format_summary(exp.label, rows), end="")
    return _exit_code(rows, args.strict)


def cmd_suite(args: argparse.Namespace, cfg: dict[str, Any]) -> int:
    meta, configs = suite_configs(args.suite, cfg)
    name = meta.get("name", Path(args.suite).stem)
    output = RunOutput(args, apply_overrides(cfg, {"suite.name": name, "suite.path": Path(args.suite).as_posix()}))
    print(f"suite_variants: {len(configs)}")
    rows = run_suite(configs, jobs=args.jobs, progress=not args.quiet)
    output.results(rows, f"suite {name}")
    output.close()
    print(format_summary(f"suite {name}", rows), end="")
    return _exit_code(rows, args.strict)


def cmd_dofs(args: argparse.Namespace, cfg: dict[str, Any]) -> int:
    exp = cfg.get("experiment", {})
    families = args.family or [exp.get("family", "S")]
    degrees = args.degree or [exp.get("degree", 2)]
    df = emit_dof_table(
        [args.problem or exp.get("problem", "poisson2d")],
        families,
        degrees,
        refine=args.refine if args.refine is not None else int(exp.get("refine", 2)),
        levels=args.levels if args.levels is not None else exp.get("report_levels"),
        base_mesh=args.base_mesh or exp.get("base_mesh"),
    )
    output = RunOutput(args, cfg)
    output.table(df, "dofs", DOF_COLUMNS)
    output.close()
    print(df.to_string(index=False))
    return 0


def cmd_patchsize(args: argparse.Namespace, cfg: dict[str, Any]) -> int:
    df = emit_patchsize_table(args.dim, r_max=args.r_max)
    output = RunOutput(args, cfg)
    output.table(df, f"patchsize_{args.dim}", PATCHSIZE_COLUMNS)
    output.close()
    print(df.to_string(index=False))
    return 0


def cmd_converge(args: argparse.Namespace, cfg: dict[str, Any]) -> int:
    exp = cfg.get("experiment", {})
    df = convergence_study(
        exp.get("problem", "poisson2d"),
        exp.get("family", "S"),
        int(exp.get("degree", 2)),
        refine=int(exp.get("refine", 2)),
        levels=exp.get("report_levels"),
        base_mesh=exp.get("base_mesh"),
        progress=not args.quiet,
    )
    output = RunOutput(args, cfg)
    output.table(df, "convergence", CONVERGENCE_COLUMNS)
    output.close()
    print(df.to_string(index=False))
    return 0


def _exit_code(rows: list[ResultRow], strict: bool) -> int:
    failed = [r for r in rows if not r.converged]
    if failed:
        logger.warning("%d of %d solves did not converge", len(failed), len(rows))
    return 1 if strict and failed else 0


COMMANDS = {
    "solve": cmd_solve,
    "suite": cmd_suite,
    "dofs": cmd_dofs,
    "patchsize": cmd_patchsize,
    "converge": cmd_converge,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s | %(message)s")
    if args.command == "dofs":
        # list-valued flags are handled by the command itself
        family, degree = args.family, args.degree
        args.family = args.degree = None
        cfg = resolve_config(args)
        args.family, args.degree = family, degree
    else:
        cfg = resolve_config(args)
    return COMMANDS[args.command](args, cfg)


if __name__ == "__main__":
    sys.exit(main())
