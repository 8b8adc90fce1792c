"""Benchmark artifacts: results CSV/JSON, table CSVs and the human-readable summary."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import pandas as pd

from src.bench.experiment import RESULT_COLUMNS, ResultRow
from src.utils.run_dir import write_json


def write_table_csv(df: pd.DataFrame, path: str | Path, columns: Sequence[str] | None = None) -> Path:
    """UTF-8 without BOM, comma separated, LF line endings, fixed column order."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    out = df if columns is None else df.reindex(columns=list(columns))
    out.to_csv(p, index=False, encoding="utf-8", lineterminator="\n")
    return p


def results_frame(rows: Iterable[ResultRow]) -> pd.DataFrame:
    return pd.DataFrame.from_records([r.csv_record() for r in rows], columns=list(RESULT_COLUMNS))


def write_results_csv(rows: Sequence[ResultRow], path: str | Path) -> Path:
    return write_table_csv(results_frame(rows), path, RESULT_COLUMNS)


def write_results_json(rows: Sequence[ResultRow], path: str | Path) -> Path:
    """Every row with its full solve report (residual histories, CG coefficients)."""
    p = Path(path)
    write_json(p, [r.model_dump(mode="json") for r in rows])
    return p


def format_summary(title: str, rows: Sequence[ResultRow]) -> str:
    lines: list[str] = []
    lines.append("=" * 70)
    lines.append(title)
    lines.append("=" * 70)
    for r in rows:
        flag = "" if r.converged else "  NOT CONVERGED"
        err = "" if r.l2_error is None else f"  L2={r.l2_error:.3e}"
        lines.append(
            f"  {r.problem:<13} {r.family}_{r.degree} {r.preconditioner:<5} {r.mesh:<12} "
            f"dofs={r.dofs:<9d} its={r.iterations:<4d} kappa={r.kappa_est:9.3f}{err}{flag}"
        )
    failed = sum(1 for r in rows if not r.converged)
    lines.append("-" * 70)
    lines.append(f"  rows: {len(rows)}  non-converged: {failed}")
    lines.append("=" * 70)
    return "\n".join(lines) + "\n"


def write_summary(title: str, rows: Sequence[ResultRow], path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(format_summary(title, rows), encoding="utf-8", newline="\n")
    return p
