"""Run directories, run ids and the per-run manifest."""

from __future__ import annotations

import json
import subprocess
from datetime import datetime
from pathlib import Path
from typing import Any


def now_local_timestamp() -> str:
    return datetime.now().strftime("%Y%m%d_%H%M%S")


def make_run_id(config_hash: str, timestamp: str | None = None, command: str | None = None) -> str:
    """``<timestamp>__<hash8>``, prefixed with the CLI subcommand when given."""
    ts = timestamp or now_local_timestamp()
    prefix = f"{command}_" if command else ""
    return f"{prefix}{ts}__{config_hash[:8]}"


def ensure_run_dir(runs_root: str | Path, run_id: str) -> Path:
    run_dir = Path(runs_root) / run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def git_commit_or_none(cwd: str | Path = ".") -> str | None:
    try:
        out = subprocess.check_output(
            ["git", "rev-parse", "HEAD"],
            cwd=str(cwd),
            stderr=subprocess.DEVNULL,
            text=True,
        ).strip()
        return out or None
    except Exception:
        return None


def start_manifest(run_id: str, command: str, cfg_hash: str) -> dict[str, Any]:
    return {
        "run_id": run_id,
        "command": command,
        "start_time": datetime.now().isoformat(timespec="seconds"),
        "end_time": None,
        "git_commit": git_commit_or_none("."),
        "config_hash": cfg_hash,
        "artifacts": [],
    }


def finish_manifest(manifest: dict[str, Any], run_dir: Path, artifacts: list[Path]) -> Path:
    manifest["artifacts"] = sorted(p.relative_to(run_dir).as_posix() for p in artifacts)
    manifest["end_time"] = datetime.now().isoformat(timespec="seconds")
    path = run_dir / "manifest.json"
    write_json(path, manifest)
    return path


def write_json(path: str | Path, data: dict[str, Any] | list[Any]) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")
