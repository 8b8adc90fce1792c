from __future__ import annotations

import copy
import hashlib
import itertools
import json
from pathlib import Path
from typing import Any

import yaml

# Sections that change the numbers a run produces; run/report bookkeeping stays out of the hash.
HASHED_SECTIONS = ("experiment", "solver", "material")


def load_yaml(path: str | Path) -> dict[str, Any]:
    with Path(path).open("r", encoding="utf-8-sig") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ValueError(f"Config must be a mapping: {path}")
    return data


def dump_yaml(path: str | Path, data: dict[str, Any]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with Path(path).open("w", encoding="utf-8", newline="\n") as f:
        yaml.safe_dump(data, f, sort_keys=False, allow_unicode=False)


def _set_dotted(cfg: dict[str, Any], dotted_key: str, value: Any) -> None:
    parts = dotted_key.split(".")
    cur = cfg
    for p in parts[:-1]:
        if p not in cur or not isinstance(cur[p], dict):
            cur[p] = {}
        cur = cur[p]
    cur[parts[-1]] = value


def apply_overrides(cfg: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    out = copy.deepcopy(cfg)
    for k, v in overrides.items():
        _set_dotted(out, k, v)
    return out


def parse_set_values(pairs: list[str]) -> dict[str, Any]:
    """``["experiment.degree=3", "solver.rtol=1e-10"]`` -> dotted-key mapping with YAML scalars."""
    out: dict[str, Any] = {}
    for item in pairs:
        if "=" not in item:
            raise ValueError(f"Invalid override '{item}', expected key=value")
        k, raw_v = item.split("=", 1)
        out[k.strip()] = yaml.safe_load(raw_v.strip())
    return out


def expand_grid(params: dict[str, list[Any]]) -> list[dict[str, Any]]:
    """Cartesian product of dotted-key value lists, first key varying slowest."""
    keys = list(params.keys())
    for k in keys:
        if not isinstance(params[k], list):
            raise ValueError(f"Suite parameter '{k}' must be a list, got {params[k]!r}")
    return [dict(zip(keys, combo)) for combo in itertools.product(*(params[k] for k in keys))]


def load_suite(path: str | Path, base: dict[str, Any]) -> tuple[dict[str, Any], list[dict[str, Any]]]:
    """Suite metadata and one merged config mapping per grid variant."""
    suite_cfg = load_yaml(path)
    meta = suite_cfg.get("suite", {})
    method = meta.get("method", "grid")
    if method != "grid":
        raise ValueError(f"Unsupported suite.method={method}, only grid is supported")
    overrides = suite_cfg.get("overrides", {}) or {}
    variants = expand_grid(suite_cfg.get("params", {}) or {})
    max_runs = meta.get("max_runs")
    if max_runs is not None:
        variants = variants[: int(max_runs)]
    return meta, [apply_overrides(base, {**overrides, **v}) for v in variants]


def _normalize_for_hash(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _normalize_for_hash(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize_for_hash(v) for v in value]
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def canonical_experiment_config(cfg: dict[str, Any]) -> dict[str, Any]:
    return _normalize_for_hash({name: cfg.get(name, {}) for name in HASHED_SECTIONS})


def canonical_config_text(cfg: dict[str, Any]) -> str:
    canonical = canonical_experiment_config(cfg)
    return json.dumps(canonical, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(cfg: dict[str, Any]) -> str:
    return hashlib.sha256(canonical_config_text(cfg).encode("utf-8")).hexdigest()
