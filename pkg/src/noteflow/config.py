"""Engine configuration, optionally loaded from noteflow.toml.

Flags override file values; the NOTEFLOW_CONFIG environment variable
overrides the config file path.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENV_CONFIG = "NOTEFLOW_CONFIG"


@dataclass(frozen=True)
class EngineConfig:
    bins: int = 10
    categorical_cap: int = 20
    temporal_threshold: float = 0.95
    fact_threshold: float = 0.3
    numeric_pair_cap: int = 15
    candidate_cap: int = 30
    scatter_cap: int = 2000
    sample_seed: int = 42
    change_rel_tol: float = 1e-6
    change_abs_tol: float = 1e-9
    registry_path: str | None = None


def load_config(path: str | os.PathLike | None = None,
                overrides: dict | None = None) -> EngineConfig:
    """Build an EngineConfig from defaults, an optional TOML file and overrides.

    Resolution order: explicit ``path`` argument, then $NOTEFLOW_CONFIG, then
    ./noteflow.toml if present. Unknown keys in the file are rejected so typos
    do not silently fall back to defaults.
    """
    cfg = EngineConfig()
    cfg_path = path or os.environ.get(ENV_CONFIG)
    if cfg_path is None and Path("noteflow.toml").is_file():
        cfg_path = "noteflow.toml"
    if cfg_path is not None:
        with open(cfg_path, "rb") as fh:
            data = tomllib.load(fh)
        known = {f.name for f in fields(EngineConfig)}
        bad = sorted(set(data) - known)
        if bad:
            raise ValueError(f"unknown config keys: {', '.join(bad)}")
        cfg = replace(cfg, **data)
    if overrides:
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg
