"""
src/dsim/cli/config.py
Effective configuration of a command: flags override the --config file, which overrides
the defaults.
"""

import json
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, Mapping, Optional, Tuple, Union

from dsim.estimation.index_opt import SearchConfig
from dsim.estimation.weighting import WeightingMeasure, weighting_from_config
from dsim.exceptions import DsimConfigurationError

DEFAULTS: Dict[str, Any] = {
    "seed": 2024,
    "threads": 1,
    "q": {"type": "empirical"},
    "grid": None,
    "refine": True,
    "tie_tol": 0.0,
}

# Top-level keys that map onto SearchConfig fields.
SEARCH_KEYS = ("grid", "refine", "tie_tol")


def load_config_file(path: Optional[Union[str, Path]]) -> Dict[str, Any]:
    if path is None:
        return {}
    source = Path(path)
    try:
        config = json.loads(source.read_text())
    except OSError as e:
        raise DsimConfigurationError(f"cannot read config file {source}: {e}") from e
    except json.JSONDecodeError as e:
        raise DsimConfigurationError(f"config file {source} is not valid JSON: {e}") from e
    if not isinstance(config, dict):
        raise DsimConfigurationError(f"config file {source} expects a JSON object")
    return config


def merge(defaults: Mapping[str, Any], file_config: Mapping[str, Any], flags: Mapping[str, Any]) -> Dict[str, Any]:
    """Flags that were given (not None) win over the file, and the file over the defaults."""
    merged = dict(defaults)
    merged.update(file_config)
    merged.update({key: value for key, value in flags.items() if value is not None})
    return merged


def parse_grid(text: Optional[Union[str, Tuple[int, ...], list]]) -> Optional[Tuple[int, ...]]:
    """'40' or '20,40' to a tuple of grid sizes."""
    if text is None:
        return None
    if isinstance(text, (tuple, list)):
        parts = list(text)
    else:
        parts = [part for part in str(text).split(",") if part.strip()]
    try:
        return tuple(int(part) for part in parts)
    except ValueError as e:
        raise DsimConfigurationError(f"grid expects comma separated integers, but got {text!r}") from e


def parse_q(value: Union[str, Mapping[str, Any]]) -> WeightingMeasure:
    """
    A weighting measure from a JSON object, JSON text, a path to a JSON file or the
    shorthand ``empirical``.
    """
    if isinstance(value, Mapping):
        return weighting_from_config(value)
    text = str(value).strip()
    if text == "empirical":
        return weighting_from_config({"type": "empirical"})
    if not text.startswith("{"):
        path = Path(text)
        if not path.is_file():
            raise DsimConfigurationError(f"q expects JSON, a JSON file or 'empirical', but got {text!r}")
        text = path.read_text()
    try:
        return weighting_from_config(json.loads(text))
    except json.JSONDecodeError as e:
        raise DsimConfigurationError(f"q is not valid JSON: {e}") from e


def explicit_keys(file_config: Mapping[str, Any], flags: Mapping[str, Any]) -> FrozenSet[str]:
    """Top-level keys set by the config file or by a flag, as opposed to the defaults."""
    return frozenset(file_config) | frozenset(key for key, value in flags.items() if value is not None)


def search_fields(effective: Mapping[str, Any], keys: Iterable[str] = SEARCH_KEYS) -> Dict[str, Any]:
    """SearchConfig fields for the given top-level keys of the effective configuration."""
    fields: Dict[str, Any] = {}
    for key in keys:
        if key == "grid":
            fields["grid_sizes"] = parse_grid(effective.get("grid"))
        elif key == "refine":
            fields["refine"] = bool(effective.get("refine", True))
        elif key == "tie_tol":
            fields["tie_tol"] = float(effective.get("tie_tol", 0.0))
    return fields


def search_config(effective: Mapping[str, Any]) -> SearchConfig:
    return SearchConfig(**search_fields(effective), workers=int(effective.get("threads", 1)))
