"""Declarative pipeline configuration with layered overrides.

Values resolve as: built-in defaults, then the config file (JSON, nested
or dotted keys), then explicit overrides (CLI flags).  Validation is a
separate step so configs can be constructed programmatically and checked
once, with errors that name the offending key.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from .automaton import parse_strategy
from .windowing import WindowConfig

SEGMENTER_KINDS = ("autoregressive", "fixed", "external", "replay")
CONSTRAINT_MODES = ("FST", "LEVENSHTEIN")
FALLBACK_KINDS = ("none", "fixed")


class ConfigError(ValueError):
    """An invalid or inconsistent pipeline configuration."""


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a segmentation run needs, resolvable from file and flags."""

    window: WindowConfig = WindowConfig()
    segmenter: str = "autoregressive"
    segment_len: int = 17
    model_path: Optional[str] = None
    replay_labels: Optional[str] = None
    strategy: str = "greedy"
    constraint: str = "FST"
    endpoint_url: Optional[str] = None
    endpoint_timeout: float = 10.0
    endpoint_retries: int = 3
    endpoint_backoff: float = 0.25
    endpoint_concurrency: int = 4
    endpoint_fallback: str = "none"
    abbreviations_path: Optional[str] = None
    normalize: bool = True
    seed: int = 13
    workers: int = 0


_DEFAULTS = PipelineConfig()

_SCALAR_KEYS = {
    "segmenter": str,
    "segment_len": int,
    "model_path": str,
    "replay_labels": str,
    "strategy": str,
    "constraint": str,
    "endpoint_url": str,
    "endpoint_timeout": float,
    "endpoint_retries": int,
    "endpoint_backoff": float,
    "endpoint_concurrency": int,
    "endpoint_fallback": str,
    "abbreviations_path": str,
    "normalize": bool,
    "seed": int,
    "workers": int,
}
_WINDOW_KEYS = {"size": int, "left": int, "right": int}


def _flatten(data: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(_flatten(value, name + "."))
        else:
            flat[name] = value
    return flat


def _coerce(key: str, value: Any, kind: type) -> Any:
    if value is None:
        return None
    if kind is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind is str and isinstance(value, str):
        return value
    raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}")


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> PipelineConfig:
    """Resolve a PipelineConfig from defaults, an optional file, and overrides.

    Override keys use dotted form for the window block ("window.size");
    the file may nest instead.  Unknown keys are errors.
    """
    flat: dict[str, Any] = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        flat.update(_flatten(raw))
    if overrides:
        for key, value in overrides.items():
            if value is not None:
                flat[key] = value

    window_kwargs: dict[str, int] = {}
    kwargs: dict[str, Any] = {}
    for key, value in flat.items():
        if key.startswith("window."):
            sub = key[len("window."):]
            if sub not in _WINDOW_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            window_kwargs[sub] = _coerce(key, value, _WINDOW_KEYS[sub])
        elif key in _SCALAR_KEYS:
            kwargs[key] = _coerce(key, value, _SCALAR_KEYS[key])
        else:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        window = WindowConfig(
            size=window_kwargs.get("size", _DEFAULTS.window.size),
            left=window_kwargs.get("left", _DEFAULTS.window.left),
            right=window_kwargs.get("right", _DEFAULTS.window.right),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))
    return PipelineConfig(window=window, **kwargs)


def validate(cfg: PipelineConfig, check_files: bool = True) -> None:
    """Raise ConfigError on any inconsistency; optionally check file paths."""
    if cfg.segmenter not in SEGMENTER_KINDS:
        raise ConfigError(
            f"unknown segmenter {cfg.segmenter!r}; expected one of {SEGMENTER_KINDS}"
        )
    if cfg.constraint not in CONSTRAINT_MODES:
        raise ConfigError(
            f"unknown constraint mode {cfg.constraint!r}; expected one of {CONSTRAINT_MODES}"
        )
    if cfg.endpoint_fallback not in FALLBACK_KINDS:
        raise ConfigError(
            f"unknown endpoint fallback {cfg.endpoint_fallback!r}; "
            f"expected one of {FALLBACK_KINDS}"
        )
    try:
        parse_strategy(cfg.strategy)
    except ValueError as exc:
        raise ConfigError(str(exc))
    if cfg.segment_len < 1:
        raise ConfigError("segment_len must be >= 1")
    if cfg.endpoint_timeout <= 0:
        raise ConfigError("endpoint_timeout must be positive")
    if cfg.endpoint_retries < 0:
        raise ConfigError("endpoint_retries must be >= 0")
    if cfg.endpoint_backoff < 0:
        raise ConfigError("endpoint_backoff must be >= 0")
    if cfg.endpoint_concurrency < 1:
        raise ConfigError("endpoint_concurrency must be >= 1")
    if cfg.workers < 0:
        raise ConfigError("workers must be >= 0 (0 = auto)")
    if cfg.segmenter == "autoregressive":
        if not cfg.model_path:
            raise ConfigError("autoregressive segmenter requires model_path")
        if check_files and not Path(cfg.model_path).is_file():
            raise ConfigError(f"model file not found: {cfg.model_path}")
    if cfg.segmenter == "replay":
        if not cfg.replay_labels:
            raise ConfigError("replay segmenter requires replay_labels")
        if check_files and not Path(cfg.replay_labels).is_file():
            raise ConfigError(f"labels file not found: {cfg.replay_labels}")
    if cfg.segmenter == "external":
        if not cfg.endpoint_url:
            raise ConfigError("external segmenter requires endpoint_url")
        if cfg.constraint != "LEVENSHTEIN":
            raise ConfigError(
                "external segmenter requires constraint LEVENSHTEIN: a remote "
                "generator cannot be arc-constrained, only projected"
            )
    if cfg.abbreviations_path and check_files and not Path(cfg.abbreviations_path).is_file():
        raise ConfigError(f"abbreviations file not found: {cfg.abbreviations_path}")
