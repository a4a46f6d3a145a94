"""
Settings service - builds a RunConfig from defaults, environment, config file and flags
"""

import logging
import os
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Union

from dotenv import load_dotenv
from pydantic import ValidationError

from backend.models.config import ExemplarSpec, RunConfig
from backend.utils.errors import ConfigError, IoError
from backend.utils.validation import InputValidator

logger = logging.getLogger(__name__)

ENV_PREFIX = "HNN_"


def _optional_float(raw: str) -> Optional[float]:
    return None if raw.strip().lower() in ("", "none", "unbounded") else float(raw)


def _optional_int(raw: str) -> Optional[int]:
    return None if raw.strip().lower() in ("", "none", "auto") else int(raw)


def _optional_str(raw: str) -> Optional[str]:
    return raw.strip() or None


def _string_list(raw: str) -> List[str]:
    return [item.strip() for item in raw.split(",") if item.strip()]


def parse_exemplars(raw: str) -> List[Dict[str, str]]:
    """'grumble=calls/g.wav, alarm=calls/a.wav' -> [{'label': ..., 'path': ...}, ...]"""
    exemplars = []
    for item in _string_list(raw):
        label, sep, path = item.partition("=")
        if not sep or not label.strip() or not path.strip():
            raise ValueError(f"exemplar '{item}' must look like label=path")
        exemplars.append({"label": label.strip().lower(), "path": path.strip()})
    return exemplars


FIELD_PARSERS: Dict[str, Callable[[str], Any]] = {
    "band_low_hz": float,
    "band_high_hz": float,
    "threshold": float,
    "n_neurons": int,
    "segment_length_s": float,
    "fft_length": int,
    "window": str.strip,
    "overlap": float,
    "max_passes": int,
    "capacity_policy": lambda raw: raw.strip().lower(),
    "grumble_min_consecutive": int,
    "alarm_min_consecutive": int,
    "grumble_separation_s": float,
    "alarm_separation_s": float,
    "noncall_max_s": _optional_float,
    "exemplars": parse_exemplars,
    "inputs": _string_list,
    "output": _optional_str,
    "model_path": _optional_str,
    "workers": _optional_int,
    "log_level": lambda raw: raw.strip().upper(),
}


def coerce_value(key: str, raw: str) -> Any:
    """Parse one textual setting into its typed value"""
    if key not in FIELD_PARSERS:
        raise KeyError(key)
    return FIELD_PARSERS[key](raw)


def parse_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a 'key = value' file; '#' starts a comment"""
    source = str(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read config file: {e.strerror or e}", path=source) from e

    values: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        key, sep, raw = content.partition("=")
        key = key.strip().lower()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got '{content}'", path=source, line=number)
        if key in values:
            raise ConfigError(f"'{key}' is set twice", path=source, line=number)
        try:
            values[key] = coerce_value(key, raw)
        except KeyError:
            raise ConfigError(f"unknown setting '{key}'", path=source, line=number) from None
        except ValueError as e:
            raise ConfigError(f"invalid value for '{key}': {e}", path=source, line=number) from e
    return values


def env_overrides(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    """HNN_* variables (after loading .env) as typed settings"""
    if environ is None:
        load_dotenv()
        environ = os.environ
    values: Dict[str, Any] = {}
    for key in FIELD_PARSERS:
        var = f"{ENV_PREFIX}{key.upper()}"
        if var not in environ:
            continue
        try:
            values[key] = coerce_value(key, environ[var])
        except ValueError as e:
            raise ConfigError(f"environment variable {var}: {e}") from e
    return values


def load_run_config(config_path: Optional[Union[str, Path]] = None,
                    overrides: Optional[Mapping[str, Any]] = None,
                    environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    """defaults < environment < config file < explicit overrides (None means 'not given')"""
    merged: Dict[str, Any] = RunConfig().model_dump()
    layers = [("environment", env_overrides(environ))]
    if config_path is not None:
        layers.append((str(config_path), parse_config_file(config_path)))
    if overrides:
        layers.append(("flags", {k: v for k, v in overrides.items() if v is not None}))

    for name, layer in layers:
        if layer:
            logger.debug(f"Settings from {name}: {sorted(layer)}")
        merged.update(layer)

    check = InputValidator.validate_run_config(merged)
    if not check["is_valid"]:
        raise ConfigError("; ".join(check["errors"]), path=str(config_path) if config_path else None)

    try:
        merged["exemplars"] = [ExemplarSpec(**e) if isinstance(e, dict) else e for e in merged["exemplars"]]
        return RunConfig(**merged)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "config"
        raise ConfigError(f"{location}: {first['msg']}",
                          path=str(config_path) if config_path else None) from e
