"""
Configuration management for popdyn.

Application settings come from dataclass defaults, an optional YAML file and
POPDYN_-prefixed environment variables. Scenario files (TOML, JSON or YAML) are
read here as plain dictionaries; their schema lives in pipeline.schemas.
"""

import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from utils.exceptions import ConfigurationError, ScenarioError

ROOT = Path(__file__).resolve().parents[1]
PRESETS_DIR = ROOT / "presets"
ENV_PREFIX = "POPDYN_"


@dataclass
class LoggingSettings:
    level: str = "INFO"
    file: Optional[str] = None


@dataclass
class IntegratorSettings:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = math.inf
    sample_dt: float = 0.1


@dataclass
class ConcurrencySettings:
    max_workers: int = 4


@dataclass
class EquilibriaSettings:
    grid_density: int = 16
    hyperbolicity_eps: float = 1e-6
    newton_max_iter: int = 50
    duplicate_tol: float = 1e-7


@dataclass
class InvasionSettings:
    extinct_eps: float = 1e-3
    settle_time: float = 100.0


@dataclass
class AveragingSettings:
    near_zero_hopf: float = 0.01
    simpson_nodes: int = 1025
    return_horizon: float = 2000.0
    n_iterates: int = 20
    start_offset: float = 0.05
    collapse_fraction: float = 1e-3


@dataclass
class NormalFormSettings:
    l1_convention: str = "tabulated"


@dataclass
class ChaosSettings:
    seed: int = 20240611
    box_ratio: float = math.sqrt(2.0)
    n_scales: int = 20
    zero_one_threshold: float = 0.9
    c_draws: int = 100


@dataclass
class PopdynConfig:
    """Structured configuration class with defaults."""

    logging: LoggingSettings = field(default_factory=LoggingSettings)
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    concurrency: ConcurrencySettings = field(default_factory=ConcurrencySettings)
    equilibria: EquilibriaSettings = field(default_factory=EquilibriaSettings)
    invasion: InvasionSettings = field(default_factory=InvasionSettings)
    averaging: AveragingSettings = field(default_factory=AveragingSettings)
    normal_form: NormalFormSettings = field(default_factory=NormalFormSettings)
    chaos: ChaosSettings = field(default_factory=ChaosSettings)


def load_config(config_path: Optional[Path] = None) -> Dict[str, Any]:
    """
    Load configuration from YAML file with defaults and environment variable support.

    Args:
        config_path: Path to configuration file (optional)

    Returns:
        Configuration dictionary

    Raises:
        ConfigurationError: If configuration is invalid
    """
    config_dict = _dataclass_to_dict(PopdynConfig())

    if config_path and config_path.exists():
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                file_config = yaml.safe_load(f)
                if file_config:
                    config_dict = _merge_configs(config_dict, file_config)
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML in config file: {e}")
        except IOError as e:
            raise ConfigurationError(f"Cannot read config file {config_path}: {e}")

    config_dict = _apply_env_overrides(config_dict)

    _validate_config(config_dict)

    return config_dict


def _dataclass_to_dict(obj) -> Dict[str, Any]:
    """Convert dataclass to dictionary recursively."""
    if hasattr(obj, '__dataclass_fields__'):
        return {name: _dataclass_to_dict(getattr(obj, name)) for name in obj.__dataclass_fields__}
    elif isinstance(obj, dict):
        return {k: _dataclass_to_dict(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [_dataclass_to_dict(item) for item in obj]
    else:
        return obj


def _merge_configs(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge configuration dictionaries."""
    result = base.copy()

    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = _merge_configs(result[key], value)
        else:
            result[key] = value

    return result


def _apply_env_overrides(config: Dict[str, Any]) -> Dict[str, Any]:
    """
    Apply environment variable overrides to configuration.

    Environment variables use the POPDYN_ prefix and double underscores for
    nested keys.

    Examples:
        POPDYN_INTEGRATOR__REL_TOL=1e-8
        POPDYN_LOGGING__LEVEL=DEBUG
    """
    for env_var, value in os.environ.items():
        if not env_var.startswith(ENV_PREFIX):
            continue

        key_path = env_var[len(ENV_PREFIX):].lower().split('__')
        _set_nested_value(config, key_path, _convert_value(value))

    return config


def _convert_value(value: str) -> Any:
    """Convert an environment or override string to the matching Python type."""
    lowered = value.strip().lower()
    if lowered in ('true', 'yes', 'on'):
        return True
    elif lowered in ('false', 'no', 'off'):
        return False

    try:
        return int(value)
    except ValueError:
        pass

    try:
        return float(value)
    except ValueError:
        pass

    if value.startswith(('[', '{')):
        try:
            return json.loads(value)
        except json.JSONDecodeError:
            pass

    return value


def _set_nested_value(config: Dict[str, Any], key_path: List[str], value: Any):
    """Set a value in a nested dictionary using a list of keys."""
    current = config

    for key in key_path[:-1]:
        if key not in current or not isinstance(current[key], dict):
            current[key] = {}
        current = current[key]

    current[key_path[-1]] = value


def _validate_config(config: Dict[str, Any]):
    """
    Validate configuration values.

    Raises:
        ConfigurationError: If configuration is invalid
    """
    integrator = config.get('integrator', {})
    for key in ('rel_tol', 'abs_tol'):
        tol = integrator.get(key)
        if not isinstance(tol, (int, float)) or not 0 < tol < 1:
            raise ConfigurationError(f"integrator.{key} must be a number in (0, 1)")

    max_step = integrator.get('max_step', math.inf)
    if not isinstance(max_step, (int, float)) or max_step <= 0:
        raise ConfigurationError("integrator.max_step must be a positive number")

    max_workers = config.get('concurrency', {}).get('max_workers', 4)
    if not isinstance(max_workers, int) or max_workers < 1:
        raise ConfigurationError("concurrency.max_workers must be a positive integer")

    grid_density = config.get('equilibria', {}).get('grid_density', 16)
    if not isinstance(grid_density, int) or grid_density < 8:
        raise ConfigurationError("equilibria.grid_density must be an integer >= 8")

    log_level = config.get('logging', {}).get('level', 'INFO')
    valid_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
    if not isinstance(log_level, str) or log_level.upper() not in valid_levels:
        raise ConfigurationError(f"logging.level must be one of {valid_levels}")

    convention = config.get('normal_form', {}).get('l1_convention', 'tabulated')
    if convention not in ('tabulated', 'frequency', 'unit'):
        raise ConfigurationError("normal_form.l1_convention must be 'tabulated', 'frequency' or 'unit'")

    threshold = config.get('chaos', {}).get('zero_one_threshold', 0.9)
    if not isinstance(threshold, (int, float)) or not 0 < threshold < 1:
        raise ConfigurationError("chaos.zero_one_threshold must be in (0, 1)")


def resolve_scenario_path(source: Union[str, Path]) -> Path:
    """Map a preset name (e.g. 'ej311') or a file path to an existing file."""
    path = Path(source)
    if path.exists():
        return path

    preset = PRESETS_DIR / f"{path.stem}.toml"
    if path.suffix in ('', '.toml') and preset.exists():
        return preset

    raise ScenarioError(str(source), "no such file or preset")


def read_scenario_file(source: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a scenario into a plain dictionary.

    Args:
        source: File path or preset name

    Returns:
        Raw scenario dictionary (not yet schema-validated)

    Raises:
        ScenarioError: If the file is missing or cannot be parsed
    """
    path = resolve_scenario_path(source)
    suffix = path.suffix.lower()

    try:
        if suffix == '.toml':
            with open(path, 'rb') as f:
                data = tomllib.load(f)
        elif suffix == '.json':
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        elif suffix in ('.yaml', '.yml'):
            with open(path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f)
        else:
            raise ScenarioError(str(path), f"unsupported format '{suffix}'")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, yaml.YAMLError) as e:
        raise ScenarioError(str(path), f"parse error: {e}")
    except OSError as e:
        raise ScenarioError(str(path), f"cannot read file: {e}")

    if not isinstance(data, dict):
        raise ScenarioError(str(path), "top level must be a table")

    data.setdefault('name', path.stem)
    return data


def apply_overrides(data: Dict[str, Any], overrides: Optional[List[str]]) -> Dict[str, Any]:
    """
    Apply `key.path=value` overrides to a raw scenario dictionary.

    Values are converted exactly like environment overrides; the caller runs the
    result through the scenario schema.
    """
    if not overrides:
        return data

    result = json.loads(json.dumps(data))
    for item in overrides:
        if '=' not in item:
            raise ScenarioError(item, "override must have the form key=value")
        key, value = item.split('=', 1)
        key_path = [part for part in key.strip().split('.') if part]
        if not key_path:
            raise ScenarioError(item, "empty override key")
        _set_nested_value(result, key_path, _convert_value(value.strip()))

    return result


def get_config_template() -> str:
    """
    Get a YAML template for the configuration file.

    Returns:
        YAML configuration template as string
    """
    return """# Configuration for popdyn
logging:
  level: INFO
  file: null               # e.g. "out/popdyn.log"

integrator:
  rel_tol: 1.0e-9
  abs_tol: 1.0e-12
  max_step: .inf
  sample_dt: 0.1

concurrency:
  max_workers: 4           # overridden by --jobs

equilibria:
  grid_density: 16
  hyperbolicity_eps: 1.0e-6
  newton_max_iter: 50
  duplicate_tol: 1.0e-7

invasion:
  extinct_eps: 1.0e-3
  settle_time: 100.0

averaging:
  near_zero_hopf: 0.01     # relative distance to the zero-Hopf parameters
  simpson_nodes: 1025
  return_horizon: 2000.0   # Poincare validation time limit
  n_iterates: 20
  start_offset: 0.05
  collapse_fraction: 1.0e-3

normal_form:
  l1_convention: tabulated   # or "frequency" for the textbook coefficient, "unit" for an unweighted bracket

chaos:
  seed: 20240611
  box_ratio: 1.4142135623730951
  n_scales: 20
  zero_one_threshold: 0.9
  c_draws: 100
"""
