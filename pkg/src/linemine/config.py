"""Configuration file loading and merging for linemine."""

##############################################################################
# Python imports.
import argparse
import dataclasses
import typing
from pathlib import Path
from typing import Any

##############################################################################
# PyYAML imports.
import yaml

##############################################################################
# Local imports.
from linemine.run_config import RunConfig, run_config_defaults

##############################################################################
# Configuration files looked for in the working directory, in order.
DEFAULT_CONFIG_FILES = ["linemine.yaml", "linemine.yml"]


class ConfigError(Exception):
    """Raised when the configuration can't be used."""


def load_config(config_path: Path | None = None) -> dict[str, Any]:
    """Load configuration from a YAML file.

    If no config_path is provided, searches for the default config files
    (linemine.yaml, linemine.yml) in the current directory.

    Args:
        config_path: Optional path to a specific configuration file.

    Returns:
        The configuration values, or an empty dict if no file was found.

    Raises:
        ConfigError: If the given file is missing or isn't a YAML mapping.
    """
    if config_path is not None:
        if not config_path.exists():
            raise ConfigError(f"Config file not found: {config_path}")
        return _load_yaml_file(config_path)
    for config_file in DEFAULT_CONFIG_FILES:
        if (candidate := Path(config_file)).exists():
            return _load_yaml_file(candidate)
    return {}


def _load_yaml_file(path: Path) -> dict[str, Any]:
    """Load and parse a YAML file.

    Args:
        path: Path to the YAML file.

    Returns:
        The parsed mapping, with dashes in keys turned into underscores.
    """
    try:
        content = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as error:
        raise ConfigError(f"{path}: invalid YAML: {error}") from None
    # Empty files, or files with only comments.
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ConfigError(f"{path}: must contain a YAML mapping, got {type(content).__name__}")
    return {str(key).replace("-", "_"): value for key, value in content.items()}


def _coerce(name: str, value: Any, hint: Any) -> Any:
    """Check and convert a configuration file value for a RunConfig field.

    Args:
        name: The name of the field.
        value: The value from the configuration file.
        hint: The resolved type hint of the field.

    Returns:
        The value, converted to the field's type.

    Raises:
        ConfigError: If the value has the wrong type.
    """
    args = typing.get_args(hint)
    optional = type(None) in args
    base = next((arg for arg in args if arg is not type(None)), hint) if optional else hint
    if value is None and optional:
        return None
    if base is Path and isinstance(value, str) and value:
        return Path(value).expanduser()
    if base is bool and isinstance(value, bool):
        return value
    if base is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if base is str and isinstance(value, str):
        return value
    if typing.get_origin(base) is list:
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        if isinstance(value, list) and all(isinstance(item, str) for item in value):
            return value
    raise ConfigError(f"{name} in the configuration file has an unexpected type ({type(value).__name__})")


def merge_config_with_args(config: dict[str, Any], args: argparse.Namespace) -> None:
    """Merge configuration file values with command-line arguments.

    Command-line arguments take precedence over configuration file values:
    a file value is only used where the argument still has its default.
    Keys that aren't RunConfig fields, or that the command doesn't take,
    are ignored.

    Args:
        config: The configuration file values.
        args: The parsed command-line arguments, updated in place.

    Raises:
        ConfigError: If a file value has the wrong type.
    """
    defaults = run_config_defaults()
    hints = typing.get_type_hints(RunConfig)
    for name, value in config.items():
        if name not in defaults or not hasattr(args, name):
            continue
        if getattr(args, name) == defaults[name]:
            setattr(args, name, _coerce(name, value, hints[name]))


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Build the run configuration from (merged) command-line arguments.

    Args:
        args: The parsed command-line arguments.

    Returns:
        The validated run configuration.

    Raises:
        ConfigError: If any value can't be used.
    """
    run_config = RunConfig(
        **{
            run_field.name: getattr(args, run_field.name)
            for run_field in dataclasses.fields(RunConfig)
            if hasattr(args, run_field.name)
        }
    )
    if errors := run_config.validate():
        raise ConfigError("; ".join(errors))
    return run_config


### config.py ends here
