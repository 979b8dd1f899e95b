"""Plain-text key=value run configuration.

A config file holds ``key=value`` lines (``#`` starts a comment). Keys match
the CLI flag names of the subcommand being run; unknown keys are rejected so
typos fail loudly. Flags given on the command line override file values.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

from .errors import ConfigError


def parse_config_file(path: Union[str, Path]) -> dict[str, str]:
    values: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(
                f"{path}:{lineno}: expected key=value, got {raw.strip()!r}"
            )
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def merge_config(
    file_values: dict[str, str],
    allowed: dict[str, type],
    cli_values: dict,
) -> dict:
    """File values (typed per ``allowed``) overridden by non-None CLI values."""
    resolved: dict = {}
    for key, raw in file_values.items():
        if key not in allowed:
            raise ConfigError(
                f"unknown config key {key!r}; allowed: {sorted(allowed)}"
            )
        target = allowed[key]
        try:
            if target is bool:
                low = raw.lower()
                if low not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(raw)
                resolved[key] = low in ("true", "1", "yes")
            else:
                resolved[key] = target(raw)
        except ValueError:
            raise ConfigError(
                f"config key {key!r}: cannot parse {raw!r} as {target.__name__}"
            ) from None
    for key, value in cli_values.items():
        if value is not None:
            resolved[key] = value
    return resolved
