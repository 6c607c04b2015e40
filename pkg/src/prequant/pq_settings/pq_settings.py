#!/usr/bin/env python3

import logging
from collections.abc import Iterable, Mapping
from typing import Any

from prequant.pq_exceptions import ConfigError
from prequant.pq_settings.pq_settings_default import settings_default

TRUE_WORDS = ("1", "true", "yes", "on")
FALSE_WORDS = ("0", "false", "no", "off")


class Pq_Settings:
    def __init__(self, overrides: Mapping[str, Any] | None = None) -> None:
        """Flat "section.key" settings, starting from settings_default."""
        self.settings: dict[str, Any] = dict(settings_default)
        self.sources: dict[str, str] = {}
        if overrides:
            self.update(overrides, source="overrides")

    def __repr__(self) -> str:
        return f"Pq_Settings({len(self.sources)} overridden keys)"

    def reset(self) -> None:
        self.settings = dict(settings_default)
        self.sources.clear()

    def all_keys(self) -> list[str]:
        return list(self.settings)

    def contains(self, key: str) -> bool:
        return key in self.settings

    def value(self, key: str) -> Any:
        try:
            return self.settings[key]
        except KeyError:
            raise ConfigError(f"unknown setting {key!r}") from None

    __getitem__ = value

    def section(self, name: str) -> dict[str, Any]:
        """Keys of one section with the section prefix removed."""
        prefix = f"{name}."
        return {k.removeprefix(prefix): v for k, v in self.settings.items() if k.startswith(prefix)}

    def set_value(self, key: str, value: Any, *, source: str = "") -> None:
        if key not in settings_default:
            raise ConfigError(f"unknown setting {key!r}{f' in {source}' if source else ''}")
        coerced = coerce(key, value)
        if key.startswith("tolerance.") and not coerced > 0:
            raise ConfigError(f"{key} must be positive, got {value!r}")
        self.settings[key] = coerced
        self.sources[key] = source or "set"
        logging.debug(f"Setting {key} = {coerced!r} from {self.sources[key]}")

    def update(self, pairs: Mapping[str, Any] | Iterable[tuple[str, Any]], *, source: str = "") -> None:
        items = pairs.items() if isinstance(pairs, Mapping) else pairs
        for key, value in items:
            self.set_value(key, value, source=source)

    def load_text(self, text: str, *, source: str = "config") -> None:
        """Apply `section.key = value` lines, `#` starts a comment."""
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{source}:{lineno}: expected 'section.key = value', got {raw!r}")
            self.set_value(key.strip(), value.strip(), source=f"{source}:{lineno}")

    def load_file(self, path: str) -> None:
        from prequant.pq_io import Pq_IO

        try:
            text = Pq_IO.read_txt(path)
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        self.load_text(text, source=path)

    def load_assignments(self, assignments: Iterable[str]) -> None:
        """Apply `--set section.key=value` pairs."""
        for assignment in assignments:
            key, sep, value = assignment.partition("=")
            if not sep:
                raise ConfigError(f"expected section.key=value, got {assignment!r}")
            self.set_value(key.strip(), value.strip(), source="--set")

    def to_strings(self) -> dict[str, str]:
        return {k: format_value(v) for k, v in self.settings.items()}


def _coerce_scalar(key: str, default: Any, value: Any) -> Any:
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        word = str(value).strip().lower()
        if word in TRUE_WORDS:
            return True
        if word in FALSE_WORDS:
            return False
        raise ConfigError(f"{key} expects a boolean, got {value!r}")
    try:
        if isinstance(default, int):
            as_float = float(value)
            if not as_float.is_integer():
                raise ValueError
            return int(as_float)
        if isinstance(default, float):
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} expects a {type(default).__name__}, got {value!r}") from None
    return str(value)


def coerce(key: str, value: Any) -> Any:
    """Convert value to the type of the default of key; tuples accept comma-separated strings."""
    default = settings_default[key]
    if isinstance(default, tuple):
        items = [item.strip() for item in value.split(",") if item.strip()] if isinstance(value, str) else list(value)
        element = default[0] if default else 0.0
        return tuple(_coerce_scalar(key, element, item) for item in items)
    return _coerce_scalar(key, default, value)


def format_value(value: Any) -> str:
    """Inverse of coerce, floats by repr."""
    if isinstance(value, tuple):
        return ",".join(format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)
