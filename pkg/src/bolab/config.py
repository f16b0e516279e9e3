"""Flat ``key = value`` configuration files with ``#`` comments."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import ConfigError

__all__ = ["Config", "parse_config", "load_config"]


class Config:
    """String-valued mapping with typed, validating getters."""

    def __init__(self, values: dict, source: str = "<config>"):
        self.values = dict(values)
        self.source = source
        self._used = set()

    def __contains__(self, key):
        return key in self.values

    def _raw(self, key, default):
        self._used.add(key)
        if key not in self.values:
            if default is _REQUIRED:
                raise ConfigError(f"{self.source}: missing required key {key!r}")
            return default
        return self.values[key]

    def get_str(self, key, default=None):
        return self._raw(key, default if default is not None else _REQUIRED)

    def get_float(self, key, default=None) -> float:
        raw = self._raw(key, _REQUIRED if default is None else None)
        if raw is None:
            return float(default)
        try:
            v = float(raw)
        except ValueError:
            raise ConfigError(f"{self.source}: {key} = {raw!r} is not a number") from None
        if not math.isfinite(v):
            raise ConfigError(f"{self.source}: {key} must be finite")
        return v

    def get_int(self, key, default=None) -> int:
        v = self.get_float(key, default)
        if v != int(v):
            raise ConfigError(f"{self.source}: {key} must be an integer")
        return int(v)

    def get_list(self, key, default=None) -> Optional[list]:
        raw = self._raw(key, _REQUIRED if default is None else None)
        if raw is None:
            return list(default)
        try:
            return [float(s) for s in raw.split(",") if s.strip()]
        except ValueError:
            raise ConfigError(f"{self.source}: {key} = {raw!r} is not a comma list of numbers") from None

    def get_times(self, key="times", default=None) -> np.ndarray:
        """Comma list, or ``geom:start:stop:count`` for a geometric range."""
        raw = self._raw(key, _REQUIRED if default is None else None)
        if raw is None:
            t = np.asarray(default, dtype=float)
        elif raw.strip().startswith("geom:"):
            parts = raw.strip().split(":")[1:]
            if len(parts) != 3:
                raise ConfigError(f"{self.source}: {key} geometric range needs start:stop:count")
            try:
                a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            except ValueError:
                raise ConfigError(f"{self.source}: bad geometric range {raw!r}") from None
            if not (a > 0 and b > a and n >= 2):
                raise ConfigError(f"{self.source}: geometric range needs 0 < start < stop, count >= 2")
            t = np.geomspace(a, b, n)
        else:
            t = np.asarray(self.get_list(key), dtype=float)
        if t.size and np.any(np.diff(t) <= 0):
            raise ConfigError(f"{self.source}: {key} must be strictly increasing")
        return t

    def get_path(self, key, default=None, base: Optional[Path] = None) -> Optional[Path]:
        raw = self._raw(key, default if default is not None else None)
        if raw is None:
            return None
        p = Path(raw)
        if not p.is_absolute() and base is not None:
            p = base / p
        return p

    def check_keys(self, allowed: Iterable[str]):
        unknown = sorted(set(self.values) - set(allowed))
        if unknown:
            raise ConfigError(f"{self.source}: unknown key(s) {', '.join(unknown)}")


_REQUIRED = object()


def parse_config(text: str, source: str = "<config>") -> Config:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return Config(values, source)


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))
