"""Key-value config files and point literals."""

from __future__ import annotations

import configparser
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Malformed configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


def parse_complex(token: str) -> complex:
    """``"re:im"`` or a plain real."""
    token = token.strip()
    if ":" in token:
        re_, im = token.split(":", 1)
        return complex(float(re_), float(im))
    return complex(float(token), 0.0)


def parse_point(text) -> np.ndarray:
    """Comma-separated ``re:im`` pairs, e.g. ``"1,0:0.5"``."""
    if isinstance(text, (list, tuple, np.ndarray)):
        return np.asarray(text, dtype=complex)
    return np.array([parse_complex(t) for t in str(text).split(",") if t.strip()], dtype=complex)


def read_config(source, allowed) -> dict:
    """Parse ``key = value`` lines (``#`` comments) and reject keys not in ``allowed``."""
    text = Path(source).read_text() if isinstance(source, Path) else str(source)
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc).splitlines()[0]) from exc
    cfg = dict(cp["config"])
    for key in cfg:
        if key not in allowed:
            raise ConfigError(key, "unknown key")
    return cfg
