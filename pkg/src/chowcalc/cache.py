"""On-disk JSON cache with atomic writes.

Files live under a cache directory chosen by, in order: an explicit
argument, the ``CHOWCALC_CACHE_DIR`` environment variable, or
``~/.cache/chowcalc``.  Every write goes to a temporary file in the same
directory and is moved into place with :func:`os.replace`.
"""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

ENV_VAR = "CHOWCALC_CACHE_DIR"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "chowcalc"


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def frac_to_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def str_to_frac(s: str) -> Fraction:
    return Fraction(s)


class Cache:
    """A directory of JSON documents addressed by a relative name."""

    def __init__(self, root=None):
        self.root = Path(root) if root is not None else default_cache_dir()

    def path(self, name: str) -> Path:
        return self.root / name

    def load(self, name: str):
        p = self.path(name)
        if not p.exists():
            return None
        try:
            with open(p, encoding="utf-8") as fh:
                return json.load(fh)
        except (OSError, json.JSONDecodeError):
            return None

    def store(self, name: str, obj) -> Path:
        p = self.path(name)
        atomic_write_text(p, json.dumps(obj, indent=1, sort_keys=False) + "\n")
        return p

    def entries(self) -> list:
        if not self.root.exists():
            return []
        return sorted(str(p.relative_to(self.root)) for p in self.root.rglob("*.json"))

    def clear(self) -> int:
        n = 0
        for name in self.entries():
            self.path(name).unlink()
            n += 1
        return n
