"""Run configuration for the command line.

A config file is plain ``key = value`` lines; ``#`` starts a comment.
Recognised keys::

    work_limit = 100000000      # candidate evaluations per oracle call
    primes     = 2, 3, 5, 7
    budgets    = 2:7, 3:5, 5:3  # largest exponent per prime
    fast_budgets = 3:7, 5:5     # extra exponents checked in fast mode only
    q          = 1, 2, 3, 4     # parameter grids
    r          = 1, 2
    k          = 0, 1, 2, 4, 6
    format     = text           # text, json or csv
    output     = -              # path, or - for stdout
    jobs       = 1

Command-line flags override the file, which overrides the defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path

from .catalog import is_prime

FORMATS = ("text", "json", "csv")


class ConfigError(ValueError):
    pass


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"expected a list of integers, got {text!r}") from None


def _budgets(text: str) -> dict[int, int]:
    out = {}
    for item in text.replace(",", " ").split():
        p, sep, m = item.partition(":")
        if not sep:
            raise ConfigError(f"budget entries look like p:m, got {item!r}")
        out[int(p)] = int(m)
    return out


@dataclass
class RunConfig:
    work_limit: int = 10**8
    primes: list[int] = field(default_factory=lambda: [2, 3, 5, 7, 11, 13])
    budgets: dict[int, int] = field(
        default_factory=lambda: {2: 7, 3: 5, 5: 3, 7: 3, 11: 2, 13: 2}
    )
    fast_budgets: dict[int, int] = field(default_factory=lambda: {3: 7, 5: 5, 7: 5})
    q: list[int] = field(default_factory=lambda: [1, 2, 3, 4])
    r: list[int] = field(default_factory=lambda: [1, 2])
    k: list[int] = field(default_factory=lambda: [0, 1, 2, 4, 6])
    format: str = "text"
    output: str = "-"
    jobs: int = 1

    _PARSERS = {
        "work_limit": int,
        "primes": _ints,
        "budgets": _budgets,
        "fast_budgets": _budgets,
        "q": _ints,
        "r": _ints,
        "k": _ints,
        "format": str.strip,
        "output": str.strip,
        "jobs": int,
    }

    def validate(self) -> RunConfig:
        if self.work_limit <= 0:
            raise ConfigError("work_limit must be positive")
        if self.jobs <= 0:
            raise ConfigError("jobs must be positive")
        bad = [p for p in [*self.primes, *self.budgets, *self.fast_budgets] if not is_prime(p)]
        if bad:
            raise ConfigError(f"not prime: {bad}")
        if any(m < 0 for m in [*self.budgets.values(), *self.fast_budgets.values()]):
            raise ConfigError("budgets must be nonnegative")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        return self

    def update(self, values: dict[str, object]) -> RunConfig:
        names = {f.name for f in fields(self)}
        for key, val in values.items():
            if val is None:
                continue
            if key not in names:
                raise ConfigError(f"unknown config key {key!r}")
            setattr(self, key, val)
        return self

    def budget(self, p: int) -> int:
        return self.budgets.get(p, 2)

    def param_grid(self, names: list[str]) -> dict[str, list[int]]:
        return {n: getattr(self, n) for n in names if n in ("q", "r", "k")}

    @classmethod
    def from_file(cls, path: str | Path) -> RunConfig:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        parser.read_string("[run]\n" + text)
        cfg = cls()
        values = {}
        for key, raw in parser["run"].items():
            if key not in cls._PARSERS:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                values[key] = cls._PARSERS[key](raw)
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from None
        return cfg.update(values).validate()
