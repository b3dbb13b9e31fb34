"""Run configuration shared by the command line tools.

Configuration files are INI with a single ``[pseudophi]`` section::

    [pseudophi]
    seed = 42
    workers = 4
    db = lists/
    input = masked.txt
    output = pseudo.txt
    memoize = true
    age_range = 1-90
    date_window = 2000-2020
    fill_mask_endpoint = http://127.0.0.1:8080

Precedence, lowest first: built-in defaults, the config file, the
``PSEUDO_SEED`` environment variable (seed only), command line flags.
"""

from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

from .generators import DEFAULT_AGE_RANGE, DEFAULT_DATE_WINDOW, GeneratorConfig

SECTION = "pseudophi"
SEED_ENV = "PSEUDO_SEED"


class ConfigError(ValueError):
    pass


def _range(value: str, name: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in str(value).split("-"))
    except ValueError:
        raise ConfigError(f"{name}: expected LOW-HIGH, got {value!r}") from None
    if hi < lo:
        raise ConfigError(f"{name}: empty range {value!r}")
    return lo, hi


def _bool(value: str, name: str) -> bool:
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{name}: expected true/false, got {value!r}")


@dataclass
class RunConfig:
    seed: int | None = None
    workers: int = 1
    db: str | None = None
    rules: str | None = None
    input: str | None = None
    output: str | None = None
    report: str | None = None
    strict: bool = False
    memoize: bool = True
    age_range: tuple[int, int] = DEFAULT_AGE_RANGE
    date_window: tuple[int, int] = DEFAULT_DATE_WINDOW
    fill_mask_endpoint: str | None = None
    fill_mask_timeout: float = 10.0
    fill_mask_max_in_flight: int = 4
    retries: int = 3
    retry_delay: float = 0.0
    block_lines: int = 2000

    def update(self, values: Mapping[str, Any], source: str) -> "RunConfig":
        known = {f.name: f for f in fields(self)}
        for key, value in values.items():
            if value is None:
                continue
            if key not in known:
                raise ConfigError(f"{source}: unknown setting {key!r}")
            setattr(self, key, self._coerce(key, value, source))
        return self

    @staticmethod
    def _coerce(key: str, value: Any, source: str):
        name = f"{source}: {key}"
        if not isinstance(value, str):
            return value
        try:
            if key in ("seed", "workers", "retries", "block_lines", "fill_mask_max_in_flight"):
                return int(value)
            if key in ("fill_mask_timeout", "retry_delay"):
                return float(value)
        except ValueError:
            raise ConfigError(f"{name}: not a number: {value!r}") from None
        if key in ("strict", "memoize"):
            return _bool(value, name)
        if key in ("age_range", "date_window"):
            return _range(value, name)
        return value or None

    def validate(self, need_seed: bool = False) -> None:
        if need_seed and self.seed is None:
            raise ConfigError(f"a seed is required (--seed, {SEED_ENV} or 'seed' in the config file)")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.retries < 0:
            raise ConfigError("retries must be non-negative")
        lo, hi = self.age_range
        if not 0 <= lo <= hi <= 120:
            raise ConfigError(f"age_range {lo}-{hi} must lie within 0-120")
        for key in ("db", "rules", "input"):
            p = getattr(self, key)
            if p is not None and not Path(p).exists():
                raise ConfigError(f"--{key}: no such file or directory: {p}")

    def generator_config(self) -> GeneratorConfig:
        return GeneratorConfig(
            memoize=self.memoize, age_range=self.age_range, date_window=self.date_window,
            fill_mask_endpoint=self.fill_mask_endpoint, fill_mask_timeout=self.fill_mask_timeout,
            fill_mask_max_in_flight=self.fill_mask_max_in_flight, retries=self.retries,
            retry_delay=self.retry_delay, strict=self.strict)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp[SECTION] = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, tuple):
                v = f"{v[0]}-{v[1]}"
            elif isinstance(v, bool):
                v = str(v).lower()
            cp[SECTION][f.name] = str(v)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def read_config_file(path: str | Path) -> dict[str, str]:
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if SECTION not in cp:
        raise ConfigError(f"{path}: missing [{SECTION}] section")
    return dict(cp[SECTION])


def resolve(config_file: str | None, flags: Mapping[str, Any],
            environ: Mapping[str, str] = os.environ) -> RunConfig:
    cfg = RunConfig()
    if config_file:
        cfg.update(read_config_file(config_file), str(config_file))
    if environ.get(SEED_ENV):
        cfg.update({"seed": environ[SEED_ENV]}, SEED_ENV)
    cfg.update(flags, "command line")
    return cfg
