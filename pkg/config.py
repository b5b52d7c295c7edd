"""
Run configuration for the verification CLI.

Precedence: CLI flags > --config file > environment > defaults.
The config file is a flat ``key = value`` file with ``#`` comments, read
with python-dotenv; the environment supplies the worker count and the
finite-difference step.
"""
import logging
import math
import os
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Mapping

from dotenv import dotenv_values

from clifford import delta, minimal_multiplicity, parse_pair
from errors import ConfigError, DomainError
from report import CheckRecord

logger = logging.getLogger(__name__)

# ============================================================
# CONSTANTS
# ============================================================
SUITES = ("clifford", "geometry", "isomorphisms", "nearly-kahler", "star-ricci")
ALL = "all"
FD_SUITES = ("nearly-kahler", ALL)
FD_MARGIN = 0.15
FORMATS = ("tree", "table")

ENV_WORKERS = "ISOFKM_WORKERS"
ENV_FD_STEP = "ISOFKM_FD_STEP"

DEFAULTS: dict[str, Any] = {
    "suite": None,
    "m": 3,
    "k": 2,
    "pair": None,
    "theta": 0.3,
    "samples": 20,
    "seed": 0,
    "tol": (),
    "fd_step": 1e-4,
    "output": None,
    "format": "tree",
    "workers": 1,
    "timing": False,
    "verbose": False,
}

# keys that never enter the report, so reruns with other workers or paths stay byte-identical
_NOT_ECHOED = ("workers", "output", "timing", "verbose")


# ============================================================
# RUN CONFIG
# ============================================================
@dataclass(frozen=True)
class RunConfig:
    suite: str
    m: int = 3
    k: int = 2
    pair: tuple[int, int] | None = None
    theta: float = 0.3
    samples: int = 20
    seed: int = 0
    tol_overrides: tuple[tuple[str, float], ...] = ()
    fd_step: float = 1e-4
    output: str | None = None
    format: str = "tree"
    workers: int = 1
    timing: bool = False
    verbose: bool = False

    def __post_init__(self):
        validate(self)

    @property
    def suites(self) -> tuple[str, ...]:
        return SUITES if self.suite == ALL else (self.suite,)

    def as_record(self) -> dict[str, Any]:
        record = asdict(self)
        for key in _NOT_ECHOED:
            record.pop(key)
        record["pair"] = list(self.pair) if self.pair else None
        record["tol_overrides"] = {name: value for name, value in self.tol_overrides}
        return record


def in_fd_band(theta: float) -> bool:
    return FD_MARGIN < theta < math.pi / 4 - FD_MARGIN


def validate(config: RunConfig) -> None:
    if config.suite not in SUITES + (ALL,):
        raise ConfigError(f"unknown suite {config.suite!r}; choose from {', '.join(SUITES + (ALL,))}")
    if config.m < 1 or config.k < 1:
        raise ConfigError(f"m and k must be >= 1, got m={config.m}, k={config.k}")
    if config.pair is None and config.k * delta(config.m) - config.m - 1 < 1:
        raise ConfigError(
            f"empty family for m={config.m}, k={config.k}; minimal multiplicity is k={minimal_multiplicity(config.m)}"
        )
    if config.suite in FD_SUITES:
        if not in_fd_band(config.theta):
            raise ConfigError(
                f"theta={config.theta} outside the finite-difference band "
                f"({FD_MARGIN}, {math.pi / 4 - FD_MARGIN:.6f}) required by --suite {config.suite}"
            )
    elif not 0.0 < config.theta < math.pi / 4:
        raise ConfigError(f"theta must lie in (0, pi/4), got {config.theta}")
    if config.samples < 1:
        raise ConfigError(f"samples must be >= 1, got {config.samples}")
    if not 0 <= config.seed < 2 ** 64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {config.seed}")
    if not config.fd_step > 0.0:
        raise ConfigError(f"fd_step must be positive, got {config.fd_step}")
    if config.format not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}, got {config.format!r}")
    if config.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {config.workers}")
    for name, value in config.tol_overrides:
        if not value >= 0.0:
            raise ConfigError(f"tolerance override {name}={value} must be non-negative")


# ============================================================
# PARSING
# ============================================================
def _as_int(key: str, value: Any) -> int:
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be an integer, got {value!r}") from exc


def _as_float(key: str, value: Any) -> float:
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a number, got {value!r}") from exc


def _as_bool(key: str, value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"{key} must be a boolean, got {value!r}")


def parse_tol_overrides(items: Iterable[str] | str) -> tuple[tuple[str, float], ...]:
    """``name=value`` items (a string may hold several, separated by commas or spaces)."""
    if isinstance(items, str):
        items = items.replace(",", " ").split()
    overrides: dict[str, float] = {}
    for item in items:
        name, sep, value = str(item).partition("=")
        if not sep or not name.strip():
            raise ConfigError(f"tolerance override must look like name=value, got {item!r}")
        overrides[name.strip()] = _as_float(f"tol {name.strip()}", value.strip())
    return tuple(sorted(overrides.items()))


def parse_pair_option(value: Any) -> tuple[int, int] | None:
    if value in (None, ""):
        return None
    try:
        return parse_pair(value)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def read_config_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for key, value in dotenv_values(path).items():
        name = key.strip().lower().replace("-", "_")
        if name not in DEFAULTS:
            raise ConfigError(f"{path}: unknown key {key!r}")
        if value is None:
            raise ConfigError(f"{path}: key {key!r} has no value")
        values[name] = value
    logger.debug("read %d keys from %s", len(values), path)
    return values


def environment_values(environ: Mapping[str, str] | None = None) -> dict[str, str]:
    environ = os.environ if environ is None else environ
    values = {}
    if environ.get(ENV_WORKERS):
        values["workers"] = environ[ENV_WORKERS]
    if environ.get(ENV_FD_STEP):
        values["fd_step"] = environ[ENV_FD_STEP]
    return values


def build_config(values: Mapping[str, Any]) -> RunConfig:
    """RunConfig from a flat mapping of raw (string or typed) values."""
    merged = {**DEFAULTS, **{k: v for k, v in values.items() if v is not None}}
    if merged["suite"] is None:
        raise ConfigError("no suite given (use --suite or a 'suite' key in the config file)")
    tol = merged["tol"]
    return RunConfig(
        suite=str(merged["suite"]),
        m=_as_int("m", merged["m"]),
        k=_as_int("k", merged["k"]),
        pair=parse_pair_option(merged["pair"]),
        theta=_as_float("theta", merged["theta"]),
        samples=_as_int("samples", merged["samples"]),
        seed=_as_int("seed", merged["seed"]),
        tol_overrides=parse_tol_overrides(tol) if tol else (),
        fd_step=_as_float("fd_step", merged["fd_step"]),
        output=str(merged["output"]) if merged["output"] else None,
        format=str(merged["format"]),
        workers=_as_int("workers", merged["workers"]),
        timing=_as_bool("timing", merged["timing"]),
        verbose=_as_bool("verbose", merged["verbose"]),
    )


def load_config(cli_values: Mapping[str, Any] | None = None, config_path: str | Path | None = None,
                environ: Mapping[str, str] | None = None) -> RunConfig:
    values: dict[str, Any] = dict(environment_values(environ))
    if config_path:
        values.update(read_config_file(config_path))
    for key, value in (cli_values or {}).items():
        if key in DEFAULTS and value not in (None, [], ()):
            values[key] = value
    return build_config(values)


# ============================================================
# TOLERANCE OVERRIDES
# ============================================================
def override_for(name: str, overrides: tuple[tuple[str, float], ...]) -> float | None:
    """Tolerance of the longest override whose name equals or prefixes ``name``."""
    best: tuple[int, float] | None = None
    for prefix, value in overrides:
        if name.startswith(prefix) and (best is None or len(prefix) > best[0]):
            best = (len(prefix), value)
    return None if best is None else best[1]


def apply_tolerance_overrides(records: Iterable[CheckRecord],
                              overrides: tuple[tuple[str, float], ...]) -> list[CheckRecord]:
    out = []
    for record in records:
        tolerance = override_for(record.name, overrides)
        out.append(record if tolerance is None else replace(record, tolerance=tolerance))
    return out
