"""Run configuration: parsing, schema validation and override merging.

A configuration is a JSON document (or YAML, for ``.yml``/``.yaml`` files) with
the top-level keys ``system``, ``grid``, ``solver`` and ``signal``::

    {"system": {"K": 1, "h1": 0, "h0": 0.2, "g0": 0, "v0": {"type": "zero"}},
     "grid": {"nL": 200, "nR": 200},
     "solver": {"dt_max": 1e-3, "cfl": 0.4, "t_end": 20, "sample_stride": 10,
                "boundary_guard": 1e-3, "eps": null},
     "signal": {"type": "expdecay", "a": 0.5, "lam": 1}}

Only ``system.K``, ``system.h1`` and ``system.h0`` are required. Unknown keys
are rejected; every error names the offending key path.
"""

import copy
import json
from pathlib import Path
from typing import Any, NamedTuple

import yaml

from .domain import (Bump, ConfigError, DomainError, Grid, Profile, SampledProfile, SineMode,
                     SolverConfig, SystemParams, ZeroProfile, validate, validate_grid,
                     validate_solver)
from .signals import (ExpDecay, InputSignal, PowerTail, RectPulse, SampledSignal, ZeroSignal,
                      validate_signal)

TOP_LEVEL = ("system", "grid", "solver", "signal")
SOLVER_KEYS = {"dt_max": "dt_max", "cfl": "cfl", "t_end": "t_end",
               "sample_stride": "sample_stride", "boundary_guard": "boundary_guard",
               "eps": "eps_override"}

# domain messages start with a field name; map it back to the config key
_FIELD_PATHS = {
    "spring_gain": "system.K",
    "target": "system.h1",
    "initial_position": "system.h0",
    "initial_velocity": "system.g0",
    "initial_profile": "system.v0",
}


class RunConfig(NamedTuple):
    params: SystemParams
    grid: Grid
    solver: SolverConfig
    signal: InputSignal


def _locate(problem: str) -> str:
    word = problem.split(" ", 1)[0]
    if word in _FIELD_PATHS:
        return f"{_FIELD_PATHS[word]}: {problem}"
    if word.startswith("v0"):
        return f"system.{problem}"
    return problem


def _section(raw: dict, key: str, allowed: set[str]) -> dict:
    value = raw.get(key, {})
    if value is None:
        value = {}
    if not isinstance(value, dict):
        raise ConfigError(f"'{key}' must be an object")
    unknown = sorted(set(value) - allowed)
    if unknown:
        raise ConfigError(f"unknown key '{key}.{unknown[0]}'")
    return value


def _number(section: dict, path: str, key: str, default: Any = None, required: bool = False):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key '{path}.{key}'")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ConfigError(f"'{path}.{key}' must be a number")
    return float(value)


def _integer(section: dict, path: str, key: str, default: int) -> int:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{path}.{key}' must be an integer")
    return value


def _numbers(section: dict, path: str, key: str) -> tuple[float, ...]:
    values = section.get(key)
    if not isinstance(values, list) or not all(
            isinstance(v, int | float) and not isinstance(v, bool) for v in values):
        raise ConfigError(f"'{path}.{key}' must be a list of numbers")
    return tuple(float(v) for v in values)


def _tagged(raw: Any, path: str, variants: dict[str, tuple[str, ...]]) -> tuple[str, dict]:
    if not isinstance(raw, dict):
        raise ConfigError(f"'{path}' must be an object with a 'type' key")
    kind = raw.get("type")
    if kind not in variants:
        raise ConfigError(f"'{path}.type' must be one of {', '.join(variants)}")
    unknown = sorted(set(raw) - {"type", *variants[kind]})
    if unknown:
        raise ConfigError(f"unknown key '{path}.{unknown[0]}'")
    return kind, raw


def parse_profile(raw: Any, path: str = "system.v0") -> Profile:
    kind, raw = _tagged(raw, path, {
        "zero": (), "sine": ("amplitude", "mode"),
        "bump": ("amplitude", "center", "width"), "samples": ("y", "v")})
    match kind:
        case "zero":
            return ZeroProfile()
        case "sine":
            return SineMode(_number(raw, path, "amplitude", required=True),
                            _integer(raw, path, "mode", 1))
        case "bump":
            return Bump(_number(raw, path, "amplitude", required=True),
                        _number(raw, path, "center", 0.0),
                        _number(raw, path, "width", required=True))
        case _:
            return SampledProfile(_numbers(raw, path, "y"), _numbers(raw, path, "v"))


def parse_signal(raw: Any, path: str = "signal") -> InputSignal:
    kind, raw = _tagged(raw, path, {
        "zero": (), "expdecay": ("a", "lam"), "rectpulse": ("a", "t0", "t1"),
        "powertail": ("a", "p"), "sampled": ("times", "values")})
    match kind:
        case "zero":
            return ZeroSignal()
        case "expdecay":
            return ExpDecay(_number(raw, path, "a", required=True),
                            _number(raw, path, "lam", required=True))
        case "rectpulse":
            return RectPulse(_number(raw, path, "a", required=True),
                             _number(raw, path, "t0", 0.0),
                             _number(raw, path, "t1", required=True))
        case "powertail":
            return PowerTail(_number(raw, path, "a", required=True),
                             _number(raw, path, "p", required=True))
        case _:
            return SampledSignal(_numbers(raw, path, "times"), _numbers(raw, path, "values"))


def config_from_dict(raw: Any) -> RunConfig:
    """Validate a decoded configuration document and apply defaults.

    Raises
    - ConfigError: unknown or mistyped keys, or violated domain invariants.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config must be an object")
    unknown = sorted(set(raw) - set(TOP_LEVEL))
    if unknown:
        raise ConfigError(f"unknown key '{unknown[0]}'")

    system = _section(raw, "system", {"K", "h1", "h0", "g0", "v0"})
    grid_raw = _section(raw, "grid", {"nL", "nR"})
    solver_raw = _section(raw, "solver", set(SOLVER_KEYS))

    params = SystemParams(
        K=_number(system, "system", "K", required=True),
        h1=_number(system, "system", "h1", required=True),
        h0=_number(system, "system", "h0", required=True),
        g0=_number(system, "system", "g0", 0.0),
        v0=parse_profile(system["v0"]) if "v0" in system else ZeroProfile(),
    )
    grid = Grid(_integer(grid_raw, "grid", "nL", 200), _integer(grid_raw, "grid", "nR", 200))

    defaults = SolverConfig()
    solver_args = {}
    for key, attr in SOLVER_KEYS.items():
        if key == "sample_stride":
            solver_args[attr] = _integer(solver_raw, "solver", key, defaults.sample_stride)
        elif key == "eps" and solver_raw.get("eps") is None:
            solver_args[attr] = None
        else:
            solver_args[attr] = _number(solver_raw, "solver", key, getattr(defaults, attr))
    solver = SolverConfig(**solver_args)

    sig = parse_signal(raw["signal"]) if raw.get("signal") is not None else ZeroSignal()

    problems = []
    for check, value in ((validate, params), (validate_grid, grid),
                         (validate_solver, solver), (validate_signal, sig)):
        try:
            check(value)
        except DomainError as e:
            problems.extend(_locate(p) for p in e.problems)
    if problems:
        raise ConfigError("; ".join(problems))
    return RunConfig(params, grid, solver, sig)


def decode(text: str, fmt: str = "json") -> Any:
    """Decode configuration text; ``fmt`` is ``json`` or ``yaml``."""
    if fmt == "yaml":
        try:
            return yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
            raise ConfigError(f"invalid YAML{where}: {getattr(e, 'problem', e)}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e


def parse_config(text: str, fmt: str = "json") -> RunConfig:
    return config_from_dict(decode(text, fmt))


def read_document(path: Path) -> Any:
    """Read and decode a JSON or YAML file chosen by suffix."""
    fmt = "yaml" if path.suffix in (".yml", ".yaml") else "json"
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise ConfigError(f"config file '{path}' was not found") from e
    except OSError as e:
        raise ConfigError(f"cannot read config file '{path}': {e}") from e
    return decode(text, fmt)


def load_config(path: Path) -> RunConfig:
    return config_from_dict(read_document(path))


def deep_merge(base: dict, override: dict) -> dict:
    """Return ``base`` updated recursively with ``override``; inputs are not modified.

    Tagged objects (those with a ``type`` key) are replaced whole when the type changes.
    """
    merged = copy.deepcopy(base)
    for key, value in override.items():
        current = merged.get(key)
        if (isinstance(current, dict) and isinstance(value, dict)
                and current.get("type") == value.get("type", current.get("type"))):
            merged[key] = deep_merge(current, value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged
