"""Readers for files written by :mod:`fpicli.output`.

Usage:
- ``read_trajectory(path, params, signal)`` returns a :class:`Trajectory` whose
  samples carry the fifteen CSV columns; the in-memory extras are NaN.
- ``read_report(path)`` returns a :class:`StabilityReport`.

Both raise :class:`~fpicli.domain.FpiError` naming the path when the file is
missing or malformed.
"""

import csv
import json
from pathlib import Path

from .diagnostics import CSV_FIELDS, SampleRecord, Trajectory
from .domain import FpiError, SystemParams
from .signals import InputSignal
from .stability import CheckResult, DecayFit, StabilityConstants, StabilityReport


def _open(path: Path):
    try:
        return path.open(mode="r", encoding="utf-8", newline="")
    except FileNotFoundError as e:
        raise FpiError(f"the file '{path}' was not found") from e


def read_trajectory(path: Path, params: SystemParams, signal: InputSignal,
                    termination: str = "completed", eps: float = 0.0) -> Trajectory:
    samples = []
    with _open(path) as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_FIELDS:
            raise FpiError(f"'{path}' does not have the trajectory header")
        for line_number, row in enumerate(reader, start=2):
            try:
                values = [float(v) for v in row]
                samples.append(SampleRecord(*values))
            except (ValueError, TypeError) as e:
                raise FpiError(f"'{path}' line {line_number}: {e}") from e
    return Trajectory(params, None, signal, samples, termination, "", eps)


def _number(value):
    # inverse of the string encoding of non-finite floats in output_json
    if isinstance(value, str) and value in ("inf", "-inf", "nan"):
        return float(value)
    return value


def report_from_dict(document: dict) -> StabilityReport:
    """Rebuild a report from its ``to_dict`` form or its JSON file."""
    try:
        constants = StabilityConstants(**{k: _number(v) for k, v in document["constants"].items()})
        checks = [CheckResult(**{k: _number(v) for k, v in c.items()}) for c in document["checks"]]
        fit = document.get("fit")
        if fit is not None:
            fit = DecayFit(_number(fit["rate"]), tuple(_number(w) for w in fit["window"]),
                           _number(fit["residual"]))
        return StabilityReport(constants, checks, fit, dict(document.get("meta", {})))
    except (KeyError, TypeError) as e:
        raise FpiError(f"malformed report: {e}") from e


def read_report(path: Path) -> StabilityReport:
    with _open(path) as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise FpiError(f"'{path}' line {e.lineno}: {e.msg}") from e
    return report_from_dict(document)
