"""Serialization of trajectories and reports, and plain-text summaries.

Trajectories are written as CSV with the fixed header :data:`CSV_FIELDS`;
floats use 17 significant digits so values read back bit-exactly. Reports are
JSON documents with the keys ``constants``, ``checks``, ``fit`` and ``meta``.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .diagnostics import CSV_FIELDS, Trajectory, energy_residual
from .domain import FpiError
from .stability import StabilityReport


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def write_trajectory(traj: Trajectory, path: Path):
    """Write one CSV row per sample; raises :class:`FpiError` naming ``path`` on I/O failure."""
    try:
        with path.open(mode="w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_FIELDS)
            for sample in traj.samples:
                writer.writerow(format_float(v) for v in sample.row())
    except OSError as e:
        raise FpiError(f"cannot write trajectory to '{path}': {e}") from e


NON_FINITE = {math.inf: "inf", -math.inf: "-inf"}


def _finite_json(value):
    # inf and nan become the strings "inf", "-inf" and "nan"
    if isinstance(value, float) and not math.isfinite(value):
        return NON_FINITE.get(value, "nan")
    if isinstance(value, dict):
        return {k: _finite_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_json(v) for v in value]
    return value


def output_json(document: dict) -> str:
    """Strict JSON; non-finite floats are written as strings."""
    return json.dumps(_finite_json(document), indent=4, allow_nan=False)


def write_json(document: dict, path: Path):
    try:
        path.write_text(output_json(document) + "\n", encoding="utf-8")
    except OSError as e:
        raise FpiError(f"cannot write report to '{path}': {e}") from e


def write_report(report: StabilityReport, path: Path):
    write_json(report.to_dict(), path)


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def output_trajectory_table(traj: Trajectory) -> str:
    last = traj.samples[-1]
    residual = energy_residual(traj)
    return f"""Summary:
  Termination: {traj.termination}{f" ({traj.message})" if traj.message else ""}
  Samples: {len(traj.samples)}
  Time range: {_fmt(traj.samples[0].t)} -> {_fmt(last.t)}

Final state:
  h: {_fmt(last.h)}
  g: {_fmt(last.g)}
  E: {_fmt(last.E)}
  V_eps: {_fmt(last.V_eps)}

Energy identity:
  max |R_E|: {_fmt(float(np.max(np.abs(residual))))}"""


def output_table(report: StabilityReport) -> str:
    constants = report.constants
    fit = report.fit
    check_lines = "\n  ".join(_check_line(c) for c in report.checks)
    return f"""Summary:
  Termination: {report.meta.get("termination", "-")}
  Samples: {report.meta.get("samples", "-")}
  Result: {"PASS" if report.passed else "FAIL"}

Constants:
  C: {_fmt(constants.c_global)}
  alpha: {_fmt(constants.alpha)}
  eps: {_fmt(constants.eps)}
  eta: {_fmt(constants.eta)}
  alpha_local: {_fmt(constants.alpha_local)}
  eta_local: {_fmt(constants.eta_local)}

Checks:
  {check_lines}

Decay fit:
  {"-" if fit is None else f"rate={_fmt(fit.rate)} window={_fmt(fit.window[0])}..{_fmt(fit.window[1])} residual={_fmt(fit.residual)}"}"""


def _check_line(check) -> str:
    gate = "" if check.gating else " (info)"
    return f"{check.name}: {check.status.upper()}{gate} margin={_fmt(check.margin)} t={_fmt(check.time)}"


def output_suite_table(document: dict) -> str:
    lines = [f"Suite: {document['suite']}", f"  Result: {'PASS' if document['passed'] else 'FAIL'}", "",
             "Runs:"]
    for run in document["runs"]:
        failed = [c["name"] for c in run["report"]["checks"] if c["gating"] and c["status"] == "fail"]
        lines.append(f"  {run['label']}: {'FAIL ' + ', '.join(failed) if failed else 'PASS'}")
    if document.get("studies"):
        lines += ["", "Studies:"]
        for study in document["studies"]:
            lines.append(f"  {_check_line_dict(study)}")
    return "\n".join(lines)


def _check_line_dict(check: dict) -> str:
    gate = "" if check["gating"] else " (info)"
    return (f"{check['name']}: {check['status'].upper()}{gate} "
            f"value={_fmt(check.get('value'))} threshold={_fmt(check.get('threshold'))}")
