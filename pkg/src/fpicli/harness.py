"""Experiment suites over configuration matrices.

Each suite starts from a base configuration document, deep-merges the user's
overrides over it and then applies its matrix axes. Runs are independent and
may execute in worker processes; results keep the matrix order.

Suites:
- ``iss-sweep``: decay, confinement and functional bounds over K x input x v0.
- ``bounds-audit``: functional bounds and confinement, including inputs outside L1.
- ``converge``: identity residuals and endpoint orders under refinement.
- ``oracle-compare``: stepper against the explicit reference solver.
- ``local-eiss``: local eISS conditions and estimates.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime, timezone

import numpy as np

from .config import RunConfig, config_from_dict, deep_merge
from .diagnostics import Trajectory, energy_residual, logmass_residual
from .domain import ConfigError
from .oracle import oracle_dt, oracle_simulate
from .stability import (FAIL, NA, PASS, StabilityReport, build_report, compute_constants,
                        confinement_checks, local_eiss_check, pointwise_checks,
                        termination_check)
from .stepper import simulate

GOLDEN = {
    "system": {"K": 1.0, "h1": 0.0, "h0": 0.2, "g0": 0.0,
               "v0": {"type": "sine", "amplitude": 0.5, "mode": 1}},
    "grid": {"nL": 200, "nR": 200},
    "solver": {"dt_max": 1e-3, "t_end": 1.0, "sample_stride": 10},
    "signal": {"type": "expdecay", "a": 0.5, "lam": 1.0},
}

SWEEP_BASE = {
    "system": {"K": 1.0, "h1": 0.0, "h0": 0.2, "g0": 0.0, "v0": {"type": "zero"}},
    "grid": {"nL": 100, "nR": 100},
    "solver": {"dt_max": 2e-3, "t_end": 20.0, "sample_stride": 10},
    "signal": {"type": "zero"},
}

ZERO = {"type": "zero"}
EXP_DECAY = {"type": "expdecay", "a": 0.5, "lam": 1.0}
RECT_PULSE = {"type": "rectpulse", "a": 1.0, "t0": 0.0, "t1": 2.0}
SINE = {"type": "sine", "amplitude": 0.5, "mode": 1}

CONVERGE_LEVELS = ((80, 4e-3), (160, 2e-3), (320, 1e-3))
SPATIAL_LEVELS = (20, 40, 80)
SPATIAL_DT = 1e-4
ORACLE_DTS = (2e-3, 1e-3, 5e-4)
ORACLE_CELLS = 200
ORACLE_TOL = 5e-3
SAMPLE_INTERVAL = 0.04


@dataclass
class StudyResult:
    """A suite-level measurement compared against a threshold."""
    name: str
    value: float | None
    threshold: float
    status: str
    gating: bool = True


def at_least(name: str, value: float | None, threshold: float, gating: bool = True) -> StudyResult:
    if value is None or math.isnan(value):
        return StudyResult(name, None, threshold, NA, gating)
    return StudyResult(name, value, threshold, PASS if value >= threshold else FAIL, gating)


def at_most(name: str, value: float | None, threshold: float, gating: bool = True) -> StudyResult:
    if value is None or math.isnan(value):
        return StudyResult(name, None, threshold, NA, gating)
    return StudyResult(name, value, threshold, PASS if value <= threshold else FAIL, gating)


def observed_order(coarse_error: float, fine_error: float, ratio: float = 2.0) -> float:
    """log_ratio(coarse / fine); inf when the fine error vanishes, nan when both do."""
    if fine_error == 0.0:
        return math.inf if coarse_error > 0.0 else math.nan
    return math.log(coarse_error / fine_error) / math.log(ratio)


def richardson_order(values: list[float]) -> float:
    """Order from three results at successively halved resolution."""
    if len(values) < 3:
        return math.nan
    return observed_order(abs(values[0] - values[1]), abs(values[1] - values[2]))


def _execute(job: tuple) -> Trajectory:
    # module level so worker processes can unpickle it
    kind, payload = job
    if kind == "oracle":
        return oracle_simulate(*payload)
    return simulate(*payload)


def _map(jobs: list[tuple], workers: int) -> list[Trajectory]:
    if workers <= 1 or len(jobs) <= 1:
        return [_execute(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_execute, jobs))


def sweep(configs: list[RunConfig], workers: int = 1) -> list[Trajectory]:
    """Simulate every configuration; the result order is the input order."""
    if not configs:
        raise ConfigError("sweep needs at least one configuration")
    return _map([("stepper", tuple(cfg)) for cfg in configs], workers)


def identity_tolerance(cfg: RunConfig, traj: Trajectory) -> float:
    dxi = max(cfg.grid.dxi_left, cfg.grid.dxi_right)
    e0 = traj.samples[0].E if traj.samples else 0.0
    return 10.0 * (cfg.solver.dt_max + dxi ** 2) * (1.0 + e0)


def full_report(cfg: RunConfig, traj: Trajectory, local: bool = False) -> StabilityReport:
    constants = compute_constants(cfg.params, cfg.signal, cfg.solver.eps_override)
    return build_report(traj, constants, cfg.signal, local=local,
                        identity_tol=identity_tolerance(cfg, traj))


def audit_report(cfg: RunConfig, traj: Trajectory) -> StabilityReport:
    """Functional bounds and confinement only."""
    constants = compute_constants(cfg.params, cfg.signal, cfg.solver.eps_override)
    checks = [termination_check(traj)]
    checks += pointwise_checks(traj)
    checks += confinement_checks(traj, constants)
    meta = {"termination": traj.termination, "message": traj.message,
            "samples": len(traj.samples)}
    return StabilityReport(constants, checks, None, meta)


def local_report(cfg: RunConfig, traj: Trajectory) -> StabilityReport:
    constants = compute_constants(cfg.params, cfg.signal, cfg.solver.eps_override)
    checks = [termination_check(traj)] + local_eiss_check(cfg.params, cfg.signal, traj)
    meta = {"termination": traj.termination, "message": traj.message,
            "samples": len(traj.samples)}
    return StabilityReport(constants, checks, None, meta)


def _level_config(raw: dict, n: int, dt: float) -> RunConfig:
    stride = max(1, round(SAMPLE_INTERVAL / dt))
    return config_from_dict(deep_merge(raw, {
        "grid": {"nL": n, "nR": n},
        "solver": {"dt_max": dt, "sample_stride": stride}}))


def converge_study(raw: dict, levels: int = 3, workers: int = 1,
                   coarse: tuple[int, float] = CONVERGE_LEVELS[0],
                   spatial_levels: tuple[int, ...] = SPATIAL_LEVELS,
                   ) -> tuple[list[StudyResult], list[dict]]:
    """Refine (n, dt) together and measure identity residuals and the endpoint order.

    Every level starts from compatible data, g0 = v0(h0). The factor-1 energy
    residual must stall across levels while the factor-2 residual converges.
    A second refinement in n alone at a small fixed dt isolates the spatial
    order; an empty ``spatial_levels`` skips it.
    """
    if levels < 2:
        raise ConfigError("converge needs at least 2 levels")
    cfg = config_from_dict(raw)
    base = cfg.params
    forced = cfg.signal.l2_norm() > 0.0
    compatible = deep_merge(raw, {"system": {"g0": float(base.v0.evaluate(base.h0))}})
    n0, dt0 = coarse
    pairs = [(n0 * 2 ** k, dt0 / 2 ** k) for k in range(levels)]
    configs = [_level_config(compatible, n, dt) for n, dt in pairs]
    spatial = [_level_config(compatible, n, SPATIAL_DT) for n in spatial_levels]
    trajectories = sweep(configs + spatial, workers)
    runs, space = trajectories[:levels], trajectories[levels:]

    r_e = [float(np.max(np.abs(energy_residual(t)))) for t in runs]
    r_e1 = [float(np.max(np.abs(energy_residual(t, 1.0)))) for t in runs]
    r_m = [float(np.max(np.abs(logmass_residual(t)))) for t in runs]
    h_end = [t.samples[-1].h for t in runs]

    studies = []
    for k in range(levels - 1):
        ratio = r_e[k + 1] / r_e[k] if r_e[k] > 0 else math.nan
        studies.append(at_most(f"energy_residual_ratio_{k}", ratio, 0.6))
        plateau = r_e1[k + 1] / r_e1[k] if forced and r_e1[k] > 0 else math.nan
        studies.append(at_least(f"energy_residual_factor1_ratio_{k}", plateau, 0.9))
        studies.append(at_least(f"logmass_order_{k}", observed_order(r_m[k], r_m[k + 1]), 0.9))
    studies.append(at_most("logmass_residual_finest", r_m[-1], 1e-3))
    separation = math.nan
    if forced:
        separation = r_e1[-1] / r_e[-1] if r_e[-1] > 0 else math.inf
    studies.append(at_least("energy_residual_factor_separation", separation, 10.0))
    studies.append(at_least("temporal_order", richardson_order(h_end), 0.9))
    studies.append(at_least("spatial_order", richardson_order([t.samples[-1].h for t in space]), 1.8))
    studies.append(at_least("completed_runs", float(all(t.completed for t in trajectories)), 1.0))

    level_rows = [{"n": n, "dt": dt, "max_energy_residual": e, "max_energy_residual_factor1": e1,
                   "max_logmass_residual": m, "h_end": h}
                  for (n, dt), e, e1, m, h in zip(pairs, r_e, r_e1, r_m, h_end)]
    return studies, level_rows


def _max_deviation(traj: Trajectory, ref: Trajectory) -> float:
    t, h = traj.column("t"), traj.column("h")
    ref_h = np.interp(t, ref.column("t"), ref.column("h"))
    return float(np.max(np.abs(h - ref_h)))


def oracle_study(raws: list[tuple[str, dict]], workers: int = 1) -> tuple[list[StudyResult], list[dict]]:
    """Stepper at n=200 and three time steps against the reference solver at n=200."""
    jobs, labels = [], []
    for label, raw in raws:
        for dt in ORACLE_DTS:
            cfg = _level_config(raw, ORACLE_CELLS, dt)
            jobs.append(("stepper", tuple(cfg)))
        cfg = config_from_dict(raw)
        p = cfg.params
        dt_ref = oracle_dt(ORACLE_CELLS, p.h0)
        stride = max(1, round(SAMPLE_INTERVAL / dt_ref))
        jobs.append(("oracle", (p, ORACLE_CELLS, dt_ref, cfg.solver.t_end, cfg.signal, stride,
                                cfg.solver.boundary_guard)))
        labels.append(label)
    results = _map(jobs, workers)

    studies, rows = [], []
    per = len(ORACLE_DTS) + 1
    for i, label in enumerate(labels):
        *runs, ref = results[i * per:(i + 1) * per]
        if not (ref.completed and all(r.completed for r in runs)):
            studies.append(StudyResult(f"{label}_completed", 0.0, 1.0, FAIL))
            continue
        errors = [_max_deviation(r, ref) for r in runs]
        studies.append(at_most(f"{label}_deviation", errors[ORACLE_DTS.index(1e-3)], ORACLE_TOL))
        order = observed_order(errors[0], errors[-1], ratio=ORACLE_DTS[0] / ORACLE_DTS[-1])
        studies.append(at_least(f"{label}_temporal_order", order, 0.9))
        rows.append({"label": label, "dts": list(ORACLE_DTS), "max_deviation": errors,
                     "oracle_h_end": ref.samples[-1].h})
    return studies, rows


def _matrix(base: dict, overrides: dict, axes: list[tuple[str, dict]]) -> list[tuple[str, dict]]:
    merged = deep_merge(base, overrides)
    return [(label, deep_merge(merged, axis)) for label, axis in axes]


def iss_sweep_matrix(overrides: dict) -> list[tuple[str, dict]]:
    axes = []
    for K in (0.0, 0.5, 1.0, 5.0):
        for sig_name, sig in (("zero", ZERO), ("expdecay", EXP_DECAY), ("rectpulse", RECT_PULSE)):
            for v0_name, v0 in (("zero", ZERO), ("sine", SINE)):
                axes.append((f"K={K:g} signal={sig_name} v0={v0_name}",
                             {"system": {"K": K, "v0": v0}, "signal": sig}))
    return _matrix(SWEEP_BASE, overrides, axes)


def bounds_audit_matrix(overrides: dict) -> list[tuple[str, dict]]:
    signals = (("zero", ZERO), ("expdecay", EXP_DECAY),
               ("powertail-0.75", {"type": "powertail", "a": 1.0, "p": 0.75}),
               ("powertail-1.5", {"type": "powertail", "a": 1.0, "p": 1.5}))
    axes = [(f"K={K:g} signal={name}", {"system": {"K": K, "v0": SINE}, "signal": sig})
            for K in (0.0, 1.0) for name, sig in signals]
    return _matrix(deep_merge(SWEEP_BASE, {"solver": {"t_end": 5.0}}), overrides, axes)


def local_eiss_matrix(overrides: dict) -> list[tuple[str, dict]]:
    axes = [
        ("near-target", {"system": {"K": 1.0, "h1": 0.0, "h0": 0.1, "g0": 0.0, "v0": ZERO},
                         "signal": ZERO}),
        ("fluid-kick", {"system": {"K": 1.0, "h1": 0.0, "h0": 0.2, "g0": 0.0,
                                   "v0": {"type": "sine", "amplitude": 0.1, "mode": 1}},
                        "signal": ZERO}),
        ("offset-target", {"system": {"K": 2.0, "h1": 0.3, "h0": 0.1, "g0": 0.05, "v0": ZERO},
                           "signal": {"type": "expdecay", "a": 0.05, "lam": 1.0}}),
        ("at-target", {"system": {"K": 1.0, "h1": 0.2, "h0": 0.2, "g0": 0.0, "v0": ZERO},
                       "signal": ZERO}),
        ("near-wall", {"system": {"K": 1.0, "h1": 0.9, "h0": 0.95, "g0": 0.0, "v0": ZERO},
                       "signal": ZERO}),
    ]
    return _matrix(SWEEP_BASE, overrides, axes)


def oracle_matrix(overrides: dict) -> list[tuple[str, dict]]:
    axes = [
        ("golden", {}),
        ("spring-swing", {"system": {"K": 1.0, "h1": 0.0, "h0": 0.1, "g0": 0.1, "v0": ZERO},
                          "signal": ZERO}),
        ("pulse", {"system": {"K": 0.5, "h1": 0.2, "h0": -0.3, "g0": 0.2,
                              "v0": {"type": "sine", "amplitude": 0.3, "mode": 1}},
                   "signal": {"type": "rectpulse", "a": 1.0, "t0": 0.0, "t1": 0.5}}),
    ]
    return _matrix(GOLDEN, overrides, axes)


def _run_matrix(matrix: list[tuple[str, dict]], workers: int, report_kind: str) -> list[dict]:
    configs = [config_from_dict(raw) for _, raw in matrix]
    trajectories = sweep(configs, workers)
    runs = []
    for (label, raw), cfg, traj in zip(matrix, configs, trajectories):
        match report_kind:
            case "audit":
                report = audit_report(cfg, traj)
            case "local":
                report = full_report(cfg, traj, local=True)
            case _:
                report = full_report(cfg, traj)
        runs.append({"label": label, "config": raw, "report": report.to_dict()})
    return runs


SUITES = ("iss-sweep", "bounds-audit", "converge", "oracle-compare", "local-eiss")


def run_suite(name: str, overrides: dict | None = None, workers: int = 1) -> dict:
    """Run a predefined suite and return its report document.

    The suite passes when every gating check of every run and every gating
    study passes. ``meta`` holds the wall-clock timestamp and worker count and
    is excluded from comparisons (see :func:`comparable`).
    """
    overrides = overrides or {}
    runs, studies, levels = [], [], []
    match name:
        case "iss-sweep":
            runs = _run_matrix(iss_sweep_matrix(overrides), workers, "full")
        case "bounds-audit":
            runs = _run_matrix(bounds_audit_matrix(overrides), workers, "audit")
        case "local-eiss":
            runs = _run_matrix(local_eiss_matrix(overrides), workers, "local")
        case "converge":
            studies, levels = converge_study(deep_merge(GOLDEN, overrides), workers=workers)
        case "oracle-compare":
            studies, levels = oracle_study(oracle_matrix(overrides), workers)
        case _:
            raise ConfigError(f"unknown suite '{name}' (expected one of {', '.join(SUITES)})")

    passed = all(c["status"] != FAIL for run in runs for c in run["report"]["checks"] if c["gating"])
    passed = passed and all(s.status != FAIL for s in studies if s.gating)
    return {
        "suite": name,
        "passed": passed,
        "runs": runs,
        "studies": [asdict(s) for s in studies],
        "levels": levels,
        "meta": {"timestamp": datetime.now(timezone.utc).isoformat(), "workers": workers},
    }


def comparable(document: dict) -> dict:
    """The suite document without its ``meta`` block."""
    return {k: v for k, v in document.items() if k != "meta"}
