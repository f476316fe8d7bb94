"""One function per subcommand; each returns the process exit code.

0 when every gating check passes, 1 when one fails. Input errors propagate
as :class:`~fpicli.domain.FpiError` and are turned into exit code 2 by
:func:`fpicli.main.main`.
"""

import sys
from pathlib import Path

from .config import RunConfig, config_from_dict, load_config, read_document
from .domain import FpiError
from .harness import audit_report, converge_study, full_report, local_report, run_suite
from .oracle import oracle_dt, oracle_simulate
from .output import (output_json, output_suite_table, output_table, output_trajectory_table,
                     write_json, write_report, write_trajectory)
from .stability import StabilityReport
from .stepper import simulate


# Verbose output shared by the config-driven commands
def _print_verbose(args, cfg: RunConfig | None = None, *extra: str):
    if not args.verbose:
        return

    messages = [
        *((f"Config: {args.config}",) if getattr(args, "config", None) else ()),
        *((f"Grid: nL={cfg.grid.nL} nR={cfg.grid.nR}",) if cfg else ()),
        *((f"Signal: {cfg.signal.kind}",) if cfg else ()),
        *((f"Horizon: t_end={cfg.solver.t_end:g} dt_max={cfg.solver.dt_max:g}",) if cfg else ()),
        *((f"Output: {args.out}",) if getattr(args, "out", None) else ()),
        *extra,
    ]

    print("\n".join(messages))


def _out_dir(args) -> Path:
    out = Path(args.out).resolve()
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise FpiError(f"cannot create output directory '{out}': {e}") from e
    return out


def _finish(args, report: StabilityReport) -> int:
    if not args.quiet:
        print(output_table(report))
    failures = report.failures()
    for check in failures:
        print(f"FAIL: [{check.name}] margin={check.margin!r} at t={check.time!r}", file=sys.stderr)
    return 1 if failures else 0


def simulate_command(args) -> int:
    cfg = load_config(Path(args.config).resolve())
    _print_verbose(args, cfg)
    traj = simulate(*cfg)
    write_trajectory(traj, _out_dir(args) / "trajectory.csv")
    if not args.quiet:
        print(output_trajectory_table(traj))
    if not traj.completed:
        print(f"FAIL: [termination] {traj.termination}: {traj.message}", file=sys.stderr)
        return 1
    return 0


def iss_check_command(args) -> int:
    cfg = load_config(Path(args.config).resolve())
    _print_verbose(args, cfg)
    traj = simulate(*cfg)
    report = full_report(cfg, traj)
    out = _out_dir(args)
    write_trajectory(traj, out / "trajectory.csv")
    write_report(report, out / "report.json")
    return _finish(args, report)


def bounds_audit_command(args) -> int:
    cfg = load_config(Path(args.config).resolve())
    _print_verbose(args, cfg)
    traj = simulate(*cfg)
    return _finish(args, audit_report(cfg, traj))


def local_eiss_command(args) -> int:
    cfg = load_config(Path(args.config).resolve())
    _print_verbose(args, cfg)
    traj = simulate(*cfg)
    return _finish(args, local_report(cfg, traj))


def converge_command(args) -> int:
    raw = read_document(Path(args.config).resolve())
    cfg = config_from_dict(raw)
    _print_verbose(args, cfg, f"Levels: {args.levels}")
    studies, levels = converge_study(raw, args.levels, args.workers)
    document = {"suite": "converge", "passed": all(s.status != "fail" for s in studies if s.gating),
                "runs": [], "studies": [vars(s) for s in studies], "levels": levels}
    if not args.quiet:
        print(output_suite_table(document))
        if args.verbose:
            print(output_json(levels))
    failed = [s for s in studies if s.gating and s.status == "fail"]
    for study in failed:
        print(f"FAIL: [{study.name}] value={study.value!r} threshold={study.threshold!r}",
              file=sys.stderr)
    return 1 if failed else 0


def suite_command(args) -> int:
    overrides = read_document(Path(args.override).resolve()) if args.override else {}
    if not isinstance(overrides, dict):
        raise FpiError("override file must contain an object")
    _print_verbose(args, None, f"Suite: {args.name}", f"Workers: {args.workers}")
    document = run_suite(args.name, overrides, args.workers)
    if args.out:
        write_json(document, _out_dir(args) / f"{args.name}.json")
    if not args.quiet:
        print(output_suite_table(document))
    for run in document["runs"]:
        for check in run["report"]["checks"]:
            if check["gating"] and check["status"] == "fail":
                print(f"FAIL: [{run['label']}] {check['name']} margin={check['margin']!r}",
                      file=sys.stderr)
    for study in document["studies"]:
        if study["gating"] and study["status"] == "fail":
            print(f"FAIL: [{study['name']}] value={study['value']!r}", file=sys.stderr)
    return 0 if document["passed"] else 1


def oracle_command(args) -> int:
    cfg = load_config(Path(args.config).resolve())
    n = args.cells or cfg.grid.nL
    dt = oracle_dt(n, cfg.params.h0)
    _print_verbose(args, cfg, f"Oracle: n={n} dt={dt:.3e}")
    stride = max(1, round(cfg.solver.t_end / (dt * 1000)))
    traj = oracle_simulate(cfg.params, n, dt, cfg.solver.t_end, cfg.signal, stride,
                           cfg.solver.boundary_guard, cfg.solver.eps_override)
    write_trajectory(traj, _out_dir(args) / "oracle.csv")
    if not args.quiet:
        print(output_trajectory_table(traj))
    if not traj.completed:
        print(f"FAIL: [termination] {traj.termination}: {traj.message}", file=sys.stderr)
        return 1
    return 0
