import argparse
from .commands import (bounds_audit_command, converge_command, iss_check_command,
                       local_eiss_command, oracle_command, simulate_command, suite_command)
from .harness import SUITES


# Definition for main CLI
parser = argparse.ArgumentParser(
    prog="fpicli",
    description="Simulate the viscous Burgers / point-particle system and check its stability estimates")
parser.add_argument("-v", "--verbose", action="store_true", help="Enable verbose output")
parser.add_argument("--quiet", action="store_true", help="Suppress the summary table")
parser.add_argument("--seed", type=int, help="Reserved; every current run is deterministic")

# Definition for subcommands
subparsers = parser.add_subparsers(dest="command", help="Available commands")

# Simulate command
simulate_parser = subparsers.add_parser("simulate", help="run one simulation and write its trajectory CSV")
simulate_parser.add_argument("--config", "-c", required=True, help="The name/path of the config file (JSON or YAML)")
simulate_parser.add_argument("--out", "-o", required=True, help="Directory for trajectory.csv")
simulate_parser.set_defaults(function=simulate_command)

# ISS check command
iss_parser = subparsers.add_parser("iss-check", help="simulate and evaluate every stability estimate")
iss_parser.add_argument("--config", "-c", required=True, help="The name/path of the config file")
iss_parser.add_argument("--out", "-o", required=True, help="Directory for trajectory.csv and report.json")
iss_parser.set_defaults(function=iss_check_command)

# Converge command
converge_parser = subparsers.add_parser("converge", help="refinement study of the identity residuals and endpoint")
converge_parser.add_argument("--config", "-c", required=True, help="The name/path of the config file")
converge_parser.add_argument("--levels", type=int, default=3, help="Number of (n, dt) refinement levels, defaults to 3")
converge_parser.add_argument("--workers", type=int, default=1, help="Worker processes, defaults to 1")
converge_parser.set_defaults(function=converge_command)

# Bounds audit command
audit_parser = subparsers.add_parser("bounds-audit", help="check functional bounds and confinement on one run")
audit_parser.add_argument("--config", "-c", required=True, help="The name/path of the config file")
audit_parser.set_defaults(function=bounds_audit_command)

# Local eISS command
local_parser = subparsers.add_parser("local-eiss", help="check the local eISS conditions and estimates on one run")
local_parser.add_argument("--config", "-c", required=True, help="The name/path of the config file")
local_parser.set_defaults(function=local_eiss_command)

# Suite command
suite_parser = subparsers.add_parser("suite", help="run a predefined experiment suite")
suite_parser.add_argument("--name", required=True, choices=SUITES, help="The suite to run")
suite_parser.add_argument("--override", help="Config fragment merged over the suite's base configuration")
suite_parser.add_argument("--workers", type=int, default=1, help="Worker processes, defaults to 1")
suite_parser.add_argument("--out", "-o", help="Directory for the suite report JSON")
suite_parser.set_defaults(function=suite_command)

# Oracle command
oracle_parser = subparsers.add_parser("oracle", help="run the explicit reference solver and write its trajectory")
oracle_parser.add_argument("--config", "-c", required=True, help="The name/path of the config file")
oracle_parser.add_argument("--out", "-o", required=True, help="Directory for oracle.csv")
oracle_parser.add_argument("--cells", type=int, help="Cells per side, defaults to grid.nL")
oracle_parser.set_defaults(function=oracle_command)
