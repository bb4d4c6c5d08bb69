"""Batch command-line front end.

    cqlqg <validate|simulate|optimize|verify> --scenario s.json --out dir
          [--set path=value]... [--threads n] [--emit-template]

Exit status: 0 success, 2 solver did not converge, 3 validation or check
failure, 4 scenario parse/schema error.  CQLQG_LOG controls verbosity.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys

import numpy as np

from .bvp import evaluate_candidate, solve_cqlqg
from .errors import CqlqgError, ScenarioError
from .model import check_initial_covariance, realize_controller, theta0, \
    validate_controller_pr, validate_plant_pr
from .report import ResultBundle, write_validation_json
from .scenario import apply_overrides, parse_scenario, template
from .verify import run_standard_checks

log = logging.getLogger("cqlqg")

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_VALIDATION = 3
EXIT_PARSE = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cqlqg",
        description="Finite-horizon coherent quantum LQG controller synthesis")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("validate", "report PR/CCR residuals of the scenario"),
            ("simulate", "evaluate the supplied candidate gains"),
            ("optimize", "solve the split BVP for the optimal gains"),
            ("verify", "run the full verification suite")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", help="scenario JSON file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="PATH=VALUE", help="override a scenario field")
        p.add_argument("--threads", type=int, default=None,
                       help="per-node parallelism of the gain solves")
        p.add_argument("--emit-template", action="store_true",
                       help="write a template scenario and exit")
    return parser


def _configure_logging():
    level = os.environ.get("CQLQG_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load(args):
    if not args.scenario:
        raise ScenarioError("--scenario is required (or use --emit-template)")
    try:
        with open(args.scenario, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {args.scenario}") from None
    except OSError as exc:
        raise ScenarioError(f"cannot read {args.scenario}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{args.scenario}: invalid JSON ({exc})") from None
    doc = apply_overrides(doc, args.overrides)
    scenario = parse_scenario(doc, origin=args.scenario)
    if args.threads is not None:
        scenario = dataclasses.replace(
            scenario, solver=dataclasses.replace(scenario.solver,
                                                 threads=args.threads))
    return scenario


def _require_out(args):
    if not args.out:
        raise ScenarioError("--out is required")
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _cmd_validate(scenario, out_dir):
    rows = []
    ok = True
    for k in range(scenario.grid.nodes):
        res = validate_plant_pr(scenario.plant, scenario.d, k)
        row = {"node": k, **res}
        if scenario.gains is not None:
            ctrl = realize_controller(scenario.gains, scenario.plant)
            dims = scenario.dims
            cres = validate_controller_pr(
                ctrl.a[k], ctrl.b[k], ctrl.c[k], ctrl.e[k], ctrl.d,
                scenario.plant.D[k], dims.j0, dims.j1, dims.j2)
            row.update({"controller_res1": cres["res1"],
                        "controller_res2": cres["res2"]})
            row["pass"] = bool(res["pass"] and cres["pass"])
        rows.append(row)
        ok = ok and row["pass"]
    admissible = check_initial_covariance(
        scenario.P0, theta0(scenario.plant.K1, scenario.dims.j0))
    # d is unconstrained beyond shape; its conditioning is reported, not policed
    diagnostics = {"d_condition": float(np.linalg.cond(scenario.d)),
                   "d_rank": int(np.linalg.matrix_rank(scenario.d))}
    write_validation_json(os.path.join(out_dir, "validation.json"),
                          rows, admissible, diagnostics)
    from .plots import save_validation_figure
    save_validation_figure(os.path.join(out_dir, "validation.png"), rows)
    if not (ok and admissible):
        log.error("validation failed (see validation.json)")
        return EXIT_VALIDATION
    return EXIT_OK


def _cmd_simulate(scenario, out_dir):
    if scenario.gains is None:
        raise ScenarioError("simulate: scenario must supply a 'gains' section")
    cost, traj = evaluate_candidate(scenario.plant, scenario.F, scenario.G,
                                    scenario.d, scenario.gains, scenario.P0,
                                    scenario.grid)
    bundle = ResultBundle(out_dir=out_dir, trajectory=traj)
    bundle.emit_tables()
    from .plots import save_standard_figures
    save_standard_figures(out_dir, traj=traj)
    print(f"cost {cost:.12g}")
    return EXIT_OK


def _cmd_optimize(scenario, out_dir):
    traj, report = solve_cqlqg(scenario.plant, scenario.F, scenario.G,
                               scenario.d, scenario.P0, scenario.grid,
                               scenario.solver)
    bundle = ResultBundle(out_dir=out_dir, trajectory=traj, report=report)
    bundle.emit_tables()
    from .plots import save_standard_figures
    save_standard_figures(out_dir, traj=traj, report=report)
    print(f"cost {report.cost:.12g} iterations {report.iterations} "
          f"converged {str(report.converged).lower()}")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _cmd_verify(scenario, out_dir):
    traj, report, checks = run_standard_checks(
        scenario.plant, scenario.F, scenario.G, scenario.d, scenario.P0,
        scenario.grid, scenario.solver, seed=scenario.seed)
    bundle = ResultBundle(out_dir=out_dir, trajectory=traj, report=report,
                          checks=checks)
    bundle.emit_tables()
    from .plots import save_standard_figures
    save_standard_figures(out_dir, traj=traj, report=report, checks=checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} "
              f"residual {c.residual:.3e} tolerance {c.tolerance:.3e}")
    if not report.converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION


def main(argv=None):
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        if args.emit_template:
            doc = template()
            if args.out:
                os.makedirs(args.out, exist_ok=True)
                path = os.path.join(args.out, "scenario.json")
                with open(path, "w", encoding="utf-8") as fh:
                    json.dump(doc, fh, indent=2)
                    fh.write("\n")
                print(path)
            else:
                json.dump(doc, sys.stdout, indent=2)
                print()
            return EXIT_OK
        scenario = _load(args)
        out_dir = _require_out(args)
        if args.command == "validate":
            return _cmd_validate(scenario, out_dir)
        if args.command == "simulate":
            return _cmd_simulate(scenario, out_dir)
        if args.command == "optimize":
            return _cmd_optimize(scenario, out_dir)
        if args.command == "verify":
            return _cmd_verify(scenario, out_dir)
        raise ScenarioError(f"unknown command {args.command!r}")
    except ScenarioError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CqlqgError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
