"""Delimited result emission: CSV tables and the JSON check report.

Numbers are printed with 17 significant digits so trajectories round-trip
losslessly and identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field


def fmt(x):
    return format(float(x), ".17g")


def _upper_triangle_headers(prefix, order):
    return [f"{prefix}_{i}_{j}" for i in range(order) for j in range(i, order)]


def _upper_triangle_values(m):
    order = m.shape[0]
    return [m[i, j] for i in range(order) for j in range(i, order)]


def _dense_headers(prefix, rows, cols):
    return [f"{prefix}_{i}_{j}" for i in range(rows) for j in range(cols)]


def write_trajectory_csv(path, traj):
    """Per-node table: P and Q upper triangles plus the cost-to-date."""
    order = traj.P.shape[1]
    header = (["node", "t"] + _upper_triangle_headers("P", order)
              + _upper_triangle_headers("Q", order) + ["cost_to_date"])
    times = traj.grid.times
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(traj.P.shape[0]):
            row = [str(k), fmt(times[k])]
            row += [fmt(v) for v in _upper_triangle_values(traj.P[k])]
            row += [fmt(v) for v in _upper_triangle_values(traj.Q[k])]
            row.append(fmt(traj.cost_to_date[k]))
            fh.write(",".join(row) + "\n")


def write_gains_csv(path, traj):
    """Per-node table of the vectorized gain matrices b and e."""
    b, e = traj.gains.b, traj.gains.e
    header = (["node", "t"] + _dense_headers("b", b.shape[1], b.shape[2])
              + _dense_headers("e", e.shape[1], e.shape[2]))
    times = traj.grid.times
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(b.shape[0]):
            row = [str(k), fmt(times[k])]
            row += [fmt(v) for v in b[k].ravel()]
            row += [fmt(v) for v in e[k].ravel()]
            fh.write(",".join(row) + "\n")


def write_summary_csv(path, cost, iterations, converged):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("cost,iterations,converged\n")
        fh.write(f"{fmt(cost)},{iterations},{str(bool(converged)).lower()}\n")


def write_checks_json(path, results):
    payload = {"schema": "cqlqg-checks/1",
               "checks": [r.as_dict() for r in results],
               "all_pass": all(r.passed for r in results)}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_validation_json(path, rows, admissible, diagnostics=None):
    payload = {"schema": "cqlqg-validation/1",
               "initial_covariance_admissible": bool(admissible),
               "diagnostics": dict(diagnostics or {}),
               "nodes": rows,
               "all_pass": bool(admissible) and all(r["pass"] for r in rows)}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class ResultBundle:
    """Everything one command run wants to persist."""

    out_dir: str
    trajectory: object | None = None
    report: object | None = None
    checks: list = field(default_factory=list)
    written: list = field(default_factory=list)

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def emit_tables(self):
        os.makedirs(self.out_dir, exist_ok=True)
        if self.trajectory is not None:
            write_trajectory_csv(self.path("trajectory.csv"), self.trajectory)
            write_gains_csv(self.path("gains.csv"), self.trajectory)
            self.written += ["trajectory.csv", "gains.csv"]
            iterations = self.report.iterations if self.report else 0
            converged = self.report.converged if self.report else True
            write_summary_csv(self.path("summary.csv"), self.trajectory.cost,
                              iterations, converged)
            self.written.append("summary.csv")
        if self.checks:
            write_checks_json(self.path("checks.json"), self.checks)
            self.written.append("checks.json")
