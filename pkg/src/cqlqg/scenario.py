"""JSON scenario schema: parsing, validation, template emission, overrides.

Matrices are nested row arrays.  Every time-varying field accepts either a
single matrix (broadcast over the grid) or a list of N+1 matrices.  Schema
violations raise :class:`ScenarioError` with the offending field path in
the message.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .bvp import SolverConfig
from .dynamics import TimeGrid
from .errors import ScenarioError
from .model import ControllerParams, Dimensions, QuantumPlant, make_pr_plant

SCHEMA_ID = "cqlqg-scenario/1"


@dataclass(frozen=True)
class Scenario:
    """Validated in-memory form of one scenario file."""

    dims: Dimensions
    grid: TimeGrid
    plant: QuantumPlant
    d: np.ndarray
    F: np.ndarray  # (nodes, r, n)
    G: np.ndarray  # (nodes, r, p2)
    P0: np.ndarray
    solver: SolverConfig
    seed: int
    gains: ControllerParams | None  # only for `simulate`


def _need(doc, key, path):
    if key not in doc:
        raise ScenarioError(f"{path}.{key}: missing required field")
    return doc[key]


def _array(doc, key, path, nodes, shape):
    raw = _need(doc, key, path)
    where = f"{path}.{key}"
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: not a numeric array ({exc})") from None
    if arr.ndim == 2:
        if arr.shape != shape:
            raise ScenarioError(f"{where}: expected shape {shape}, got {arr.shape}")
        return np.broadcast_to(arr, (nodes,) + shape).copy()
    if arr.ndim == 3:
        if arr.shape[1:] != shape:
            raise ScenarioError(f"{where}: expected per-node shape {shape}, "
                                f"got {arr.shape[1:]}")
        if arr.shape[0] == 1:
            return np.broadcast_to(arr[0], (nodes,) + shape).copy()
        if arr.shape[0] != nodes:
            raise ScenarioError(f"{where}: expected 1 or {nodes} node samples, "
                                f"got {arr.shape[0]}")
        return arr
    raise ScenarioError(f"{where}: expected a matrix or list of matrices")


def _matrix(doc, key, path, shape):
    raw = _need(doc, key, path)
    where = f"{path}.{key}"
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: not a numeric array ({exc})") from None
    if arr.shape != shape:
        raise ScenarioError(f"{where}: expected shape {shape}, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ScenarioError(f"{where}: entries must be finite")
    return arr


def parse_scenario(doc, origin="scenario"):
    """Validate a decoded JSON document into a :class:`Scenario`."""
    if not isinstance(doc, dict):
        raise ScenarioError(f"{origin}: top level must be an object")
    schema = doc.get("schema", SCHEMA_ID)
    if schema != SCHEMA_ID:
        raise ScenarioError(f"{origin}.schema: unsupported id {schema!r}")

    dd = _need(doc, "dims", origin)
    try:
        dims = Dimensions(n=int(_need(dd, "n", f"{origin}.dims")),
                          m1=int(_need(dd, "m1", f"{origin}.dims")),
                          m2=int(_need(dd, "m2", f"{origin}.dims")),
                          p1=int(_need(dd, "p1", f"{origin}.dims")),
                          p2=int(_need(dd, "p2", f"{origin}.dims")),
                          r=int(_need(dd, "r", f"{origin}.dims")))
    except ScenarioError:
        raise
    except Exception as exc:
        raise ScenarioError(f"{origin}.dims: {exc}") from None

    gd = _need(doc, "grid", origin)
    grid = TimeGrid(T=float(_need(gd, "T", f"{origin}.grid")),
                    N=int(_need(gd, "N", f"{origin}.grid")))
    nodes = grid.nodes

    pd = _need(doc, "plant", origin)
    ppath = f"{origin}.plant"
    n, m1, m2, p1, p2, r = dims.n, dims.m1, dims.m2, dims.p1, dims.p2, dims.r
    try:
        plant = QuantumPlant(
            dims=dims,
            A=_array(pd, "A", ppath, nodes, (n, n)),
            B=_array(pd, "B", ppath, nodes, (n, m1)),
            C=_array(pd, "C", ppath, nodes, (p1, n)),
            D=_array(pd, "D", ppath, nodes, (p1, m1)),
            E=_array(pd, "E", ppath, nodes, (n, p2)),
            K1=_matrix(pd, "K1", ppath, (n, n)),
        )
    except ScenarioError:
        raise
    except Exception as exc:
        raise ScenarioError(f"{ppath}: {exc}") from None

    d = _matrix(doc, "d", origin, (p2, m2))
    F = _array(doc, "F", origin, nodes, (r, n))
    G = _array(doc, "G", origin, nodes, (r, p2))
    P0 = _matrix(doc, "P0", origin, (2 * n, 2 * n))

    sv = doc.get("solver", {})
    r_sched = None
    if "R_schedule" in sv:
        r_sched = _array(sv, "R_schedule", f"{origin}.solver", nodes, (n, n))
    solver = SolverConfig(
        relaxation=float(sv.get("relaxation", 0.5)),
        max_iterations=int(sv.get("max_iterations", 200)),
        gain_tolerance=float(sv.get("gain_tolerance", 1e-8)),
        regularization=str(sv.get("regularization", "pseudo")),
        R_schedule=r_sched,
        threads=int(sv.get("threads", 1)),
    )

    gains = None
    if "gains" in doc:
        gdoc = doc["gains"]
        gpath = f"{origin}.gains"
        b = _array(gdoc, "b", gpath, nodes, (n, m2))
        e = _array(gdoc, "e", gpath, nodes, (n, p1))
        if "R" in gdoc:
            R = _array(gdoc, "R", gpath, nodes, (n, n))
        elif r_sched is not None:
            R = r_sched
        else:
            R = np.zeros((nodes, n, n))
        gains = ControllerParams(dims=dims, b=b, e=e, R=R, d=d)

    return Scenario(dims=dims, grid=grid, plant=plant, d=d, F=F, G=G, P0=P0,
                    solver=solver, seed=int(doc.get("seed", 0)), gains=gains)


def load_scenario(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from None
    return parse_scenario(doc, origin=str(path))


def apply_overrides(doc, assignments):
    """Apply ``--set path=value`` overrides to a decoded scenario document.

    The path is dot-separated; values are parsed as JSON (so matrices and
    booleans work) with a bare-string fallback.
    """
    for item in assignments:
        if "=" not in item:
            raise ScenarioError(f"--set {item!r}: expected path=value")
        path, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        keys = path.strip().split(".")
        target = doc
        for key in keys[:-1]:
            if not isinstance(target, dict):
                raise ScenarioError(f"--set {path}: {key} is not an object")
            target = target.setdefault(key, {})
        if not isinstance(target, dict):
            raise ScenarioError(f"--set {path}: parent is not an object")
        target[keys[-1]] = value
    return doc


def template():
    """A PR-valid desk-scale scenario document (round-trips losslessly)."""
    dims = Dimensions(n=2, m1=2, m2=2, p1=2, p2=2, r=2)
    B = np.array([[1.0, 0.0], [0.0, 1.0]])
    D = np.array([[1.0, 0.0], [0.0, 1.0]])
    E = np.array([[0.8, 0.0], [0.0, 0.8]])
    d = np.array([[1.0, 0.0], [0.0, 1.0]])
    K1 = np.array([[0.0, 1.0], [-1.0, 0.0]])
    plant = make_pr_plant(dims, B, D, E, d, K1)
    return {
        "schema": SCHEMA_ID,
        "dims": {"n": 2, "m1": 2, "m2": 2, "p1": 2, "p2": 2, "r": 2},
        "grid": {"T": 1.0, "N": 200},
        "seed": 0,
        "plant": {
            "A": plant.A[0].tolist(),
            "B": B.tolist(),
            "C": plant.C[0].tolist(),
            "D": D.tolist(),
            "E": E.tolist(),
            "K1": K1.tolist(),
        },
        "d": d.tolist(),
        "F": [[1.0, 0.0], [0.0, 1.0]],
        "G": [[0.5, 0.0], [0.0, 0.5]],
        "P0": np.eye(4).tolist(),
        "solver": {"relaxation": 0.5, "max_iterations": 200,
                   "gain_tolerance": 1e-8, "regularization": "pseudo"},
    }
