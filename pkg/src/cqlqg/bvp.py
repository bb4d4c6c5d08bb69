"""Split boundary value problem coupling the two Lyapunov ODEs.

P runs forward from a given P0, Q runs backward from Q(T) = 0, and the
controller gains at every node are the solutions of the algebraic gain
equations driven by (P, Q).  A damped Picard iteration closes the loop:

    realize controller -> integrate P, Q -> per-node optimal gains
    -> relaxed update  u <- (1 - lam) u + lam u_opt

until the sup-node gain change is below tolerance.  No convergence theory
backs the iteration; divergence is reported honestly in the SolveReport.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging

import numpy as np

from .dynamics import (Trajectory, hankelian, integrate_p, integrate_q,
                       integrate_theta, lqg_cost, running_cost)
from .errors import ScenarioError
from .gains import (BlockView, PlantNode, gain_b, gain_e, optimal_gain_batch,
                    optimal_gains)
from .model import (ControllerParams, assemble_closed_loop,
                    check_initial_covariance, midpoint_params, midpoint_plant,
                    realize_controller, theta0, validate_plant_pr)

log = logging.getLogger(__name__)

# PSD slack below which the integrated covariance is only logged, not flagged.
PSD_DIAGNOSTIC_TOL = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    """Fixed-point iteration knobs; defaults favour robustness over speed."""

    relaxation: float = 0.5
    max_iterations: int = 200
    gain_tolerance: float = 1e-8
    regularization: str = "pseudo"  # "pseudo" | "fail"
    R_schedule: np.ndarray | None = None  # (nodes, n, n) symmetric, zero if None
    threads: int = 1

    def __post_init__(self):
        if not (0.0 < self.relaxation <= 1.0):
            raise ScenarioError("solver.relaxation must lie in (0, 1]")
        if self.gain_tolerance <= 0.0:
            raise ScenarioError("solver.gain_tolerance must be positive")
        if self.max_iterations < 1:
            raise ScenarioError("solver.max_iterations must be >= 1")
        if self.regularization not in ("pseudo", "fail"):
            raise ScenarioError("solver.regularization must be 'pseudo' or 'fail'")


@dataclass
class SolveReport:
    """Outcome and per-node diagnostics of one BVP solve."""

    converged: bool
    iterations: int
    final_gain_delta: float
    cost: float
    cost_history: list = field(default_factory=list)
    skew_h_residuals: np.ndarray | None = None  # relative |Ham part of H22| per node
    m_min_eigs: np.ndarray | None = None
    n_min_eigs: np.ndarray | None = None
    indefinite_nodes: list = field(default_factory=list)
    p_min_eigenvalue: float = float("nan")


def _r_schedule(config, dims, nodes):
    if config.R_schedule is None:
        return np.zeros((nodes, dims.n, dims.n))
    sched = np.asarray(config.R_schedule, dtype=float)
    if sched.ndim == 2:
        sched = np.broadcast_to(sched, (nodes,) + sched.shape).copy()
    if sched.shape != (nodes, dims.n, dims.n):
        raise ScenarioError(f"solver.R_schedule: expected {(nodes, dims.n, dims.n)}, "
                            f"got {sched.shape}")
    return sched


def _integrate(plant, params, F, G, P0, grid, Theta0):
    ctrl = realize_controller(params, plant)
    cl = assemble_closed_loop(plant, ctrl, F, G)
    # Stage coefficients realized from interpolated parameters: every RK4
    # stage then satisfies the PR identities exactly.
    plant_mid = midpoint_plant(plant)
    ctrl_mid = realize_controller(midpoint_params(params), plant_mid)
    cl_mid = assemble_closed_loop(plant_mid, ctrl_mid,
                                  (cl.F[:-1] + cl.F[1:]) / 2.0,
                                  (cl.G[:-1] + cl.G[1:]) / 2.0)
    P = integrate_p(cl, P0, grid, cl_mid)
    Q = integrate_q(cl, grid, cl_mid)
    TH = integrate_theta(cl, Theta0, grid, cl_mid)
    return cl, P, Q, TH


def _trajectory(grid, cl, P, Q, TH, params):
    return Trajectory(grid=grid, P=P, Q=Q, Theta=TH, H=hankelian(Q, P),
                      gains=params, cost=lqg_cost(cl, P, grid),
                      cost_to_date=running_cost(cl, P, grid))


def evaluate_candidate(plant, F, G, d, gains, P0, grid):
    """Realize and integrate a fixed candidate controller; no optimization."""
    Theta0 = theta0(plant.K1, plant.dims.j0)
    cl, P, Q, TH = _integrate(plant, gains, F, G, P0, grid, Theta0)
    traj = _trajectory(grid, cl, P, Q, TH, gains)
    return traj.cost, traj


def _gain_sweep(P, Q, plant, cl, d, dims, mode, pool, threads):
    """Optimal gains at every node; stacked pinv solves in pseudo mode."""
    if mode == "exact":
        results = []
        for k in range(P.shape[0]):
            blocks = BlockView.from_pq(P[k], Q[k])
            node = PlantNode.from_plant(plant, k)
            e = gain_e(blocks, node, dims.j1, dims.j0, mode=mode)
            b = gain_b(blocks, node, cl.F[k], cl.G[k], d, dims.j0, dims.j2,
                       mode=mode)
            results.append((b, e))
        return np.stack([r[0] for r in results]), np.stack([r[1] for r in results])
    if pool is None:
        return optimal_gain_batch(P, Q, plant, cl.F, cl.G, d, dims)
    # Chunked batch solves; BLAS releases the GIL so threads overlap.
    edges = np.linspace(0, P.shape[0], threads + 1, dtype=int)
    spans = [(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]

    def work(span):
        lo, hi = span
        sub = plant.__class__(dims=dims, A=plant.A[lo:hi], B=plant.B[lo:hi],
                              C=plant.C[lo:hi], D=plant.D[lo:hi],
                              E=plant.E[lo:hi], K1=plant.K1)
        return optimal_gain_batch(P[lo:hi], Q[lo:hi], sub, cl.F[lo:hi],
                                  cl.G[lo:hi], d, dims)

    parts = list(pool.map(work, spans))
    return (np.concatenate([p[0] for p in parts]),
            np.concatenate([p[1] for p in parts]))


def solve_cqlqg(plant, F, G, d, P0, grid, config=None):
    """Damped Picard iteration on the split BVP; returns (Trajectory, SolveReport).

    Preconditions: the plant passes PR validation at every node and P0 is a
    quantum-admissible initial covariance for Theta0 = blkdiag(K1, J0).
    Non-convergence is reported, never raised.
    """
    config = config or SolverConfig()
    dims = plant.dims
    nodes = grid.nodes
    if plant.nodes != nodes:
        plant = plant.resampled(nodes)
    for k in range(nodes):
        res = validate_plant_pr(plant, d, k)
        if not res["pass"]:
            raise ScenarioError(
                f"plant fails PR validation at node {k}: "
                f"res11={res['res11']:.3e} res12={res['res12']:.3e}")
    Theta0 = theta0(plant.K1, dims.j0)
    if not check_initial_covariance(P0, Theta0):
        raise ScenarioError("P0 + i Theta0 / 2 is not positive semidefinite")

    r_sched = _r_schedule(config, dims, nodes)
    mode = "exact" if config.regularization == "fail" else "pseudo"
    b = np.zeros((nodes, dims.n, dims.m2))
    e = np.zeros((nodes, dims.n, dims.p1))

    pool = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
    report = SolveReport(converged=False, iterations=0,
                         final_gain_delta=float("inf"), cost=float("nan"))
    try:
        params = cl = P = Q = TH = None
        for it in range(1, config.max_iterations + 1):
            params = ControllerParams(dims=dims, b=b, e=e, R=r_sched, d=d)
            cl, P, Q, TH = _integrate(plant, params, F, G, P0, grid, Theta0)
            report.cost_history.append(lqg_cost(cl, P, grid))
            report.iterations = it

            b_opt, e_opt = _gain_sweep(P, Q, plant, cl, d, dims, mode,
                                       pool, config.threads)

            delta = float(np.max(
                np.linalg.norm(b_opt - b, axis=(1, 2))
                + np.linalg.norm(e_opt - e, axis=(1, 2))))
            report.final_gain_delta = delta
            if delta <= config.gain_tolerance:
                report.converged = True
                break
            lam = config.relaxation
            b = (1.0 - lam) * b + lam * b_opt
            e = (1.0 - lam) * e + lam * e_opt
    finally:
        if pool:
            pool.shutdown()

    traj = _trajectory(grid, cl, P, Q, TH, params)
    report.cost = traj.cost
    _diagnose(report, traj, plant, cl, d, dims)
    if not report.converged:
        log.warning("BVP did not converge in %d iterations (gain delta %.3e)",
                    report.iterations, report.final_gain_delta)
    return traj, report


def _diagnose(report, traj, plant, cl, d, dims):
    """Per-node structure and definiteness diagnostics of a finished solve."""
    nodes = traj.P.shape[0]
    j0 = dims.j0
    skew = np.empty(nodes)
    m_eigs = np.empty(nodes)
    n_eigs = np.empty(nodes)
    for k in range(nodes):
        blocks = BlockView.from_pq(traj.P[k], traj.Q[k])
        skew[k] = blocks.skew_hamiltonian_residual(j0)
        pair = optimal_gains(blocks, PlantNode.from_plant(plant, k),
                             cl.F[k], cl.G[k], d, dims, mode="pseudo")
        m_eigs[k] = pair.m_min_eig
        n_eigs[k] = pair.n_min_eig
    report.skew_h_residuals = skew
    report.m_min_eigs = m_eigs
    report.n_min_eigs = n_eigs
    # The terminal node is structurally singular (Q_T = 0), not a violation.
    report.indefinite_nodes = [int(k) for k in range(nodes - 1)
                               if m_eigs[k] <= 0.0 or n_eigs[k] <= 0.0]
    p_min = min(float(np.linalg.eigvalsh(traj.P[k])[0]) for k in range(nodes))
    report.p_min_eigenvalue = p_min
    scale = 1.0 + float(np.max(np.abs(traj.P)))
    if p_min < -PSD_DIAGNOSTIC_TOL * scale:
        log.warning("integrated covariance lost positive semidefiniteness "
                    "(min eigenvalue %.3e); not clipped", p_min)
