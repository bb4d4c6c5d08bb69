"""Fixed-step RK4 integration of the covariance and Gramian Lyapunov ODEs.

Forward:   Pdot = A P + P A^T + B B^T,          P(0) given
Backward:  Qdot = -(A^T Q + Q A + C^T C),       Q(T) = 0
CCR:       THdot = A TH + TH A^T + B J B^T,     TH(0) = blkdiag(K1, J0)

Coefficients are node samples; stage values at half steps use linear
interpolation of the state-space matrices.  Every accepted step is
re-projected onto the symmetric (P, Q) or antisymmetric (Theta) subspace so
round-off drift cannot contaminate structure diagnostics downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteStateError, ShapeError
from .model import ControllerParams


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of N+1 nodes on [0, T]."""

    T: float
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ShapeError("TimeGrid.N must be >= 1")
        if not (self.T > 0):
            raise ShapeError("TimeGrid.T must be positive")

    @property
    def h(self):
        return self.T / self.N

    @property
    def nodes(self):
        return self.N + 1

    @property
    def times(self):
        return np.linspace(0.0, self.T, self.N + 1)


def _require_finite(x, what, k):
    if not np.isfinite(x).all():
        raise NonFiniteStateError(f"{what} became non-finite at node {k}")


def _midpoints(closed_loop, midpoint_loop, grid):
    """Stage coefficients between nodes: supplied samples or interpolation."""
    if midpoint_loop is not None:
        if midpoint_loop.A.shape[0] != grid.N:
            raise ShapeError("midpoint loop must carry one sample per step")
        return midpoint_loop.A, midpoint_loop.B, midpoint_loop.C
    A, B, C = closed_loop.A, closed_loop.B, closed_loop.C
    return ((A[:-1] + A[1:]) / 2.0, (B[:-1] + B[1:]) / 2.0,
            (C[:-1] + C[1:]) / 2.0)


def integrate_p(closed_loop, P0, grid, midpoint_loop=None):
    """Classical RK4 on the forward covariance ODE; node 0 equals P0 exactly.

    ``midpoint_loop`` optionally supplies the half-step coefficients (one
    sample per step); otherwise they are interpolated linearly.
    """
    if closed_loop.nodes != grid.nodes:
        raise ShapeError("integrate_p: closed loop not sampled on this grid")
    h = grid.h
    A, B = closed_loop.A, closed_loop.B
    A_mid, B_mid, _ = _midpoints(closed_loop, midpoint_loop, grid)
    P = np.empty((grid.nodes,) + P0.shape)
    P[0] = P0
    for k in range(grid.N):
        a0, a1 = A[k], A[k + 1]
        am = A_mid[k]
        g0 = B[k] @ B[k].T
        g1 = B[k + 1] @ B[k + 1].T
        bm = B_mid[k]
        gm = bm @ bm.T
        x = P[k]
        k1 = a0 @ x + x @ a0.T + g0
        y = x + (h / 2.0) * k1
        k2 = am @ y + y @ am.T + gm
        y = x + (h / 2.0) * k2
        k3 = am @ y + y @ am.T + gm
        y = x + h * k3
        k4 = a1 @ y + y @ a1.T + g1
        nxt = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        P[k + 1] = (nxt + nxt.T) / 2.0
        _require_finite(P[k + 1], "P", k + 1)
    return P


def integrate_q(closed_loop, grid, midpoint_loop=None):
    """RK4 on the observability Gramian ODE, backwards from Q(T) = 0."""
    if closed_loop.nodes != grid.nodes:
        raise ShapeError("integrate_q: closed loop not sampled on this grid")
    h = grid.h
    A, C = closed_loop.A, closed_loop.C
    A_mid, _, C_mid = _midpoints(closed_loop, midpoint_loop, grid)
    two_n = A.shape[1]
    Q = np.empty((grid.nodes, two_n, two_n))
    Q[grid.N] = 0.0
    for k in range(grid.N, 0, -1):
        a1, a0 = A[k], A[k - 1]
        am = A_mid[k - 1]
        g1 = C[k].T @ C[k]
        g0 = C[k - 1].T @ C[k - 1]
        cm = C_mid[k - 1]
        gm = cm.T @ cm
        x = Q[k]
        k1 = -(a1.T @ x + x @ a1 + g1)
        y = x - (h / 2.0) * k1
        k2 = -(am.T @ y + y @ am + gm)
        y = x - (h / 2.0) * k2
        k3 = -(am.T @ y + y @ am + gm)
        y = x - h * k3
        k4 = -(a0.T @ y + y @ a0 + g0)
        nxt = x - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        Q[k - 1] = (nxt + nxt.T) / 2.0
        _require_finite(Q[k - 1], "Q", k - 1)
    return Q


def integrate_theta(closed_loop, Theta0, grid, midpoint_loop=None):
    """RK4 on the CCR-matrix ODE with antisymmetry re-projection."""
    if closed_loop.nodes != grid.nodes:
        raise ShapeError("integrate_theta: closed loop not sampled on this grid")
    h = grid.h
    A, B, J = closed_loop.A, closed_loop.B, closed_loop.J
    A_mid, B_mid, _ = _midpoints(closed_loop, midpoint_loop, grid)
    TH = np.empty((grid.nodes,) + Theta0.shape)
    TH[0] = Theta0
    for k in range(grid.N):
        a0, a1 = A[k], A[k + 1]
        am = A_mid[k]
        g0 = B[k] @ J @ B[k].T
        g1 = B[k + 1] @ J @ B[k + 1].T
        bm = B_mid[k]
        gm = bm @ J @ bm.T
        x = TH[k]
        k1 = a0 @ x + x @ a0.T + g0
        y = x + (h / 2.0) * k1
        k2 = am @ y + y @ am.T + gm
        y = x + (h / 2.0) * k2
        k3 = am @ y + y @ am.T + gm
        y = x + h * k3
        k4 = a1 @ y + y @ a1.T + g1
        nxt = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        TH[k + 1] = (nxt - nxt.T) / 2.0
        _require_finite(TH[k + 1], "Theta", k + 1)
    return TH


def hankelian(Q, P):
    """Hankelian H = Q P; eigenvalues are squared Hankel singular values."""
    if Q.shape != P.shape:
        raise ShapeError("hankelian: shape mismatch")
    return Q @ P


def hankelian_rhs(H, A_cl, B_cl, C_cl, Q, P):
    """Time derivative identity [H, A^T] + Q B B^T - C^T C P."""
    return H @ A_cl.T - A_cl.T @ H + Q @ (B_cl @ B_cl.T) - (C_cl.T @ C_cl) @ P


def output_energy_density(closed_loop, P):
    """Per-node integrand <C^T C, P> of the LQG cost."""
    C = closed_loop.C
    return np.einsum("kij,kjl,kil->k", C, P, C)


def lqg_cost(closed_loop, P, grid):
    """Composite trapezoidal value of the LQG cost over [0, T]."""
    f = output_energy_density(closed_loop, P)
    return float(np.trapezoid(f, dx=grid.h))


def running_cost(closed_loop, P, grid):
    """Cumulative trapezoidal cost-to-date per node (node 0 is zero)."""
    f = output_energy_density(closed_loop, P)
    out = np.zeros(grid.nodes)
    np.cumsum((f[:-1] + f[1:]) * (grid.h / 2.0), out=out[1:])
    return out


@dataclass(frozen=True)
class Trajectory:
    """Integrated state of one closed-loop evaluation on a grid."""

    grid: TimeGrid
    P: np.ndarray        # (nodes, 2n, 2n) symmetric
    Q: np.ndarray        # (nodes, 2n, 2n) symmetric, Q[-1] = 0
    Theta: np.ndarray    # (nodes, 2n, 2n) antisymmetric
    H: np.ndarray        # (nodes, 2n, 2n), H = Q P per node
    gains: ControllerParams
    cost: float
    cost_to_date: np.ndarray  # (nodes,)
