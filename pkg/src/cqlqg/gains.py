"""Optimal controller gain equations and the control Hamiltonian.

Given the controllability and observability Gramians P, Q of the closed
loop (and their Hankelian H = Q P), the optimal observation and noise gain
matrices solve the linear operator equations

    M(e) = -(H21 C^T + Q21 B D^T)
    N(b) = -(Q21 E d + J0 (H12^T E + P21 F^T G) d J2)

where M is the grade-two operator [[H22 J0, D J1 D^T | Q22, D D^T]] on
n x p1 matrices and N is the grade-three operator
[[H22 J0, J2 | Q22, I | J0 P22 J0, J2 d^T G^T G d J2]] on n x m2 matrices.
Both are self-adjoint whenever H22 is skew-Hamiltonian, and positive
definite under the well-posedness conditions reported by
:func:`well_posedness`; the gains are then the unique minimizers of the
control Hamiltonian in (b, e), independently of R.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndefiniteOperatorError, ShapeError
from .grade_ops import GradeROperator
from .linalg import frobenius, project
from .model import realize_node


@dataclass(frozen=True)
class PlantNode:
    """Plant matrices frozen at one grid node."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray

    @classmethod
    def from_plant(cls, plant, k):
        return cls(A=plant.A[k], B=plant.B[k], C=plant.C[k],
                   D=plant.D[k], E=plant.E[k])


@dataclass(frozen=True)
class BlockView:
    """n x n blocks of order-2n P, Q and of the Hankelian H = Q P."""

    P11: np.ndarray
    P12: np.ndarray
    P21: np.ndarray
    P22: np.ndarray
    Q11: np.ndarray
    Q21: np.ndarray
    Q22: np.ndarray
    H11: np.ndarray
    H12: np.ndarray
    H21: np.ndarray
    H22: np.ndarray

    @classmethod
    def from_pq(cls, P, Q):
        if P.shape != Q.shape or P.shape[0] != P.shape[1] or P.shape[0] % 2:
            raise ShapeError("BlockView: P, Q must be square of equal even order")
        n = P.shape[0] // 2
        H = Q @ P
        return cls(
            P11=P[:n, :n], P12=P[:n, n:], P21=P[n:, :n], P22=P[n:, n:],
            Q11=Q[:n, :n], Q21=Q[n:, :n], Q22=Q[n:, n:],
            H11=H[:n, :n], H12=H[:n, n:], H21=H[n:, :n], H22=H[n:, n:],
        )

    @property
    def n(self):
        return self.P11.shape[0]

    def full_p(self):
        return np.block([[self.P11, self.P12], [self.P21, self.P22]])

    def full_q(self):
        return np.block([[self.Q11, self.Q21.T], [self.Q21, self.Q22]])

    def skew_hamiltonian_residual(self, j0):
        """Relative size of the Hamiltonian component of H22 (0 when exact)."""
        return float(np.linalg.norm(project(self.H22, "hamiltonian", j0))
                     / (1.0 + np.linalg.norm(self.H22)))


def operator_m(Q22, H22, D, j1, j0):
    """Grade-two gain operator on n x p1 matrices."""
    return GradeROperator((
        (H22 @ j0, D @ j1 @ D.T),
        (Q22, D @ D.T),
    ))


def operator_n(H22, Q22, P22, d, G, j0, j2):
    """Grade-three gain operator on n x m2 matrices."""
    m2 = j2.shape[0]
    return GradeROperator((
        (H22 @ j0, j2),
        (Q22, np.eye(m2)),
        (j0 @ P22 @ j0, j2 @ d.T @ G.T @ G @ d @ j2),
    ))


def _rhs_e(blocks, node):
    return blocks.H21 @ node.C.T + blocks.Q21 @ node.B @ node.D.T


def _rhs_b(blocks, node, F, G, d, j0, j2):
    return (blocks.Q21 @ node.E @ d
            + j0 @ (blocks.H12.T @ node.E + blocks.P21 @ F.T @ G) @ d @ j2)


def _definite_or_raise(op, what):
    min_eig = op.min_eigenvalue()
    if min_eig <= 0.0:
        raise IndefiniteOperatorError(
            f"{what} operator is not positive definite (min eig {min_eig:.3e})")
    return min_eig


def gain_e(blocks, node, j1, j0, mode="exact"):
    """Optimal observation gain; exact mode insists on a definite operator."""
    op = operator_m(blocks.Q22, blocks.H22, node.D, j1, j0)
    if mode == "exact":
        _definite_or_raise(op, "observation-gain")
    return op.solve(-_rhs_e(blocks, node), mode=mode)


def gain_b(blocks, node, F, G, d, j0, j2, mode="exact"):
    """Optimal noise gain; exact mode insists on a definite operator."""
    op = operator_n(blocks.H22, blocks.Q22, blocks.P22, d, G, j0, j2)
    if mode == "exact":
        _definite_or_raise(op, "noise-gain")
    return op.solve(-_rhs_b(blocks, node, F, G, d, j0, j2), mode=mode)


@dataclass(frozen=True)
class GainPair:
    """Both optimal gains with their operators and spectral margins."""

    e: np.ndarray
    b: np.ndarray
    m_op: GradeROperator
    n_op: GradeROperator
    m_min_eig: float
    n_min_eig: float


def optimal_gains(blocks, node, F, G, d, dims, mode="pseudo"):
    """Solve both gain equations at one node and report operator margins."""
    j0, j1, j2 = dims.j0, dims.j1, dims.j2
    m_op = operator_m(blocks.Q22, blocks.H22, node.D, j1, j0)
    n_op = operator_n(blocks.H22, blocks.Q22, blocks.P22, d, G, j0, j2)
    m_min = m_op.min_eigenvalue()
    n_min = n_op.min_eigenvalue()
    if mode == "exact":
        if m_min <= 0.0 or n_min <= 0.0:
            raise IndefiniteOperatorError(
                f"gain operators not positive definite (min eigs {m_min:.3e}, {n_min:.3e})")
    e = m_op.solve(-_rhs_e(blocks, node), mode=mode)
    b = n_op.solve(-_rhs_b(blocks, node, F, G, d, j0, j2), mode=mode)
    return GainPair(e=e, b=b, m_op=m_op, n_op=n_op,
                    m_min_eig=float(m_min), n_min_eig=float(n_min))


def control_hamiltonian(P, u, Q, node, F, G, d, dims):
    """Pontryagin control Hamiltonian <C^T C, P> + <Q, A P + P A^T + B B^T>.

    ``u = (b, e, R)`` is realized into a PR controller at this node before
    the closed loop is assembled.
    """
    b, e, R = u
    j0, j1, j2 = dims.j0, dims.j1, dims.j2
    a, c = realize_node(b, e, R, node.D, d, j0, j1, j2)
    A_cl = np.block([[node.A, node.E @ c], [e @ node.C, a]])
    B_cl = np.block([[node.B, node.E @ d], [e @ node.D, b]])
    C_cl = np.hstack([F, G @ c])
    lyap = A_cl @ P + P @ A_cl.T + B_cl @ B_cl.T
    return frobenius(C_cl.T @ C_cl, P) + frobenius(Q, lyap)


def minimized_hamiltonian(blocks, node, F, G, d, dims, mode="exact"):
    """Value of the control Hamiltonian minimized over (b, e) at R = 0.

    Equals the plant-only terms minus the two operator-weighted norms of the
    gain right-hand sides; at optimal gains it coincides with
    :func:`control_hamiltonian`.
    """
    j0, j1, j2 = dims.j0, dims.j1, dims.j2
    m_op = operator_m(blocks.Q22, blocks.H22, node.D, j1, j0)
    n_op = operator_n(blocks.H22, blocks.Q22, blocks.P22, d, G, j0, j2)
    if mode == "exact":
        _definite_or_raise(m_op, "observation-gain")
        _definite_or_raise(n_op, "noise-gain")
    rhs_m = _rhs_e(blocks, node)
    rhs_n = _rhs_b(blocks, node, F, G, d, j0, j2)
    const = (frobenius(F.T @ F, blocks.P11)
             + 2.0 * frobenius(blocks.H11, node.A)
             + frobenius(blocks.Q11,
                         node.B @ node.B.T + node.E @ d @ d.T @ node.E.T))
    return (const
            - frobenius(rhs_n, n_op.solve(rhs_n, mode=mode))
            - frobenius(rhs_m, m_op.solve(rhs_m, mode=mode)))


@dataclass(frozen=True)
class WellPosedness:
    """Diagnostics behind positive definiteness of the gain operators."""

    rank_ok: bool
    q22_nonsingular: bool
    q22_condition: float
    spectral_radius: float | None


def _kron_batch(b, a):
    """Stacked Kronecker product kron(b[k], a[k])."""
    k, p, q = b.shape[0], b.shape[1], a.shape[1]
    return np.einsum("kab,kcd->kacbd", b, a).reshape(k, p * q, p * q)


def _vec_batch(x):
    """Stacked column-major vectorization."""
    return x.transpose(0, 2, 1).reshape(x.shape[0], -1)


def _unvec_batch(v, rows, cols):
    return v.reshape(v.shape[0], cols, rows).transpose(0, 2, 1)


def optimal_gain_batch(P, Q, plant, F, G, d, dims):
    """Pseudo-mode gain solves at every node at once via stacked pinv.

    Same formulas and singular-value cutoff as :func:`gain_e` /
    :func:`gain_b`; used by the BVP iteration where the per-node loop
    would dominate the runtime.
    """
    j0, j1, j2 = dims.j0, dims.j1, dims.j2
    n = dims.n
    H = Q @ P
    P21, P22 = P[:, n:, :n], P[:, n:, n:]
    Q21, Q22 = Q[:, n:, :n], Q[:, n:, n:]
    H12, H21, H22 = H[:, :n, n:], H[:, n:, :n], H[:, n:, n:]
    h22j0 = H22 @ j0

    djd = np.einsum("kij,jl,kml->kim", plant.D, j1, plant.D)
    dd = np.einsum("kij,klj->kil", plant.D, plant.D)
    gamma_m = (_kron_batch(djd.transpose(0, 2, 1), h22j0)
               + _kron_batch(dd.transpose(0, 2, 1), Q22))
    rhs_m = -(H21 @ plant.C.transpose(0, 2, 1)
              + Q21 @ plant.B @ plant.D.transpose(0, 2, 1))

    gd = G @ d
    gtg = np.einsum("kji,kjl->kil", gd, gd)  # d^T G^T G d
    s = np.einsum("ij,kjl,lm->kim", j2, gtg, j2)
    eye_m2 = np.broadcast_to(np.eye(dims.m2), (P.shape[0], dims.m2, dims.m2))
    gamma_n = (_kron_batch(np.broadcast_to(j2.T, eye_m2.shape), h22j0)
               + _kron_batch(eye_m2, Q22)
               + _kron_batch(s.transpose(0, 2, 1), j0 @ P22 @ j0))
    ed = plant.E @ d
    rhs_n = -(Q21 @ ed
              + j0 @ (H12.transpose(0, 2, 1) @ plant.E
                      + P21 @ F.transpose(0, 2, 1) @ G) @ d @ j2)

    from .grade_ops import PINV_RCOND
    e = _unvec_batch(
        np.einsum("kij,kj->ki", np.linalg.pinv(gamma_m, rcond=PINV_RCOND),
                  _vec_batch(rhs_m)), n, dims.p1)
    b = _unvec_batch(
        np.einsum("kij,kj->ki", np.linalg.pinv(gamma_n, rcond=PINV_RCOND),
                  _vec_batch(rhs_n)), n, dims.m2)
    return b, e


def well_posedness(blocks, D, j0, cond_limit=1e14):
    """D row rank, Q22 conditioning, and the spectral radius of Q22^-1 H22 J0.

    A radius below one (with full-row-rank D and nonsingular Q22) certifies
    that both gain operators are positive definite.
    """
    rank_ok = np.linalg.matrix_rank(D) == D.shape[0]
    cond = float(np.linalg.cond(blocks.Q22))
    nonsingular = bool(np.isfinite(cond) and cond < cond_limit)
    radius = None
    if nonsingular:
        core = np.linalg.solve(blocks.Q22, blocks.H22 @ j0)
        radius = float(np.max(np.abs(np.linalg.eigvals(core))))
    return WellPosedness(rank_ok=bool(rank_ok), q22_nonsingular=nonsingular,
                         q22_condition=cond, spectral_radius=radius)
