"""Plant / controller data model and physical-realizability (PR) algebra.

A plant is the time-sampled state-space family (A, B, C, D, E) together
with its state CCR matrix K1.  A coherent controller of the same state
dimension is parameterized per node by the triple (b, e, R) with R
symmetric; its remaining state-space matrices follow from

    a = (e D J1 D^T e^T + b J2 b^T) J0 / 2 + J0 R
    c = d J2 b^T J0

which make the controller PR identities hold identically.  The controller
state CCR matrix is hard-wired to the canonical J0.  All per-node arrays
carry a leading node axis of length N+1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ShapeError, SingularOperatorError, NonSymmetricRError
from .linalg import as_matrix, canonical_ccr

_PR_TOL = 1e-12


@dataclass(frozen=True)
class Dimensions:
    """Problem sizes; n, m1, m2 must be even."""

    n: int
    m1: int
    m2: int
    p1: int
    p2: int
    r: int

    def __post_init__(self):
        for name in ("n", "m1", "m2", "p1", "p2", "r"):
            if getattr(self, name) < 1:
                raise ShapeError(f"Dimensions.{name} must be positive")
        for name in ("n", "m1", "m2"):
            if getattr(self, name) % 2 != 0:
                raise ShapeError(f"Dimensions.{name} must be even")

    @property
    def nu(self):
        return self.n // 2

    @property
    def mu1(self):
        return self.m1 // 2

    @property
    def mu2(self):
        return self.m2 // 2

    @property
    def j0(self):
        """Controller state CCR matrix."""
        return canonical_ccr(self.nu)

    @property
    def j1(self):
        """Plant noise CCR matrix."""
        return canonical_ccr(self.mu1)

    @property
    def j2(self):
        """Controller noise CCR matrix."""
        return canonical_ccr(self.mu2)

    @property
    def j_combined(self):
        """CCR matrix of the stacked (m1+m2)-dimensional noise."""
        return canonical_ccr(self.mu1 + self.mu2)


def _sampled(a, name, nodes, shape):
    """Coerce to a (nodes, *shape) stack; broadcast a single matrix."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 2:
        arr = np.broadcast_to(arr, (nodes,) + arr.shape).copy()
    if arr.shape != (nodes,) + shape:
        raise ShapeError(f"{name}: expected {(nodes,) + shape}, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ShapeError(f"{name}: entries must be finite")
    return arr


@dataclass(frozen=True)
class QuantumPlant:
    """Time-sampled plant matrices plus the plant CCR matrix K1."""

    dims: Dimensions
    A: np.ndarray  # (nodes, n, n)
    B: np.ndarray  # (nodes, n, m1)
    C: np.ndarray  # (nodes, p1, n)
    D: np.ndarray  # (nodes, p1, m1)
    E: np.ndarray  # (nodes, n, p2)
    K1: np.ndarray  # (n, n), nonsingular antisymmetric

    def __post_init__(self):
        d = self.dims
        nodes = np.asarray(self.A, dtype=float).shape[0] if np.asarray(self.A).ndim == 3 else 1
        object.__setattr__(self, "A", _sampled(self.A, "A", nodes, (d.n, d.n)))
        object.__setattr__(self, "B", _sampled(self.B, "B", nodes, (d.n, d.m1)))
        object.__setattr__(self, "C", _sampled(self.C, "C", nodes, (d.p1, d.n)))
        object.__setattr__(self, "D", _sampled(self.D, "D", nodes, (d.p1, d.m1)))
        object.__setattr__(self, "E", _sampled(self.E, "E", nodes, (d.n, d.p2)))
        k1 = as_matrix(self.K1, "K1")
        if k1.shape != (d.n, d.n):
            raise ShapeError(f"K1: expected {(d.n, d.n)}, got {k1.shape}")
        if np.linalg.norm(k1 + k1.T) > _PR_TOL * (1.0 + np.linalg.norm(k1)):
            raise ShapeError("K1 must be antisymmetric")
        if abs(np.linalg.det(k1)) < 1e-300:
            raise SingularOperatorError("K1 must be nonsingular")
        object.__setattr__(self, "K1", k1)

    @property
    def nodes(self):
        return self.A.shape[0]

    def resampled(self, nodes):
        """Same plant on a different node count (constant plants only)."""
        def spread(x):
            if np.allclose(x, x[0]):
                return np.broadcast_to(x[0], (nodes,) + x.shape[1:]).copy()
            raise ShapeError("resampled: plant is not constant in time")
        return replace(self, A=spread(self.A), B=spread(self.B), C=spread(self.C),
                       D=spread(self.D), E=spread(self.E))


@dataclass(frozen=True)
class ControllerParams:
    """Per-node controller parameters (b, e, R) and the fixed gain d."""

    dims: Dimensions
    b: np.ndarray  # (nodes, n, m2)
    e: np.ndarray  # (nodes, n, p1)
    R: np.ndarray  # (nodes, n, n), symmetric per node
    d: np.ndarray  # (p2, m2), constant over the horizon

    def __post_init__(self):
        dm = self.dims
        nodes = np.asarray(self.b, dtype=float).shape[0] if np.asarray(self.b).ndim == 3 else 1
        object.__setattr__(self, "b", _sampled(self.b, "b", nodes, (dm.n, dm.m2)))
        object.__setattr__(self, "e", _sampled(self.e, "e", nodes, (dm.n, dm.p1)))
        object.__setattr__(self, "R", _sampled(self.R, "R", nodes, (dm.n, dm.n)))
        d = as_matrix(self.d, "d")
        if d.shape != (dm.p2, dm.m2):
            raise ShapeError(f"d: expected {(dm.p2, dm.m2)}, got {d.shape}")
        object.__setattr__(self, "d", d)
        asym = np.linalg.norm(self.R - np.swapaxes(self.R, 1, 2))
        if asym > _PR_TOL * (1.0 + np.linalg.norm(self.R)):
            raise NonSymmetricRError(f"R must be symmetric per node (residual {asym:.2e})")

    @property
    def nodes(self):
        return self.b.shape[0]

    @classmethod
    def zero(cls, dims, nodes, d):
        return cls(
            dims=dims,
            b=np.zeros((nodes, dims.n, dims.m2)),
            e=np.zeros((nodes, dims.n, dims.p1)),
            R=np.zeros((nodes, dims.n, dims.n)),
            d=d,
        )


@dataclass(frozen=True)
class ControllerRealization:
    """Fully realized controller state-space matrices per node."""

    dims: Dimensions
    a: np.ndarray  # (nodes, n, n)
    b: np.ndarray  # (nodes, n, m2)
    c: np.ndarray  # (nodes, p2, n)
    e: np.ndarray  # (nodes, n, p1)
    d: np.ndarray  # (p2, m2)

    @property
    def nodes(self):
        return self.a.shape[0]


def realize_node(b, e, R, D, d, j0, j1, j2, tol=_PR_TOL):
    """Single-node (a, c) of the PR controller with parameters (b, e, R).

    ``a`` is the skew-Hamiltonian particular part plus the Hamiltonian free
    part J0 R; ``c`` follows from the second PR identity.
    """
    if np.linalg.norm(R - R.T) > tol * (1.0 + np.linalg.norm(R)):
        raise NonSymmetricRError("realize_node: R is not symmetric")
    phi = e @ (D @ j1 @ D.T) @ e.T + b @ j2 @ b.T
    a = phi @ j0 / 2.0 + j0 @ R
    c = d @ j2 @ b.T @ j0
    return a, c


def realize_controller(params, plant):
    """Realize (a, c) from (b, e, R) at every node so the PR identities hold."""
    dims = params.dims
    j0, j1, j2 = dims.j0, dims.j1, dims.j2
    if plant.nodes != params.nodes:
        raise ShapeError("realize_controller: plant and params node counts differ")
    d = params.d
    b, e, R = params.b, params.e, params.R
    djd = np.einsum("kij,jl,kml->kim", plant.D, j1, plant.D)
    phi = np.einsum("kij,kjl,kml->kim", e, djd, e) \
        + np.einsum("kij,jl,kml->kim", b, j2, b)
    a = phi @ j0 / 2.0 + j0 @ R
    c = np.einsum("ij,jl,kml,mo->kio", d, j2, b, j0)
    return ControllerRealization(dims=dims, a=a, b=b.copy(), c=c,
                                 e=e.copy(), d=d)


def validate_controller_pr(a, b, c, e, d, D, j0, j1, j2, tol=_PR_TOL):
    """Residuals of the controller PR identities at one node.

    res1 = |a J0 + J0 a^T + e D J1 D^T e^T + b J2 b^T|_F
    res2 = |c J0 + d J2 b^T|_F
    """
    t1 = a @ j0 + j0 @ a.T
    t2 = e @ (D @ j1 @ D.T) @ e.T
    t3 = b @ j2 @ b.T
    res1 = np.linalg.norm(t1 + t2 + t3)
    s1 = np.linalg.norm(t1) + np.linalg.norm(t2) + np.linalg.norm(t3)
    u1 = c @ j0
    u2 = d @ j2 @ b.T
    res2 = np.linalg.norm(u1 + u2)
    s2 = np.linalg.norm(u1) + np.linalg.norm(u2)
    ok = res1 <= tol * (1.0 + s1) and res2 <= tol * (1.0 + s2)
    return {"res1": float(res1), "res2": float(res2), "pass": bool(ok)}


def validate_plant_pr(plant, d, node, tol=_PR_TOL):
    """Residuals of the plant PR identities at one grid node.

    res11 = |A K1 + K1 A^T + B J1 B^T + E d J2 d^T E^T|_F
    res12 = |C K1 + D J1 B^T|_F
    """
    dims = plant.dims
    j1, j2 = dims.j1, dims.j2
    A, B, C, D, E = (plant.A[node], plant.B[node], plant.C[node],
                     plant.D[node], plant.E[node])
    k1 = plant.K1
    t1 = A @ k1 + k1 @ A.T
    t2 = B @ j1 @ B.T
    t3 = E @ d @ j2 @ d.T @ E.T
    res11 = np.linalg.norm(t1 + t2 + t3)
    s11 = np.linalg.norm(t1) + np.linalg.norm(t2) + np.linalg.norm(t3)
    u1 = C @ k1
    u2 = D @ j1 @ B.T
    res12 = np.linalg.norm(u1 + u2)
    s12 = np.linalg.norm(u1) + np.linalg.norm(u2)
    ok = res11 <= tol * (1.0 + s11) and res12 <= tol * (1.0 + s12)
    return {"res11": float(res11), "res12": float(res12), "pass": bool(ok)}


def make_pr_plant(dims, B, D, E, d, K1, R_plant=None, nodes=1):
    """Construct a PR-valid constant plant from (B, D, E, d, K1).

    C is the unique solution of the off-diagonal plant identity and A is a
    particular solution of the diagonal one plus the free part K1 R_plant
    (the plant-side analogue of the controller parameterization by R).
    """
    j1, j2 = dims.j1, dims.j2
    B = as_matrix(B, "B")
    D = as_matrix(D, "D")
    E = as_matrix(E, "E")
    d = as_matrix(d, "d")
    K1 = as_matrix(K1, "K1")
    if abs(np.linalg.det(K1)) < 1e-300:
        raise SingularOperatorError("make_pr_plant: K1 is singular")
    k1_inv = np.linalg.inv(K1)
    if R_plant is None:
        R_plant = np.zeros((dims.n, dims.n))
    R_plant = as_matrix(R_plant, "R_plant")
    C = -D @ j1 @ B.T @ k1_inv
    lam = B @ j1 @ B.T + E @ d @ j2 @ d.T @ E.T
    A = -lam @ k1_inv / 2.0 + K1 @ R_plant
    return QuantumPlant(
        dims=dims,
        A=np.broadcast_to(A, (nodes, dims.n, dims.n)).copy(),
        B=np.broadcast_to(B, (nodes, dims.n, dims.m1)).copy(),
        C=np.broadcast_to(C, (nodes, dims.p1, dims.n)).copy(),
        D=np.broadcast_to(D, (nodes, dims.p1, dims.m1)).copy(),
        E=np.broadcast_to(E, (nodes, dims.n, dims.p2)).copy(),
        K1=K1,
    )


def midpoint_plant(plant):
    """Plant sampled between consecutive nodes (linear interpolation)."""
    mid = lambda x: (x[:-1] + x[1:]) / 2.0
    return QuantumPlant(dims=plant.dims, A=mid(plant.A), B=mid(plant.B),
                        C=mid(plant.C), D=mid(plant.D), E=mid(plant.E),
                        K1=plant.K1)


def midpoint_params(params):
    """Controller parameters between consecutive nodes.

    Realizing (a, c) from interpolated (b, e, R) keeps every integrator
    stage exactly physically realizable, which interpolating the assembled
    closed loop would not (the PR identities are quadratic in the gains).
    """
    mid = lambda x: (x[:-1] + x[1:]) / 2.0
    return ControllerParams(dims=params.dims, b=mid(params.b), e=mid(params.e),
                            R=mid(params.R), d=params.d)


@dataclass(frozen=True)
class ClosedLoop:
    """Assembled closed-loop matrices per node, plus weights and noise CCR."""

    dims: Dimensions
    A: np.ndarray  # (nodes, 2n, 2n)
    B: np.ndarray  # (nodes, 2n, m1+m2)
    C: np.ndarray  # (nodes, r, 2n)
    F: np.ndarray  # (nodes, r, n)
    G: np.ndarray  # (nodes, r, p2)
    J: np.ndarray  # (m1+m2, m1+m2)

    @property
    def nodes(self):
        return self.A.shape[0]


def assemble_closed_loop(plant, ctrl, F, G):
    """Block assembly of the closed loop at every node.

    A_cl = [[A, E c], [e C, a]];  B_cl = [[B, E d], [e D, b]];  C_cl = [F, G c].
    """
    dims = plant.dims
    nodes = plant.nodes
    if ctrl.nodes != nodes:
        raise ShapeError("assemble_closed_loop: node counts differ")
    F = _sampled(F, "F", nodes, (dims.r, dims.n))
    G = _sampled(G, "G", nodes, (dims.r, dims.p2))
    n, m1, m2 = dims.n, dims.m1, dims.m2
    A_cl = np.empty((nodes, 2 * n, 2 * n))
    B_cl = np.empty((nodes, 2 * n, m1 + m2))
    C_cl = np.empty((nodes, dims.r, 2 * n))
    A_cl[:, :n, :n] = plant.A
    A_cl[:, :n, n:] = plant.E @ ctrl.c
    A_cl[:, n:, :n] = ctrl.e @ plant.C
    A_cl[:, n:, n:] = ctrl.a
    B_cl[:, :n, :m1] = plant.B
    B_cl[:, :n, m1:] = plant.E @ ctrl.d
    B_cl[:, n:, :m1] = ctrl.e @ plant.D
    B_cl[:, n:, m1:] = ctrl.b
    C_cl[:, :, :n] = F
    C_cl[:, :, n:] = G @ ctrl.c
    return ClosedLoop(dims=dims, A=A_cl, B=B_cl, C=C_cl, F=F, G=G,
                      J=dims.j_combined)


@dataclass(frozen=True)
class ClassicalPlantBlocks:
    """Equivalent classical plant of the covariance control problem.

    Row blocks: state dynamics; controlled output; controller-noise
    passthrough; observation.  Column blocks: state, (m1+m2)-dim noise,
    control.
    """

    state: np.ndarray            # A                  (n x n)
    noise_input: np.ndarray      # [B, E d]           (n x (m1+m2))
    control_input: np.ndarray    # E                  (n x p2)
    controlled_state: np.ndarray  # F                 (r x n)
    controlled_control: np.ndarray  # G               (r x p2)
    observation_state: np.ndarray   # C               (p1 x n)
    observation_noise: np.ndarray   # [D, 0]          (p1 x (m1+m2))

    def as_array(self, dims):
        """The full block array, laid out exactly as the four printed rows."""
        n, m1, m2, p1, p2, r = dims.n, dims.m1, dims.m2, dims.p1, dims.p2, dims.r
        return np.block([
            [self.state, self.noise_input, self.control_input],
            [self.controlled_state, np.zeros((r, m1 + m2)), self.controlled_control],
            [np.zeros((m2, n)), np.zeros((m2, m1)), np.eye(m2), np.zeros((m2, p2))],
            [self.observation_state, self.observation_noise, np.zeros((p1, p2))],
        ])


def equivalent_classical_plant(plant, d, F, G, node=0):
    """Blocks of the classical plant whose LQG cost equals the quantum cost."""
    dims = plant.dims
    F = _sampled(F, "F", plant.nodes, (dims.r, dims.n))
    G = _sampled(G, "G", plant.nodes, (dims.r, dims.p2))
    B, E = plant.B[node], plant.E[node]
    return ClassicalPlantBlocks(
        state=plant.A[node].copy(),
        noise_input=np.hstack([B, E @ d]),
        control_input=E.copy(),
        controlled_state=F[node].copy(),
        controlled_control=G[node].copy(),
        observation_state=plant.C[node].copy(),
        observation_noise=np.hstack([plant.D[node], np.zeros((dims.p1, dims.m2))]),
    )


def theta_rhs(theta, A_cl, B_cl, J):
    """Right-hand side of the CCR-matrix Lyapunov ODE: A th + th A^T + B J B^T."""
    return A_cl @ theta + theta @ A_cl.T + B_cl @ J @ B_cl.T


def theta0(K1, j0):
    """Initial closed-loop CCR matrix blkdiag(K1, J0)."""
    n = K1.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = K1
    out[n:, n:] = j0
    return out


def check_initial_covariance(P0, Theta0, tol=1e-10):
    """Quantum admissibility: P0 + i Theta0 / 2 must be positive semidefinite.

    The complex Hermitian test matrix is embedded as the real symmetric
    [[P0, -Theta0/2], [Theta0/2, P0]] whose spectrum doubles the Hermitian one.
    """
    P0 = as_matrix(P0, "P0")
    Theta0 = as_matrix(Theta0, "Theta0")
    if P0.shape != Theta0.shape:
        raise ShapeError("check_initial_covariance: shape mismatch")
    s = Theta0 / 2.0
    embedded = np.block([[P0, -s], [s, P0]])
    min_eig = float(np.linalg.eigvalsh((embedded + embedded.T) / 2.0)[0])
    return min_eig >= -tol
