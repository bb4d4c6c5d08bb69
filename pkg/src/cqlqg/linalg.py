"""Canonical CCR matrices, structured projections and symplectic generation.

All matrices are dense ``numpy`` arrays of ``float64``.  The canonical
antisymmetric block is

    J = [[0, 1], [-1, 0]]

and every CCR matrix used in the package is ``I_mu (x) J`` for some half
dimension ``mu``.  Tolerances are relative: a residual passes when it is
below ``tol * (1 + |operand|_F)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ShapeError

J_BLOCK = np.array([[0.0, 1.0], [-1.0, 0.0]])

SUBSPACES = ("symmetric", "antisymmetric", "hamiltonian", "skew_hamiltonian")

DEFAULT_TOL = 1e-10


def as_matrix(a, name="matrix"):
    """Coerce to a finite 2-D float array; raise ShapeError otherwise."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ShapeError(f"{name}: expected a 2-D array, got ndim={m.ndim}")
    if not np.isfinite(m).all():
        raise ShapeError(f"{name}: entries must be finite (no NaN/Inf)")
    return m


def canonical_ccr(half_dim):
    """CCR matrix ``I_half_dim (x) J`` of order ``2 * half_dim``.

    Antisymmetric, orthogonal, and squares to -I.
    """
    if half_dim < 1:
        raise ShapeError("half_dim must be >= 1")
    return np.kron(np.eye(half_dim), J_BLOCK)


def frobenius(x, y):
    """Frobenius inner product trace(x^T y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ShapeError(f"frobenius: shapes {x.shape} and {y.shape} differ")
    return float(np.sum(x * y))


def project(n, subspace, j0=None):
    """Orthogonal projection of a square matrix onto a structured subspace.

    ``symmetric``        -> (N + N^T)/2
    ``antisymmetric``    -> (N - N^T)/2
    ``hamiltonian``      -> (N + J0 N^T J0)/2, the image in {a : a J0 + J0 a^T = 0}
    ``skew_hamiltonian`` -> N minus its hamiltonian part

    The last two require the CCR matrix ``j0`` of the same order as ``n``.
    """
    n = as_matrix(n, "N")
    if n.shape[0] != n.shape[1]:
        raise ShapeError(f"project: N must be square, got {n.shape}")
    if subspace == "symmetric":
        return (n + n.T) / 2.0
    if subspace == "antisymmetric":
        return (n - n.T) / 2.0
    if subspace in ("hamiltonian", "skew_hamiltonian"):
        if j0 is None:
            raise ShapeError("project: hamiltonian projections need J0")
        j0 = as_matrix(j0, "J0")
        if j0.shape != n.shape:
            raise ShapeError(f"project: J0 shape {j0.shape} != N shape {n.shape}")
        ham = (n + j0 @ n.T @ j0) / 2.0
        return ham if subspace == "hamiltonian" else n - ham
    raise ShapeError(f"project: unknown subspace {subspace!r}")


def kron(a, b):
    """Kronecker product, with vec(a X b) = kron(b^T, a) vec(X) for column-stacked vec."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def vectorize(x):
    """Stack the columns of ``x`` into one vector."""
    return np.asarray(x, dtype=float).flatten(order="F")


def devectorize(v, rows, cols):
    """Inverse of :func:`vectorize` for the given target shape."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size != rows * cols:
        raise ShapeError(f"devectorize: length {v.size} != {rows}*{cols}")
    return v.reshape((rows, cols), order="F")


def mat_exp(n):
    """Matrix exponential (scaling-and-squaring Pade, via scipy)."""
    n = as_matrix(n, "N")
    if n.shape[0] != n.shape[1]:
        raise ShapeError(f"mat_exp: matrix must be square, got {n.shape}")
    return expm(n)


def random_symplectic(seed, order, scale=1.0):
    """Seeded random symplectic matrix exp(J0 R), R symmetric uniform.

    ``scale = 0`` returns the identity.  The result satisfies
    ``sigma J0 sigma^T = J0`` by construction.
    """
    if order % 2 != 0:
        raise ShapeError("random_symplectic: order must be even")
    rng = np.random.default_rng(seed)
    r = rng.uniform(-1.0, 1.0, size=(order, order))
    r = scale * (r + r.T) / 2.0
    j0 = canonical_ccr(order // 2)
    return expm(j0 @ r)


@dataclass(frozen=True)
class StructureFlags:
    """Which structured subspaces a matrix belongs to, within tolerance."""

    symmetric: bool
    antisymmetric: bool
    hamiltonian: bool
    skew_hamiltonian: bool
    symplectic: bool


def classify(n, j0, tol=DEFAULT_TOL):
    """Test membership of ``n`` in each structured class relative to ``j0``.

    A flag is set when the defining residual is below ``tol * (1 + |n|_F)``.
    """
    n = as_matrix(n, "N")
    j0 = as_matrix(j0, "J0")
    if n.shape != j0.shape or n.shape[0] != n.shape[1]:
        raise ShapeError(f"classify: incompatible shapes {n.shape}, {j0.shape}")
    bound = tol * (1.0 + np.linalg.norm(n))
    return StructureFlags(
        symmetric=np.linalg.norm(n - n.T) <= bound,
        antisymmetric=np.linalg.norm(n + n.T) <= bound,
        hamiltonian=np.linalg.norm(n @ j0 + j0 @ n.T) <= bound,
        skew_hamiltonian=np.linalg.norm(project(n, "hamiltonian", j0)) <= bound,
        symplectic=np.linalg.norm(n @ j0 @ n.T - j0) <= bound,
    )
