"""Grade-r linear operators on matrix spaces.

An operator of grade r is a sum of two-sided multiplications

    op(X) = sum_k  alpha_k @ X @ beta_k

written ``[[a1,b1 | ... | ar,br]]``.  It is self-adjoint (for the Frobenius
inner product) when every pair (alpha_k, beta_k) is either jointly symmetric
or jointly antisymmetric.  Inversion goes through the matricization

    gamma = sum_k  kron(beta_k^T, alpha_k),

the unique matrix with vec(op(X)) = gamma @ vec(X).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, SingularOperatorError
from .linalg import as_matrix, devectorize, vectorize

# Condition-estimate ceiling for exact solves, and the relative singular-value
# cutoff of the pseudoinverse (handles the Q_T = 0 terminal node gracefully).
COND_LIMIT = 1e14
PINV_RCOND = 1e-10

_STRUCT_TOL = 1e-12


@dataclass(frozen=True)
class SelfAdjointCertificate:
    """Per-pair symmetry record; self-adjoint iff no pair is 'neither'."""

    is_self_adjoint: bool
    per_pair_kind: tuple[str, ...]  # both_symmetric | both_antisymmetric | neither


@dataclass(frozen=True)
class GradeROperator:
    """Operator ``X -> sum_k alpha_k X beta_k`` with a fixed pair list."""

    pairs: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        if not self.pairs:
            raise ShapeError("GradeROperator: pair list must be non-empty")
        pairs = tuple(
            (as_matrix(a, f"alpha[{k}]"), as_matrix(b, f"beta[{k}]"))
            for k, (a, b) in enumerate(self.pairs)
        )
        a0, b0 = pairs[0]
        for k, (a, b) in enumerate(pairs):
            if a.shape != a0.shape or b.shape != b0.shape:
                raise ShapeError(f"GradeROperator: pair {k} breaks shape consistency")
        object.__setattr__(self, "pairs", pairs)

    @property
    def grade(self):
        return len(self.pairs)

    @property
    def domain_shape(self):
        a, b = self.pairs[0]
        return (a.shape[1], b.shape[0])

    @property
    def codomain_shape(self):
        a, b = self.pairs[0]
        return (a.shape[0], b.shape[1])

    @property
    def is_square(self):
        return self.domain_shape == self.codomain_shape

    def apply(self, x):
        x = as_matrix(x, "X")
        if x.shape != self.domain_shape:
            raise ShapeError(f"apply: X shape {x.shape} != domain {self.domain_shape}")
        out = np.zeros(self.codomain_shape)
        for a, b in self.pairs:
            out += a @ x @ b
        return out

    __call__ = apply

    def adjoint(self):
        """Frobenius adjoint: transpose every pair."""
        return GradeROperator(tuple((a.T, b.T) for a, b in self.pairs))

    def to_matrix(self):
        """Matricization gamma with vec(apply(X)) = gamma @ vec(X)."""
        return sum(np.kron(b.T, a) for a, b in self.pairs)

    def certificate(self, tol=_STRUCT_TOL):
        kinds = []
        for a, b in self.pairs:
            scale_a = tol * (1.0 + np.linalg.norm(a))
            scale_b = tol * (1.0 + np.linalg.norm(b))
            if a.shape[0] != a.shape[1] or b.shape[0] != b.shape[1]:
                kinds.append("neither")
            elif (np.linalg.norm(a - a.T) <= scale_a
                  and np.linalg.norm(b - b.T) <= scale_b):
                kinds.append("both_symmetric")
            elif (np.linalg.norm(a + a.T) <= scale_a
                  and np.linalg.norm(b + b.T) <= scale_b):
                kinds.append("both_antisymmetric")
            else:
                kinds.append("neither")
        kinds = tuple(kinds)
        return SelfAdjointCertificate(
            is_self_adjoint=all(k != "neither" for k in kinds),
            per_pair_kind=kinds,
        )

    def solve(self, y, mode="exact"):
        """Solve op(X) = Y through the matricization.

        ``exact`` raises SingularOperatorError when the condition estimate of
        gamma exceeds 1e14; ``pseudo`` returns the minimum-norm least-squares
        solution with relative singular-value threshold 1e-10.
        """
        if not self.is_square:
            raise ShapeError("solve: operator domain and codomain differ")
        y = as_matrix(y, "Y")
        if y.shape != self.codomain_shape:
            raise ShapeError(f"solve: Y shape {y.shape} != codomain {self.codomain_shape}")
        gamma = self.to_matrix()
        if mode == "exact":
            cond = np.linalg.cond(gamma)
            if not np.isfinite(cond) or cond > COND_LIMIT:
                raise SingularOperatorError(
                    f"grade-{self.grade} operator is numerically singular (cond~{cond:.2e})"
                )
            sol = np.linalg.solve(gamma, vectorize(y))
        elif mode == "pseudo":
            sol = np.linalg.pinv(gamma, rcond=PINV_RCOND) @ vectorize(y)
        else:
            raise ShapeError(f"solve: unknown mode {mode!r}")
        return devectorize(sol, *self.domain_shape)

    def definiteness(self):
        """Certificate plus the sorted spectrum of the matricization.

        For a self-adjoint operator the eigenvalues are those of the
        symmetrized gamma (symmetrization kills floating-point asymmetry);
        otherwise real parts of the eigenvalues of gamma are reported and the
        certificate flags the operator as not self-adjoint.
        """
        if not self.is_square:
            raise ShapeError("definiteness: operator must be square")
        cert = self.certificate()
        gamma = self.to_matrix()
        if cert.is_self_adjoint:
            eigs = np.linalg.eigvalsh((gamma + gamma.T) / 2.0)
        else:
            eigs = np.sort(np.linalg.eigvals(gamma).real)
        return cert, eigs

    def min_eigenvalue(self):
        return float(self.definiteness()[1][0])
