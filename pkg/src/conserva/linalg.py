"""Rank-revealing nullspaces and the two structural residuals used by the
certificate searches."""

from dataclasses import dataclass, field

import numpy as np

from ._validation import as_matrix
from .exceptions import InputError

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class NullspaceResult:
    """Orthonormal basis of a kernel.

    ``basis`` has shape ``(dimension, cols)``; each row is one unit-norm
    kernel vector.
    """

    dimension: int
    basis: np.ndarray
    rank_tolerance: float
    singular_values: np.ndarray = field(repr=False, default=None)

    @property
    def rank(self):
        return self.basis.shape[1] - self.dimension


def _fix_sign(v):
    # first entry of (numerically) largest magnitude made positive
    k = int(np.argmax(np.abs(v) >= np.abs(v).max() * (1 - 1e-12)))
    return -v if v[k] < 0 else v


def numerical_rank(M, rank_tol=DEFAULT_RANK_TOL):
    M = as_matrix(M, "M")
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


def nullspace_basis(M, rank_tol=DEFAULT_RANK_TOL):
    """Orthonormal basis of ``{v : M v = 0}``.

    Singular values below ``rank_tol * sigma_max`` count as zero. A matrix
    with no rows (or the zero matrix) has the whole space as its kernel.

    Parameters
    ----------
    M : array_like, shape (rows, cols)
    rank_tol : float
        Relative singular-value threshold.

    Returns
    -------
    NullspaceResult
    """
    if not rank_tol > 0:
        raise InputError("rank_tol must be positive")
    M = as_matrix(M, "M")
    rows, cols = M.shape
    if rows == 0 or cols == 0 or not np.any(M):
        basis = np.eye(cols)
        return NullspaceResult(cols, basis, rank_tol, np.zeros(min(rows, cols)))
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    rank = int(np.count_nonzero(s > rank_tol * s[0]))
    basis = np.array([_fix_sign(v) for v in vh[rank:]]).reshape(cols - rank, cols)
    return NullspaceResult(cols - rank, basis, rank_tol, s)


def skew_residual(M):
    """Largest absolute entry of ``M + M^T``."""
    M = as_matrix(M, "M", square=True)
    if M.size == 0:
        return 0.0
    return float(np.abs(M + M.T).max())


def offdiag_residual(M):
    """Largest absolute off-diagonal entry of ``M``."""
    M = as_matrix(M, "M", square=True)
    if M.shape[0] < 2:
        return 0.0
    off = M - np.diag(np.diag(M))
    return float(np.abs(off).max())


def orthonormalize(vectors, rank_tol=DEFAULT_RANK_TOL):
    """Orthonormal basis (rows) of the span of the given row vectors."""
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    if V.size == 0:
        return V.reshape(0, V.shape[-1] if V.ndim == 2 else 0)
    u, s, vh = np.linalg.svd(V, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((0, V.shape[1]))
    rank = int(np.count_nonzero(s > rank_tol * s[0]))
    return vh[:rank]


def projection_residual(vectors, basis):
    """Max over ``vectors`` of ``||v - P v|| / ||v||`` where ``P`` projects
    onto the row span of ``basis``.

    Zero vectors contribute nothing. An empty ``basis`` gives residual 1 for
    every nonzero vector.
    """
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    Q = orthonormalize(basis) if np.size(basis) else np.zeros((0, V.shape[1]))
    worst = 0.0
    for v in V:
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        r = v - Q.T @ (Q @ v)
        worst = max(worst, float(np.linalg.norm(r) / nv))
    return worst


def subspace_residual(basis_a, basis_b):
    """Symmetric projection residual between two spans."""
    return max(projection_residual(basis_a, basis_b),
               projection_residual(basis_b, basis_a))
