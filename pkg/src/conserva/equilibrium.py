"""Formal equilibria as affine solution sets of linear systems.

For Lotka-Volterra systems the solver requires ``A'q' + r = 0``. Points of
the trivial extension where some ``q'_i = 0`` while its fitness is nonzero
are equilibria of that extension too, but they do not map to formal
equilibria of the equivalent replicator system, so they are not returned.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_vector
from .exceptions import DegenerateNormalizationError
from .linalg import DEFAULT_RANK_TOL, nullspace_basis
from .systems import _lv, _payoff

FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    representative: np.ndarray
    residual: float
    degrees_of_freedom: int
    basis: np.ndarray
    feasible: bool

    def to_dict(self):
        return {
            "feasible": bool(self.feasible),
            "representative": self.representative.tolist(),
            "residual": float(self.residual),
            "degrees_of_freedom": int(self.degrees_of_freedom),
            "basis": self.basis.tolist(),
        }


def _solve_affine(M, b, rank_tol):
    """Minimum-norm least-squares solution of ``M q = b`` plus the kernel."""
    scale = max(1.0, float(np.abs(M).max()) if M.size else 1.0)
    sol, *_ = np.linalg.lstsq(M, b, rcond=rank_tol)
    residual = float(np.abs(M @ sol - b).max()) if b.size else 0.0
    null = nullspace_basis(M, rank_tol) if M.shape[0] else nullspace_basis(
        np.zeros((0, M.shape[1])), rank_tol)
    feasible = residual <= FEASIBILITY_TOL * scale * max(1.0, float(np.abs(sol).max()))
    return EquilibriumResult(sol, residual, null.dimension, null.basis, feasible)


def formal_equilibrium_replicator(sys, rank_tol=DEFAULT_RANK_TOL):
    """Points ``q`` with all ``(Aq)_i`` equal and ``sum(q) = 1``.

    Infeasibility is reported through ``feasible=False`` rather than raised.
    """
    A = _payoff(sys)
    n = A.shape[0]
    M = np.vstack([A[:-1] - A[-1], np.ones((1, n))])
    b = np.zeros(n)
    b[-1] = 1.0
    return _solve_affine(M, b, rank_tol)


def formal_equilibrium_lv(sys, rank_tol=DEFAULT_RANK_TOL):
    """Solutions of ``A'q' = -r``; entries may have any sign."""
    Ap, r = _lv(sys)
    return _solve_affine(Ap, -r, rank_tol)


def normalize_lv_equilibrium(qprime):
    """Map ``q'`` to ``(q'/(1+sum q'), 1/(1+sum q'))``."""
    qprime = as_vector(qprime, "qprime")
    s = 1.0 + qprime.sum()
    if abs(s) < 1e-14 * max(1.0, float(np.abs(qprime).sum())):
        raise DegenerateNormalizationError("1 + sum(q') vanishes")
    return np.append(qprime / s, 1.0 / s)
