"""Classification of the constant pair ``(B, D)``.

The subbundle ``{(f B z, f D^T z)}`` with ``f(u) = 1 + sum(exp(u)) > 0`` is
isotropic iff ``DB`` is skew-symmetric, and maximal iff
``ker B ∩ ker D^T = 0``. Since ``f`` never vanishes it does not enter any
verdict. Closure under the Courant bracket follows from isotropy for this
family and is not checked numerically; likewise the Jacobi identity holds
trivially for the constant bivector ``B (D^T)^{-1}``.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix
from .conservation import CERTIFICATE_TOL, make_certificate
from .exceptions import InputError, InvalidCertificateError
from .linalg import DEFAULT_RANK_TOL, nullspace_basis, numerical_rank, skew_residual
from .systems import eta_q, scalar_factor, ybold_field

ISOTROPY_TOL = 1e-8
FD_STEP = 1e-6

LABELS = ("symplectic", "presymplectic", "Poisson", "Dirac", "big-isotropic", "none")


@dataclass(frozen=True, eq=False)
class StructureClassification:
    isotropic: bool
    isotropy_residual: float
    maximal: bool
    b_invertible: bool
    dt_invertible: bool
    class_label: str
    presymplectic_matrix: np.ndarray = None
    poisson_matrix: np.ndarray = None

    @property
    def is_dirac(self):
        return self.class_label not in ("none", "big-isotropic")

    def to_dict(self):
        return {
            "isotropic": bool(self.isotropic),
            "isotropy_residual": float(self.isotropy_residual),
            "maximal": bool(self.maximal),
            "b_invertible": bool(self.b_invertible),
            "dt_invertible": bool(self.dt_invertible),
            "class_label": self.class_label,
            "presymplectic_matrix": None if self.presymplectic_matrix is None
            else self.presymplectic_matrix.tolist(),
            "poisson_matrix": None if self.poisson_matrix is None
            else self.poisson_matrix.tolist(),
        }


def classify(B, D, rank_tol=DEFAULT_RANK_TOL, iso_tol=ISOTROPY_TOL):
    """Label the structure generated by ``(B, D)``.

    Labels, from most to least special: ``symplectic`` (both ``B`` and
    ``D^T`` invertible), ``presymplectic`` (``B`` invertible, reduction
    ``D^T B^{-1}``), ``Poisson`` (``D^T`` invertible, reduction
    ``B (D^T)^{-1}``), ``Dirac`` (maximal), ``big-isotropic``, and
    ``none`` when ``DB`` is not skew. Every threshold is relative, so the
    label is unchanged when both matrices are scaled by the same positive
    factor.
    """
    B = as_matrix(B, "B", square=True)
    D = as_matrix(D, "D", square=True)
    if B.shape != D.shape:
        raise InputError(f"B {B.shape} and D {D.shape} differ in shape")
    m = B.shape[0]
    res = skew_residual(D @ B)
    isotropic = res <= iso_tol * np.linalg.norm(D) * np.linalg.norm(B)
    stacked = np.vstack([B, D.T])
    maximal = nullspace_basis(stacked, rank_tol).dimension == 0
    b_inv = m > 0 and numerical_rank(B, rank_tol) == m
    dt_inv = m > 0 and numerical_rank(D, rank_tol) == m
    omega = pi = None
    if not isotropic:
        label = "none"
    else:
        if b_inv:
            omega = D.T @ np.linalg.inv(B)
        if dt_inv:
            pi = B @ np.linalg.inv(D.T)
        if b_inv and dt_inv:
            label = "symplectic"
        elif b_inv:
            label = "presymplectic"
        elif dt_inv:
            label = "Poisson"
        elif maximal:
            label = "Dirac"
        else:
            label = "big-isotropic"
    return StructureClassification(bool(isotropic), res, bool(maximal), bool(b_inv),
                                   bool(dt_inv), label, omega, pi)


def verify_hamiltonian_pair(B, D, q, sample_points, tol=CERTIFICATE_TOL, h=FD_STEP):
    """Check that ``(Ybold, dH)`` lies in the structure at each sample.

    At every ``u`` this compares

    * ``ybold_field`` against ``f(u) B eta_q(u)`` (two evaluation paths),
    * ``Ybold / f`` against ``B eta_q(u)``,
    * the closed-form gradient ``c + g exp(u)`` against ``f(u) D^T eta_q(u)``
      and against central finite differences of ``H``.

    Returns a dict of maximum residuals (finite-difference entry relative).
    """
    B = as_matrix(B, "B", square=True)
    D = as_matrix(D, "D", square=True)
    try:
        com = make_certificate(D, q, B, tol).constant("u")
    except InvalidCertificateError as exc:
        raise InvalidCertificateError(f"verify_hamiltonian_pair: {exc}",
                                      exc.skew_residual, exc.offdiag_residual) from None
    out = {"field": 0.0, "scalar_factor": 0.0, "gradient_analytic": 0.0,
           "gradient_fd": 0.0}
    for u in np.atleast_2d(np.asarray(sample_points, dtype=float)):
        if u.size == 0:
            continue
        f = scalar_factor(u)
        eta = eta_q(q, u)
        Bbold_eta = (f * B) @ eta
        Y = ybold_field(B, q, u)
        out["field"] = max(out["field"], float(np.abs(Y - Bbold_eta).max()))
        out["scalar_factor"] = max(out["scalar_factor"],
                                   float(np.abs(Y / f - B @ eta).max()))
        grad = com.grad_u(u)
        out["gradient_analytic"] = max(out["gradient_analytic"],
                                       float(np.abs(grad - (f * D.T) @ eta).max()
                                             / max(1.0, np.abs(grad).max())))
        out["gradient_fd"] = max(out["gradient_fd"], _fd_error(com, u, h))
    return out


def _fd_error(com, u, h=FD_STEP):
    grad = com.grad_u(u)
    fd = np.empty_like(grad)
    for i in range(u.size):
        e = np.zeros_like(u)
        e[i] = h
        fd[i] = (com.H_u(u + e) - com.H_u(u - e)) / (2 * h)
    return float(np.abs(fd - grad).max() / max(1.0, np.abs(grad).max()))
