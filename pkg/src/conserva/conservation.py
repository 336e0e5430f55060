"""Certificate matrices and the constants of motion they produce.

A certificate for the u-chart field ``B eta_q(u)`` is an
``(n-1) x (n-1)`` matrix ``D`` with

1. ``D B`` skew-symmetric, and
2. ``D^T Q1(q)`` diagonal.

Any such ``D`` gives the first integral
``H(u) = sum_i c_i u_i + sum_i g_i exp(u_i)`` with ``c = D^T q[:-1]`` and
``g_i = c_i - D_ii``. Both conditions are linear in ``D``, so the set of
certificates is a subspace and is found as a nullspace.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import (as_matrix, as_vector, check_affine_simplex_point,
                          check_interior, check_positive)
from .exceptions import (DomainError, InputError, InvalidCertificateError,
                         UnsupportedEquilibriumError)
from .linalg import DEFAULT_RANK_TOL, nullspace_basis, offdiag_residual, skew_residual

CERTIFICATE_TOL = 1e-8
CHARTS = ("u", "x", "y")


# --- structural matrices -----------------------------------------------------

def build_Q1(q):
    """``Q1[i, j] = q_i - delta_ij`` for ``i, j < n``."""
    q = check_affine_simplex_point(q)
    m = q.size - 1
    return np.outer(q[:-1], np.ones(m)) - np.eye(m)


def _require_qn(q):
    if q[-1] == 0:
        raise UnsupportedEquilibriumError("construction requires q_n != 0")


def build_Q2(q):
    """``Q2[i, j] = (q_n delta_ij + q_i) / q_n``."""
    q = check_affine_simplex_point(q)
    _require_qn(q)
    m = q.size - 1
    return (q[-1] * np.eye(m) + np.outer(q[:-1], np.ones(m))) / q[-1]

def build_Qbar1(q):
    """A matrix whose columns make ``Qbar1^T Q1`` diagonal.

    Off-diagonal entries are 1 and the diagonal is ``(q_i + q_n) / q_i``.
    Where ``q_i = 0`` that column is replaced by the unit vector ``e_i``.
    """
    q = check_affine_simplex_point(q)
    _require_qn(q)
    m = q.size - 1
    Qb = np.ones((m, m))
    for i in range(m):
        if q[i] == 0:
            Qb[:, i] = 0.0
            Qb[i, i] = 1.0
        else:
            Qb[i, i] = (q[i] + q[-1]) / q[i]
    return Qb


# --- certificate families ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class CertificateFamily:
    """Basis of the certificate subspace found by one search method.

    ``basis`` has shape ``(dimension, m, m)``. For the reduced method
    ``d_basis`` holds the diagonal parameters (shape ``(dimension, m)``) and
    ``basis`` the lifted matrices ``Qbar1 diag(d)``.
    """

    method: str
    basis: np.ndarray
    residuals: list
    d_basis: np.ndarray = None

    @property
    def dimension(self):
        return int(self.basis.shape[0])

    @property
    def flat_basis(self):
        return self.basis.reshape(self.dimension, -1)

    def to_dict(self):
        out = {
            "method": self.method,
            "dimension": self.dimension,
            "basis": self.basis.tolist(),
            "residuals": [{"skew": float(s), "offdiag": float(o)}
                          for s, o in self.residuals],
        }
        if self.d_basis is not None:
            out["d_basis"] = self.d_basis.tolist()
        return out


def _skew_rows(m):
    return [(a, b) for a in range(m) for b in range(a, m)]


def _check_search_inputs(B, q):
    B = as_matrix(B, "B", square=True)
    m = B.shape[0]
    q = check_affine_simplex_point(q, m + 1)
    return B, q, m


def _residual_pair(D, B, Q1):
    return skew_residual(D @ B), offdiag_residual(D.T @ Q1)


def certificate_search_general(B, q, rank_tol=DEFAULT_RANK_TOL):
    """All ``D`` (as a subspace) with ``DB`` skew and ``D^T Q1`` diagonal.

    Unknowns are the ``m**2`` entries of ``D`` in row-major order. The
    skew block contributes ``m(m+1)/2`` equations, the diagonal block
    ``m(m-1)``. An empty family is a valid result.
    """
    B, q, m = _check_search_inputs(B, q)
    Q1 = build_Q1(q)
    # row-major vec(D B) = (I kron B^T) vec(D)
    K = np.kron(np.eye(m), B.T)
    skew = np.array([K[a * m + b] + K[b * m + a] for a, b in _skew_rows(m)])
    bscale = np.abs(B).max() if B.size else 0.0
    if bscale > 0:
        skew = skew / bscale
    diag_rows = []
    for a in range(m):
        for b in range(m):
            if a == b:
                continue
            row = np.zeros((m, m))
            row[:, a] = Q1[:, b]
            diag_rows.append(row.ravel())
    diag = np.array(diag_rows).reshape(-1, m * m)
    system = np.vstack([skew.reshape(-1, m * m), diag])
    null = nullspace_basis(system, rank_tol)
    basis = null.basis.reshape(null.dimension, m, m)
    residuals = [_residual_pair(D, B, Q1) for D in basis]
    return CertificateFamily("general", basis, residuals)


def certificate_search_reduced(A_sub, q, rank_tol=DEFAULT_RANK_TOL):
    """Certificates of the form ``Qbar1 diag(d)``.

    Solves ``M(d) + M(d)^T = 0`` for ``M(d) = Qbar1 diag(d) A_sub Q2``,
    which is linear in the ``m`` entries of ``d``. ``A_sub`` is the leading
    block of a payoff with zero last row that has ``q`` as a formal
    equilibrium; the u-chart matrix is then ``B = -A_sub Q2``.
    """
    A_sub = as_matrix(A_sub, "A_sub", square=True)
    m = A_sub.shape[0]
    q = check_affine_simplex_point(q, m + 1)
    Q2 = build_Q2(q)
    Qb = build_Qbar1(q)
    S = A_sub @ Q2
    cols = []
    for k in range(m):
        Mk = np.outer(Qb[:, k], S[k])
        cols.append([Mk[a, b] + Mk[b, a] for a, b in _skew_rows(m)])
    C = np.array(cols).T.reshape(-1, m)
    scale = np.abs(C).max() if C.size else 0.0
    if scale > 0:
        C = C / scale
    null = nullspace_basis(C, rank_tol)
    d_basis = null.basis
    basis = np.array([Qb * d[None, :] for d in d_basis]).reshape(-1, m, m)
    B = -S
    Q1 = build_Q1(q)
    residuals = [_residual_pair(D, B, Q1) for D in basis]
    return CertificateFamily("reduced", basis, residuals, d_basis)


def certificate_residuals(D, B, q):
    """``(skew_residual(DB), offdiag_residual(D^T Q1))``."""
    D = as_matrix(D, "D", square=True)
    B = as_matrix(B, "B", square=True)
    if D.shape != B.shape:
        raise InputError(f"D {D.shape} and B {B.shape} differ in shape")
    return _residual_pair(D, B, build_Q1(q))


def is_valid_certificate(D, B, q, tol=CERTIFICATE_TOL):
    s, o = certificate_residuals(D, B, q)
    nD, nB = np.linalg.norm(D), np.linalg.norm(B)
    return s < tol * (1 + nD * nB) and o < tol * (1 + nD)


# --- constants of motion -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConstantOfMotion:
    """``H = sum c_i log(y_i) + sum g_i y_i`` with ``y = exp(u) = x/x_n``.

    ``chart`` names the coordinates the owner naturally works in; all three
    evaluators are always available. ``additive_constant`` is bookkeeping
    only and is not included by :meth:`evaluate` unless asked.
    """

    c: np.ndarray
    g: np.ndarray
    chart: str = "u"
    additive_constant: float = 0.0

    def __post_init__(self):
        c = as_vector(self.c, "c")
        g = as_vector(self.g, "g", c.size)
        if self.chart not in CHARTS:
            raise InputError(f"chart must be one of {CHARTS}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "g", g)

    @property
    def m(self):
        return self.c.size

    def H_u(self, u):
        u = as_vector(u, "u", self.m)
        return float(self.c @ u + self.g @ np.exp(u))

    def H_x(self, x):
        try:
            x = check_interior(x, self.m + 1)
        except DomainError as exc:
            raise DomainError(f"H_x needs an interior simplex point: {exc}") from None
        y = x[:-1] / x[-1]
        return float(self.c @ np.log(y) + self.g @ y)

    def H_y(self, y):
        y = check_positive(y, self.m)
        return float(self.c @ np.log(y) + self.g @ y)

    def evaluate(self, point, chart=None, with_constant=False):
        chart = chart or self.chart
        fn = {"u": self.H_u, "x": self.H_x, "y": self.H_y}[chart]
        value = fn(point)
        return value + self.additive_constant if with_constant else value

    def grad_u(self, u):
        u = as_vector(u, "u", self.m)
        return self.c + self.g * np.exp(u)

    def to_dict(self):
        return {"chart": self.chart, "c": self.c.tolist(), "g": self.g.tolist(),
                "additive_constant": float(self.additive_constant)}


def eval_H(com, point, chart=None):
    return com.evaluate(point, chart)


def grad_H_u(com, u):
    return com.grad_u(u)


@dataclass(frozen=True, eq=False)
class ConservationCertificate:
    D: np.ndarray
    q: np.ndarray
    c: np.ndarray = field(init=False)
    g: np.ndarray = field(init=False)
    skew_residual: float = float("nan")
    offdiag_residual: float = float("nan")

    def __post_init__(self):
        D = as_matrix(self.D, "D", square=True)
        q = check_affine_simplex_point(self.q, D.shape[0] + 1)
        c = D.T @ q[:-1]
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "g", c - np.diag(D))

    def constant(self, chart="u"):
        return ConstantOfMotion(self.c, self.g, chart)

    def to_dict(self):
        return {"D": self.D.tolist(), "q": self.q.tolist(), "c": self.c.tolist(),
                "g": self.g.tolist(), "skew_residual": float(self.skew_residual),
                "offdiag_residual": float(self.offdiag_residual)}


def make_certificate(D, q, B=None, tol=CERTIFICATE_TOL):
    """Build ``(c, g)`` from ``D`` after checking both conditions.

    The skew condition needs ``B``; without it only the diagonal condition
    is checked.
    """
    D = as_matrix(D, "D", square=True)
    q = check_affine_simplex_point(q, D.shape[0] + 1)
    o = offdiag_residual(D.T @ build_Q1(q))
    nD = np.linalg.norm(D)
    s = float("nan")
    bad = o >= tol * (1 + nD)
    if B is not None:
        B = as_matrix(B, "B", square=True)
        if B.shape != D.shape:
            raise InputError(f"D {D.shape} and B {B.shape} differ in shape")
        s = skew_residual(D @ B)
        bad = bad or s >= tol * (1 + nD * np.linalg.norm(B))
    if bad:
        raise InvalidCertificateError(
            f"D is not a certificate: skew residual of DB = {s:.3e}, "
            f"off-diagonal residual of D^T Q1 = {o:.3e}", s, o)
    return ConservationCertificate(D, q, skew_residual=s, offdiag_residual=o)


def representative_certificate(family, q, B=None):
    """Pick the basis element with the largest ``||D^T q||`` and scale it so
    the largest-magnitude entry of ``c`` is ``+1``.

    Returns ``None`` for an empty family.
    """
    if family.dimension == 0:
        return None
    q = as_vector(q, "q")
    norms = [np.linalg.norm(D.T @ q[:-1]) for D in family.basis]
    D = family.basis[int(np.argmax(norms))].copy()
    c = D.T @ q[:-1]
    if np.abs(c).max() > 1e-12 * max(1.0, np.abs(D).max()):
        # near-ties go to the lowest index so the sign is reproducible
        mag = np.abs(c)
        k = int(np.flatnonzero(mag >= mag.max() * (1 - 1e-9))[0])
        D = D / c[k]
    else:
        k = int(np.argmax(np.abs(D.ravel())))
        D = D / D.ravel()[k]
    return make_certificate(D, q, B)


def certificate_matrix(c, g):
    """The matrix ``D`` whose certificate coefficients are ``(c, g)``.

    The diagonal condition forces ``D[j, i] = c_i`` off the diagonal, and
    ``g_i = c_i - D_ii`` fixes the diagonal.
    """
    c = as_vector(c, "c")
    g = as_vector(g, "g", c.size)
    D = np.tile(c, (c.size, 1))
    D[np.diag_indices(c.size)] = c - g
    return D


# --- the gauge-transformation route -----------------------------------------

@dataclass(frozen=True, eq=False)
class GaugeResult:
    success: bool
    d: np.ndarray = None
    reason: str = ""

    @property
    def matrix(self):
        return None if self.d is None else np.diag(self.d)


def gauge_skew_symmetrizer(Aprime, rel_tol=1e-9):
    """Positive ``d'`` with ``A' diag(d')`` skew-symmetric, or a failure.

    Every coupled pair ``(i, j)`` fixes the ratio ``d'_j / d'_i =
    -a'_ji / a'_ij``, which must be positive. Ratios are propagated
    breadth-first over each connected component (root value 1) and then
    checked against every edge, which catches inconsistent cycles.
    """
    A = as_matrix(Aprime, "Aprime", square=True)
    m = A.shape[0]
    scale = np.abs(A).max() if A.size else 0.0
    if np.any(np.abs(np.diag(A)) > 0):
        return GaugeResult(False, None, "nonzero diagonal")
    d = np.full(m, np.nan)
    for root in range(m):
        if not np.isnan(d[root]):
            continue
        d[root] = 1.0
        queue = [root]
        while queue:
            i = queue.pop(0)
            for j in range(m):
                if j == i or (A[i, j] == 0 and A[j, i] == 0):
                    continue
                if A[i, j] == 0 or A[j, i] == 0:
                    return GaugeResult(False, None, f"one-sided coupling between {i} and {j}")
                ratio = -A[j, i] / A[i, j]
                if ratio <= 0:
                    return GaugeResult(False, None, f"same-sign coupling between {i} and {j}")
                if np.isnan(d[j]):
                    d[j] = d[i] * ratio
                    queue.append(j)
    M = A * d[None, :]
    if scale > 0 and skew_residual(M) > rel_tol * scale * np.abs(d).max():
        return GaugeResult(False, None, "inconsistent ratios around a cycle")
    return GaugeResult(True, d, "")


def certificate_from_gauge(qprime, Dprime):
    """y-chart constant ``sum (q'_i log y_i - y_i) / d'_i``.

    The offset ``-sum (q'_i/d'_i) log q'_i`` is kept as
    ``additive_constant``.
    """
    qprime = as_vector(qprime, "qprime")
    dp = np.asarray(Dprime, dtype=float)
    if dp.ndim == 2:
        dp = np.diag(dp)
    dp = as_vector(dp, "Dprime", qprime.size)
    if np.any(qprime <= 0) or np.any(dp <= 0):
        raise InputError("q' and d' must be strictly positive")
    c = qprime / dp
    return ConstantOfMotion(c, -1.0 / dp, "y", float(-(c @ np.log(qprime))))


def classical_integral(qprime):
    """``H(y) = sum(y_j - q'_j log y_j)``."""
    qprime = as_vector(qprime, "qprime")
    if np.any(qprime <= 0):
        raise InputError("q' must be strictly positive")

    def H(y):
        y = check_positive(y, qprime.size)
        return float(np.sum(y - qprime * np.log(y)))

    return H
