"""Replicator and Lotka-Volterra systems, the exponential chart onto the
simplex interior, and the matrices that relate the three coordinate
descriptions of the same flow."""

from dataclasses import dataclass

import numpy as np

from ._validation import (as_matrix, as_vector, check_affine_simplex_point,
                          check_interior, check_positive, check_simplex_point)
from .exceptions import DomainError, InputError


@dataclass(frozen=True, eq=False)
class ReplicatorSystem:
    """Replicator flow ``x_i' = x_i((Ax)_i - x.Ax)`` on the simplex.

    ``payoff[i, j]`` is the payoff of strategy ``i`` against strategy ``j``.
    """

    payoff: np.ndarray
    labels: tuple = None

    def __post_init__(self):
        A = as_matrix(self.payoff, "payoff", square=True)
        if A.shape[0] < 1:
            raise InputError("payoff must be at least 1x1")
        A.setflags(write=False)
        object.__setattr__(self, "payoff", A)

    @property
    def n(self):
        return self.payoff.shape[0]

    def __repr__(self):
        return f"ReplicatorSystem(n={self.n})"


@dataclass(frozen=True, eq=False)
class LotkaVolterraSystem:
    """Lotka-Volterra flow ``y_i' = y_i(r_i + (A'y)_i)``."""

    interaction: np.ndarray
    growth: np.ndarray
    labels: tuple = None

    def __post_init__(self):
        Ap = as_matrix(self.interaction, "interaction", square=True)
        if Ap.shape[0] < 1:
            raise InputError("interaction must be at least 1x1")
        r = as_vector(self.growth, "growth", Ap.shape[0])
        Ap.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "interaction", Ap)
        object.__setattr__(self, "growth", r)

    @property
    def m(self):
        return self.interaction.shape[0]

    def __repr__(self):
        return f"LotkaVolterraSystem(m={self.m})"


def _payoff(sys):
    if isinstance(sys, ReplicatorSystem):
        return sys.payoff
    return ReplicatorSystem(sys).payoff


def _lv(sys):
    if isinstance(sys, LotkaVolterraSystem):
        return sys.interaction, sys.growth
    Ap, r = sys
    sys = LotkaVolterraSystem(Ap, r)
    return sys.interaction, sys.growth


def normalize_payoff(sys):
    """Subtract the last row from every row.

    The result has a zero last row and defines the same vector field on the
    simplex, since matrices with equal rows generate the zero field.
    """
    A = _payoff(sys)
    labels = sys.labels if isinstance(sys, ReplicatorSystem) else None
    return ReplicatorSystem(A - A[-1], labels)


def replicator_field(sys, x):
    A = _payoff(sys)
    x = as_vector(x, "x", A.shape[0])
    Ax = A @ x
    return x * (Ax - x @ Ax)


def lv_field(sys, y):
    Ap, r = _lv(sys)
    y = as_vector(y, "y", Ap.shape[0])
    return y * (r + Ap @ y)


def pi_A(sys, x):
    """The state-dependent bivector ``-T_x D_x A D_x T_x^T`` with
    ``T_x = x 1^T - I``."""
    A = _payoff(sys)
    x = check_simplex_point(x, A.shape[0])
    n = x.size
    T = np.outer(x, np.ones(n)) - np.eye(n)
    TD = T * x  # T @ diag(x)
    return -TD @ A @ TD.T


def _softmax_tail(u):
    """Return ``exp(u) / (1 + sum exp(u))`` and ``1 / (1 + sum exp(u))``
    without overflow."""
    u = np.asarray(u, dtype=float)
    top = max(0.0, float(u.max())) if u.size else 0.0
    e = np.exp(u - top)
    denom = np.exp(-top) + e.sum()
    return e / denom, np.exp(-top) / denom


def phi(u):
    """Chart ``R^{n-1} -> simplex interior`` by normalized exponentials."""
    u = as_vector(u, "u")
    head, last = _softmax_tail(u)
    return np.append(head, last)


def phi_inv(x):
    x = as_vector(x, "x")
    try:
        x = check_interior(x, name="x")
    except DomainError as exc:
        raise DomainError(f"phi_inv needs an interior point: {exc}") from None
    return np.log(x[:-1] / x[-1])


def dphi(u):
    """Jacobian of :func:`phi`, shape ``(n, n-1)``."""
    x = phi(u)
    return (np.diag(x) - np.outer(x, x))[:, :-1]


def scalar_factor(u):
    """``1 + sum(exp(u))``, the positive factor relating the two u-chart
    fields."""
    u = as_vector(u, "u")
    return 1.0 + float(np.exp(u).sum())


def build_E(n):
    if int(n) != n or n < 2:
        raise InputError("build_E needs an integer n >= 2")
    n = int(n)
    return np.hstack([-np.eye(n - 1), np.ones((n - 1, 1))])


def B_of(sys):
    """The constant matrix ``-E A E^T`` of the u-chart field."""
    A = _payoff(sys)
    E = build_E(A.shape[0])
    return -E @ A @ E.T


def eta_q(q, u):
    """Differential of ``H_q o phi``: ``q_i - phi(u)_i`` for ``i < n``."""
    u = as_vector(u, "u")
    q = check_affine_simplex_point(q, u.size + 1)
    head, _ = _softmax_tail(u)
    return q[:-1] - head


def xtilde_field(B, q, u):
    B = as_matrix(B, "B", square=True)
    return B @ eta_q(q, u)


def ybold_field(B, q, u):
    return scalar_factor(u) * xtilde_field(B, q, u)


def lv_to_replicator(sys):
    """Payoff ``[[A', r], [0, 0]]`` of the equivalent replicator system."""
    Ap, r = _lv(sys)
    m = Ap.shape[0]
    A = np.zeros((m + 1, m + 1))
    A[:m, :m] = Ap
    A[:m, m] = r
    labels = sys.labels if isinstance(sys, LotkaVolterraSystem) else None
    if labels is not None:
        labels = tuple(labels) + ("(reference)",)
    return ReplicatorSystem(A, labels)


def replicator_to_lv(sys):
    """``a'_ij = a_ij - a_nj`` and ``r_i = a_in - a_nn``."""
    A = normalize_payoff(sys).payoff
    if A.shape[0] < 2:
        raise InputError("need n >= 2 to build a Lotka-Volterra system")
    labels = sys.labels if isinstance(sys, ReplicatorSystem) else None
    if labels is not None:
        labels = tuple(labels)[:-1]
    return LotkaVolterraSystem(A[:-1, :-1], A[:-1, -1], labels)


def to_lv_coordinates(x):
    """``y_i = x_i / x_n`` on the simplex interior."""
    x = check_interior(x)
    return x[:-1] / x[-1]


def from_lv_coordinates(y):
    y = check_positive(y)
    s = 1.0 + y.sum()
    return np.append(y / s, 1.0 / s)


def lv_coordinates_jacobian(x):
    """Jacobian of ``x -> x_{1..n-1} / x_n``, shape ``(n-1, n)``."""
    x = check_interior(x)
    xn = x[-1]
    J = np.hstack([np.eye(x.size - 1) / xn, (-x[:-1] / xn**2)[:, None]])
    return J


@dataclass(frozen=True, eq=False)
class ProjectiveTransform:
    """``xbar_i = c_i x_i / sum_j c_j x_j`` together with the transformed
    system ``A diag(1/c)``.

    The push-forward of ``X_A`` under :meth:`map` equals
    ``time_factor(xbar) * X_Atilde(xbar)``.
    """

    system: ReplicatorSystem
    c: np.ndarray

    def map(self, x):
        x = as_vector(x, "x", self.c.size)
        w = self.c * x
        return w / w.sum()

    def inverse(self, xbar):
        xbar = as_vector(xbar, "xbar", self.c.size)
        w = xbar / self.c
        return w / w.sum()

    def jacobian(self, x):
        x = as_vector(x, "x", self.c.size)
        S = self.c @ x
        return np.diag(self.c) / S - np.outer(self.c * x, self.c) / S**2

    def time_factor(self, xbar):
        xbar = as_vector(xbar, "xbar", self.c.size)
        return 1.0 / float(xbar @ (1.0 / self.c))


def projective_transform(sys, c):
    A = _payoff(sys)
    c = as_vector(c, "c", A.shape[0])
    if np.any(c <= 0):
        raise InputError("projective weights c must be strictly positive")
    c = c.copy()
    c.setflags(write=False)
    return ProjectiveTransform(ReplicatorSystem(A / c[None, :]), c)


def restrict_to_face(sys, kept):
    """Replicator system of the face spanned by the ``kept`` strategies."""
    A = _payoff(sys)
    idx = np.asarray(list(kept), dtype=int)
    if idx.size == 0:
        raise InputError("face index set must be nonempty")
    if np.any(idx < 0) or np.any(idx >= A.shape[0]) or np.unique(idx).size != idx.size:
        raise InputError(f"invalid face indices {idx.tolist()}")
    labels = None
    if isinstance(sys, ReplicatorSystem) and sys.labels is not None:
        labels = tuple(sys.labels[i] for i in idx)
    return ReplicatorSystem(A[np.ix_(idx, idx)], labels)
