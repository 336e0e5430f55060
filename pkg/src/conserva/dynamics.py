"""Integration of the four flows and the numerical identity checks.

States are never projected back onto the simplex; the drift of
``sum(x) - 1`` is recorded instead so that field-evaluation bugs stay
visible. Leaving the domain stops the run with a flagged status.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45

from ._validation import as_vector, check_positive, check_simplex_point
from .exceptions import DomainError, InputError
from .systems import (B_of, ReplicatorSystem, _lv, _payoff, dphi, lv_field,
                      lv_coordinates_jacobian, phi, pi_A, replicator_field,
                      replicator_to_lv, to_lv_coordinates, xtilde_field, ybold_field)

log = logging.getLogger(__name__)

FIELDS = ("replicator", "lv", "xtilde", "ybold")
FIELD_CHART = {"replicator": "x", "lv": "y", "xtilde": "u", "ybold": "u"}
FD_STEP = 1e-6


@dataclass
class IntegratorConfig:
    """``method`` is ``"rk45"`` (adaptive Dormand-Prince 4(5), uses the
    tolerances) or ``"rk4"`` (classical fixed step, uses ``step``)."""

    method: str = "rk45"
    step: float = 1e-2
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    t_end: float = 10.0
    max_steps: int = 1_000_000
    record_every: int = 1
    domain_tol: float = 1e-12

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise InputError(f"unknown integrator method {self.method!r}")
        for name in ("step", "abs_tol", "rel_tol", "t_end"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        if self.max_steps < 1 or self.record_every < 1:
            raise InputError("max_steps and record_every must be >= 1")


@dataclass
class Trajectory:
    field: str
    times: np.ndarray
    states: np.ndarray
    observables: dict = field(default_factory=dict)
    drift: dict = field(default_factory=dict)
    status: str = "completed"
    message: str = ""

    @property
    def chart(self):
        return FIELD_CHART[self.field]

    @property
    def completed(self):
        return self.status == "completed"

    def drift_summary(self):
        return {"status": self.status, "message": self.message,
                "t_final": float(self.times[-1]), "n_records": int(self.times.size),
                "drift": self.drift}


def _rhs_and_domain(field_name, system, x0):
    if field_name == "replicator":
        A = _payoff(system)
        x0 = check_simplex_point(x0, A.shape[0], "x0")

        def rhs(t, x):
            Ax = A @ x
            return x * (Ax - x @ Ax)

        return rhs, x0, lambda x, tol: bool(np.all(x >= -tol))
    if field_name == "lv":
        Ap, r = _lv(system)
        x0 = check_positive(x0, Ap.shape[0], "y0")
        return (lambda t, y: y * (r + Ap @ y)), x0, lambda y, tol: bool(np.all(y > -tol))
    if field_name in ("xtilde", "ybold"):
        B, q = system
        B = np.asarray(B, dtype=float)
        x0 = as_vector(x0, "u0", B.shape[0])
        f = xtilde_field if field_name == "xtilde" else ybold_field
        return (lambda t, u: f(B, q, u)), x0, lambda u, tol: True
    raise InputError(f"field must be one of {FIELDS}, got {field_name!r}")


def _observe(field_name, states, constant):
    obs = {}
    if constant is not None:
        chart = FIELD_CHART[field_name]
        vals = np.empty(len(states))
        for k, s in enumerate(states):
            try:
                vals[k] = constant.evaluate(s, chart)
            except DomainError:
                vals[k] = np.nan
        obs["H"] = vals
    if field_name == "replicator":
        obs["sum_diag"] = states.sum(axis=1) - 1.0
    if field_name in ("replicator", "lv"):
        obs["min_coord"] = states.min(axis=1)
    return obs


def drift_stats(series):
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        return {"max_abs": 0.0, "max_rel": 0.0}
    dev = np.abs(series - series[0])
    max_abs = float(np.max(dev)) if np.all(np.isfinite(dev)) else float("inf")
    return {"max_abs": max_abs, "max_rel": max_abs / max(1.0, abs(float(series[0])))}


def integrate(field_name, system, x0, config=None, constant=None):
    """Integrate one of the four flows.

    Parameters
    ----------
    field_name : {"replicator", "lv", "xtilde", "ybold"}
    system : ReplicatorSystem, LotkaVolterraSystem or ``(B, q)``
        ``(B, q)`` is used by the two u-chart fields.
    x0 : array_like
        Simplex point, positive orthant point, or u-chart point.
    config : IntegratorConfig, optional
    constant : ConstantOfMotion, optional
        Evaluated along the trajectory (in the field's natural chart) as the
        ``"H"`` observable.

    Returns
    -------
    Trajectory
        ``status`` is ``"completed"``, ``"domain_exit"``, ``"max_steps"`` or
        ``"failed"``; the states recorded up to that point are kept.
    """
    config = config or IntegratorConfig()
    rhs, x0, in_domain = _rhs_and_domain(field_name, system, x0)
    times, states = [0.0], [x0.copy()]
    status, message = "completed", ""

    def accept(t, x, nstep, final=False):
        nonlocal status, message
        if not np.all(np.isfinite(x)):
            status, message = "failed", f"non-finite state at t={t:.17g}"
            return False
        if not in_domain(x, config.domain_tol):
            status, message = "domain_exit", f"state left the domain at t={t:.17g}"
            times.append(t)
            states.append(x.copy())
            return False
        if final or nstep % config.record_every == 0:
            times.append(t)
            states.append(x.copy())
        return True

    if config.method == "rk4":
        total = max(1, math.ceil(config.t_end / config.step - 1e-12))
        h = config.t_end / total
        nsteps = min(total, config.max_steps)
        if nsteps < total:
            status, message = "max_steps", "max_steps reached before t_end"
        x, t = x0.copy(), 0.0
        for k in range(1, nsteps + 1):
            k1 = rhs(t, x)
            k2 = rhs(t + h / 2, x + h / 2 * k1)
            k3 = rhs(t + h / 2, x + h / 2 * k2)
            k4 = rhs(t + h, x + h * k3)
            with np.errstate(over="ignore", invalid="ignore"):
                x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = k * h
            if not accept(t, x, k, final=(k == nsteps)):
                break
    else:
        solver = RK45(rhs, 0.0, x0.astype(float), config.t_end,
                      rtol=config.rel_tol, atol=config.abs_tol)
        k = 0
        while solver.status == "running":
            if k >= config.max_steps:
                status, message = "max_steps", "max_steps reached before t_end"
                if times[-1] != solver.t:
                    times.append(solver.t)
                    states.append(solver.y.copy())
                break
            with np.errstate(over="ignore", invalid="ignore"):
                err = solver.step()
            k += 1
            if solver.status == "failed":
                status, message = "failed", f"{err} (t={solver.t:.17g})"
                break
            if not accept(solver.t, solver.y, k, final=solver.status == "finished"):
                break
    if status != "completed":
        log.warning("integration of %s stopped: %s", field_name, message)
    states = np.array(states)
    traj = Trajectory(field_name, np.array(times), states, status=status, message=message)
    traj.observables = _observe(field_name, states, constant)
    traj.drift = {name: drift_stats(series) for name, series in traj.observables.items()
                  if name != "min_coord"}
    return traj


def conservation_drift(traj, constant):
    """Drift of ``constant`` along ``traj`` relative to its value at t=0."""
    chart = traj.chart
    vals = np.empty(len(traj.states))
    for k, s in enumerate(traj.states):
        try:
            vals[k] = constant.evaluate(s, chart)
        except DomainError as exc:
            raise DomainError(f"sample {k} (t={traj.times[k]:.17g}) is outside the "
                              f"{chart}-chart domain: {exc}") from None
    st = drift_stats(vals)
    return {"max_abs_drift": st["max_abs"], "max_rel_drift": st["max_rel"]}


# --- identity checks ---------------------------------------------------------

def random_chart_points(rng, m, count, bound=3.0):
    """``count`` points uniform in the box ``[-bound, bound]^m``."""
    return rng.uniform(-bound, bound, size=(count, m))


def check_identity_2_5(sys, u_samples):
    """Max entrywise gap between ``dphi B dphi^T`` and ``pi_A(phi(u))``."""
    A = _payoff(sys)
    B = B_of(A)
    worst = 0.0
    for u in np.atleast_2d(u_samples):
        if u.size == 0:
            continue
        J = dphi(u)
        worst = max(worst, float(np.abs(J @ B @ J.T - pi_A(A, phi(u))).max()))
    return worst


def check_pushforward_5_1(sys, x_samples):
    """Max gap between ``J_psi X_A`` and ``x_n Y_(A',r)(psi(x))`` for
    ``psi(x) = x_{1..n-1} / x_n``."""
    A = _payoff(sys)
    lv = replicator_to_lv(ReplicatorSystem(A))
    worst = 0.0
    for x in np.atleast_2d(x_samples):
        if x.size == 0:
            continue
        lhs = lv_coordinates_jacobian(x) @ replicator_field(A, x)
        rhs = x[-1] * lv_field(lv, to_lv_coordinates(x))
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def gradient_check(constant, u_samples, h=FD_STEP):
    """Central-difference check of ``grad_u``; error relative to
    ``max(1, |grad|)``."""
    worst = 0.0
    for u in np.atleast_2d(u_samples):
        if u.size == 0:
            continue
        grad = constant.grad_u(u)
        fd = np.empty_like(grad)
        for i in range(u.size):
            e = np.zeros_like(u)
            e[i] = h
            fd[i] = (constant.H_u(u + e) - constant.H_u(u - e)) / (2 * h)
        worst = max(worst, float(np.abs(fd - grad).max() / max(1.0, np.abs(grad).max())))
    return worst


def pointwise_orthogonality(B, q, constant, u_samples):
    """Max of ``|<Xtilde, grad H>| / ((1 + |Xtilde|)(1 + |grad H|))``."""
    worst = 0.0
    for u in np.atleast_2d(u_samples):
        if u.size == 0:
            continue
        X = xtilde_field(B, q, u)
        G = constant.grad_u(u)
        val = abs(float(X @ G)) / ((1 + np.linalg.norm(X)) * (1 + np.linalg.norm(G)))
        worst = max(worst, val)
    return worst
