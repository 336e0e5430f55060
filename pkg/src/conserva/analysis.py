"""End-to-end analysis of one system: equilibrium, certificate search,
representative constant of motion, classification and pointwise checks."""

import logging
from dataclasses import dataclass, field

import numpy as np

from .conservation import (CERTIFICATE_TOL, certificate_search_general,
                           certificate_search_reduced, representative_certificate)
from .dirac import classify, verify_hamiltonian_pair
from .dynamics import (check_identity_2_5, check_pushforward_5_1, gradient_check,
                       pointwise_orthogonality, random_chart_points)
from .equilibrium import (EquilibriumResult, formal_equilibrium_lv,
                          formal_equilibrium_replicator, normalize_lv_equilibrium)
from .exceptions import ConservaError, DegenerateNormalizationError, InputError
from .linalg import DEFAULT_RANK_TOL, subspace_residual
from .systems import (B_of, LotkaVolterraSystem, ReplicatorSystem, lv_to_replicator,
                      normalize_payoff, phi)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
METHODS = ("general", "reduced", "both")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_EQUILIBRIUM = 2
EXIT_EMPTY_FAMILY = 3
EXIT_RUNTIME = 4


@dataclass
class Analysis:
    system: object
    replicator: ReplicatorSystem
    method: str
    rank_tol: float
    equilibrium: EquilibriumResult = None
    lv_equilibrium: EquilibriumResult = None
    q: np.ndarray = None
    B: np.ndarray = None
    families: dict = field(default_factory=dict)
    search_errors: dict = field(default_factory=dict)
    certificate: object = None
    classification: object = None
    message: str = ""

    @property
    def kind(self):
        return "lotka_volterra" if isinstance(self.system, LotkaVolterraSystem) else "replicator"

    @property
    def chart(self):
        return "y" if self.kind == "lotka_volterra" else "x"

    @property
    def family(self):
        """The authoritative family (general when it was run)."""
        return self.families.get("general") or self.families.get("reduced")

    @property
    def constant(self):
        if self.certificate is None:
            return None
        return self.certificate.constant(self.chart)

    @property
    def exit_code(self):
        if self.q is None:
            return EXIT_NO_EQUILIBRIUM
        if self.certificate is None:
            return EXIT_EMPTY_FAMILY
        return EXIT_OK


def _hint_equilibrium(A, hint):
    q = np.asarray(hint, dtype=float)
    if q.shape != (A.shape[0],):
        raise InputError(f"equilibrium hint must have length {A.shape[0]}")
    Aq = A @ q
    resid = max(float(np.abs(Aq - Aq[-1]).max()), abs(q.sum() - 1.0))
    return resid <= 1e-9 * max(1.0, float(np.abs(A).max()) * float(np.abs(q).max())), resid


def analyze(system, method="general", rank_tol=DEFAULT_RANK_TOL, equilibrium=None):
    """Run the certificate pipeline on a replicator or Lotka-Volterra system.

    ``equilibrium`` is an optional hint: a replicator formal equilibrium
    ``q`` (or ``q'`` for Lotka-Volterra input). It is used when it
    satisfies the defining equations and ignored with a warning otherwise.
    """
    if method not in METHODS:
        raise InputError(f"method must be one of {METHODS}")
    if isinstance(system, LotkaVolterraSystem):
        rep = lv_to_replicator(system)
    elif isinstance(system, ReplicatorSystem):
        rep = normalize_payoff(system)
    else:
        system = ReplicatorSystem(system)
        rep = normalize_payoff(system)
    out = Analysis(system, rep, method, rank_tol)
    if rep.n < 2:
        raise InputError("need at least two strategies (one species)")

    if isinstance(system, LotkaVolterraSystem):
        eq = formal_equilibrium_lv(system, rank_tol)
        if equilibrium is not None:
            qp = np.asarray(equilibrium, dtype=float)
            resid = float(np.abs(system.interaction @ qp + system.growth).max())
            if qp.shape == (system.m,) and resid <= 1e-9 * max(1.0, np.abs(system.interaction).max()):
                eq = EquilibriumResult(qp, resid, eq.degrees_of_freedom, eq.basis, True)
            else:
                log.warning("equilibrium hint rejected (residual %.3e)", resid)
        out.lv_equilibrium = eq
        if eq.feasible:
            try:
                q = normalize_lv_equilibrium(eq.representative)
            except DegenerateNormalizationError as exc:
                out.message = str(exc)
                return out
            Aq = rep.payoff @ q
            out.equilibrium = EquilibriumResult(q, float(np.abs(Aq).max()),
                                                eq.degrees_of_freedom, eq.basis, True)
    else:
        eq = formal_equilibrium_replicator(rep, rank_tol)
        if equilibrium is not None:
            ok, resid = _hint_equilibrium(rep.payoff, equilibrium)
            if ok:
                eq = EquilibriumResult(np.asarray(equilibrium, dtype=float), resid,
                                       eq.degrees_of_freedom, eq.basis, True)
            else:
                log.warning("equilibrium hint rejected (residual %.3e)", resid)
        out.equilibrium = eq

    if out.equilibrium is None or not out.equilibrium.feasible:
        out.message = "no formal equilibrium"
        return out
    q = out.q = out.equilibrium.representative
    B = out.B = B_of(rep)

    if method in ("general", "both"):
        out.families["general"] = certificate_search_general(B, q, rank_tol)
    if method in ("reduced", "both"):
        try:
            out.families["reduced"] = certificate_search_reduced(rep.payoff[:-1, :-1], q, rank_tol)
        except ConservaError as exc:
            out.search_errors["reduced"] = str(exc)
            log.warning("reduced search skipped: %s", exc)
    fam = out.family
    if fam is None or fam.dimension == 0:
        out.message = "no certificate found by this method"
        return out
    out.certificate = representative_certificate(fam, q, B)
    out.classification = classify(B, out.certificate.D, rank_tol)
    return out


def verification(analysis, samples=20, seed=0):
    """Pointwise residuals of every identity the analysis relies on.

    Returns an empty dict for ``samples == 0``. Entries that need a
    certificate are ``None`` when none was found.
    """
    if samples <= 0:
        return {}
    rng = np.random.default_rng(seed)
    m = analysis.replicator.n - 1
    U = random_chart_points(rng, m, samples)
    X = np.array([phi(u) for u in U])
    out = {
        "samples": int(samples),
        "seed": int(seed),
        "identity_2_5_max": check_identity_2_5(analysis.replicator, U),
        "pushforward_5_1_max": check_pushforward_5_1(analysis.replicator, X),
        "pointwise_orthogonality_max": None,
        "gradient_check_max": None,
        "hamiltonian_pair": None,
        "search_equivalence": None,
    }
    cert = analysis.certificate
    if cert is not None:
        com = cert.constant("u")
        out["pointwise_orthogonality_max"] = pointwise_orthogonality(analysis.B, analysis.q, com, U)
        out["gradient_check_max"] = gradient_check(com, U)
        out["hamiltonian_pair"] = verify_hamiltonian_pair(analysis.B, cert.D, analysis.q, U)
    fams = analysis.families
    if "general" in fams and "reduced" in fams:
        g, r = fams["general"], fams["reduced"]
        out["search_equivalence"] = {
            "general_dimension": g.dimension,
            "reduced_dimension": r.dimension,
            "residual": subspace_residual(g.flat_basis, r.flat_basis)
            if g.dimension and r.dimension else (0.0 if g.dimension == r.dimension else 1.0),
        }
    return out


def report(analysis, system_echo, samples=20, seed=0):
    """JSON-ready analysis report (``schema_version`` 1)."""
    fams = analysis.families
    cert = analysis.certificate
    com = analysis.constant
    certs = {
        "general": fams["general"].to_dict() if "general" in fams else None,
        "reduced": fams["reduced"].to_dict() if "reduced" in fams else None,
        "errors": dict(analysis.search_errors),
        "dimension": analysis.family.dimension if analysis.family is not None else 0,
        "representative": cert.to_dict() if cert is not None else None,
    }
    eq = analysis.equilibrium
    return {
        "schema_version": SCHEMA_VERSION,
        "system": system_echo,
        "settings": {"method": analysis.method, "rank_tol": analysis.rank_tol,
                     "certificate_tol": CERTIFICATE_TOL, "samples": int(samples),
                     "seed": int(seed)},
        "formal_equilibrium": {
            "replicator": eq.to_dict() if eq is not None else None,
            "lotka_volterra": analysis.lv_equilibrium.to_dict()
            if analysis.lv_equilibrium is not None else None,
        },
        "u_chart_matrix": analysis.B.tolist() if analysis.B is not None else None,
        "certificates": certs,
        "constant_of_motion": com.to_dict() if com is not None else None,
        "classification": analysis.classification.to_dict()
        if analysis.classification is not None else None,
        "verification": verification(analysis, samples, seed) if analysis.q is not None else {},
        "status": {"exit_code": analysis.exit_code, "message": analysis.message},
    }
