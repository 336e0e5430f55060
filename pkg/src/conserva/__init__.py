"""Constants of motion for replicator and Lotka-Volterra systems."""

from .analysis import Analysis, analyze
from .conservation import (CertificateFamily, ConservationCertificate, ConstantOfMotion,
                           build_Q1, build_Q2, build_Qbar1, certificate_from_gauge,
                           certificate_matrix, certificate_search_general,
                           certificate_search_reduced, classical_integral, eval_H,
                           gauge_skew_symmetrizer, grad_H_u, make_certificate,
                           representative_certificate)
from .dirac import StructureClassification, classify, verify_hamiltonian_pair
from .dynamics import (IntegratorConfig, Trajectory, check_identity_2_5,
                       check_pushforward_5_1, conservation_drift, gradient_check,
                       integrate, pointwise_orthogonality)
from .equilibrium import (EquilibriumResult, formal_equilibrium_lv,
                          formal_equilibrium_replicator, normalize_lv_equilibrium)
from .estimator import ConservationDetector
from .exceptions import (ConservaError, DegenerateNormalizationError, DomainError,
                         InputError, InvalidCertificateError, UnsupportedEquilibriumError)
from .linalg import NullspaceResult, nullspace_basis, offdiag_residual, skew_residual
from .systems import (B_of, LotkaVolterraSystem, ReplicatorSystem, build_E, dphi, eta_q,
                      lv_field, lv_to_replicator, normalize_payoff, phi, phi_inv, pi_A,
                      projective_transform, replicator_field, replicator_to_lv,
                      restrict_to_face, xtilde_field, ybold_field)

__version__ = "0.1.0"
