"""scikit-learn style wrapper around :func:`conserva.analysis.analyze`.

``fit`` takes a system (payoff matrix, :class:`ReplicatorSystem` or
:class:`LotkaVolterraSystem`) and searches for a certificate; ``transform``
maps a batch of states to the values of the detected constant of motion, so
a column that stays flat along a trajectory is the test of conservation.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from ._validation import as_matrix
from .analysis import analyze
from .exceptions import InputError
from .linalg import DEFAULT_RANK_TOL
from .systems import LotkaVolterraSystem, ReplicatorSystem


class ConservationDetector(TransformerMixin, BaseEstimator):
    """Detect a constant of motion ``H`` and evaluate it on states.

    Parameters
    ----------
    method : {"general", "reduced", "both"}
        Certificate search path. With ``"both"`` the general family is used.
    rank_tol : float
        Relative singular-value threshold for every nullspace computation.
    equilibrium : array_like, optional
        Formal equilibrium hint (``q`` for replicator, ``q'`` for LV input).
    chart : {"x", "y", "u"}, optional
        Coordinates of the rows passed to ``transform``. Defaults to ``"x"``
        for replicator input and ``"y"`` for Lotka-Volterra input.

    Attributes
    ----------
    analysis_ : Analysis
    equilibrium_ : ndarray
        Replicator formal equilibrium used by the search.
    B_ : ndarray
        Constant matrix of the u-chart field.
    family_ : CertificateFamily
    certificate_ : ConservationCertificate
    constant_ : ConstantOfMotion
    classification_ : StructureClassification
    n_features_in_ : int
    """

    def __init__(self, method="general", rank_tol=DEFAULT_RANK_TOL, equilibrium=None,
                 chart=None):
        self.method = method
        self.rank_tol = rank_tol
        self.equilibrium = equilibrium
        self.chart = chart

    def fit(self, X, y=None):
        if not isinstance(X, (ReplicatorSystem, LotkaVolterraSystem)):
            X = ReplicatorSystem(as_matrix(X, "payoff", square=True))
        res = analyze(X, self.method, self.rank_tol, self.equilibrium)
        self.analysis_ = res
        self.equilibrium_ = res.q
        self.B_ = res.B
        self.family_ = res.family
        self.certificate_ = res.certificate
        self.classification_ = res.classification
        chart = self.chart or res.chart
        if chart not in ("x", "y", "u"):
            raise InputError(f"chart must be 'x', 'y' or 'u', got {chart!r}")
        self.chart_ = chart
        self.constant_ = None if res.certificate is None else res.certificate.constant(chart)
        n = res.replicator.n
        self.n_features_in_ = n if chart == "x" else n - 1
        return self

    def _constant(self):
        check_is_fitted(self, "analysis_")
        if self.constant_ is None:
            raise NotFittedError("no certificate was found for the fitted system "
                                 f"({self.analysis_.message})")
        return self.constant_

    def transform(self, X):
        """Values of ``H`` on each row, shape ``(n_samples, 1)``."""
        com = self._constant()
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise InputError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        return np.array([[com.evaluate(row, self.chart_)] for row in X])

    def score(self, X, y=None):
        """Negative largest deviation of ``H`` from its value on the first
        row. Zero for an exactly conserved quantity."""
        h = self.transform(X)[:, 0]
        return -float(np.abs(h - h[0]).max())

    def get_feature_names_out(self, input_features=None):
        return np.array(["H"], dtype=object)
