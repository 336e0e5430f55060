"""Input validation helpers shared by every module."""

import numpy as np
from sklearn.utils import check_array

from .exceptions import DomainError, InputError

SIMPLEX_ATOL = 1e-12


def as_matrix(M, name="matrix", square=False):
    """Return ``M`` as a finite 2-D float64 array.

    Zero-sized dimensions are allowed (a 0x0 matrix shows up for ``n = 1``
    faces and for empty constraint blocks).
    """
    try:
        arr = np.asarray(M, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} is not numeric: {exc}") from None
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size:
        try:
            arr = check_array(arr, dtype=np.float64, ensure_all_finite=True,
                              ensure_min_samples=1, ensure_min_features=1)
        except ValueError as exc:
            raise InputError(f"{name}: {exc}") from None
    if square and arr.shape[0] != arr.shape[1]:
        raise InputError(f"{name} must be square, got shape {arr.shape}")
    return arr


def as_vector(v, name="vector", size=None):
    try:
        arr = np.asarray(v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} is not numeric: {exc}") from None
    if arr.ndim != 1:
        raise InputError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    if size is not None and arr.shape[0] != size:
        raise InputError(f"{name} must have length {size}, got {arr.shape[0]}")
    return arr


def check_simplex_point(x, n=None, name="x", atol=SIMPLEX_ATOL):
    """Validate a point of the closed simplex."""
    x = as_vector(x, name, n)
    if np.any(x < 0):
        raise DomainError(f"{name} has negative entries")
    if abs(x.sum() - 1.0) > atol:
        raise DomainError(f"{name} does not sum to 1 (sum={x.sum():.17g})")
    return x


def check_affine_simplex_point(q, n=None, name="q", atol=1e-10):
    """Validate a point of the affine hull of the simplex (any signs)."""
    q = as_vector(q, name, n)
    if abs(q.sum() - 1.0) > atol:
        raise DomainError(f"{name} does not sum to 1 (sum={q.sum():.17g})")
    return q


def check_interior(x, n=None, name="x"):
    x = check_simplex_point(x, n, name)
    if np.any(x <= 0):
        raise DomainError(f"{name} is not in the simplex interior")
    return x


def check_positive(y, n=None, name="y"):
    y = as_vector(y, name, n)
    if np.any(y <= 0):
        raise DomainError(f"{name} must be strictly positive")
    return y
