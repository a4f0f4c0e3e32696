"""Dense SPD linear algebra and numerically stable scalar maps.

Every matrix this package factorizes is small (posterior Hessians with at
most a few dozen coefficients, GP Gram matrices with at most a few dozen
design points), so all routines are dense. Near-singular matrices get an
escalating diagonal jitter before the factorization is declared failed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import DimensionMismatchError, NotPositiveDefiniteError

# Jitter escalation: start at 1e-10 * trace/dim, double up to 1e-6 * trace/dim.
_JITTER_START = 1e-10
_JITTER_CAP = 1e-6
_SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor L with L @ L.T equal to the source matrix."""

    lower: np.ndarray

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def logdet(self) -> float:
        """Log-determinant of the factored matrix."""
        return 2.0 * float(np.sum(np.log(np.diag(self.lower))))


def cholesky(m: np.ndarray) -> CholeskyFactor:
    """Factor a symmetric positive-definite matrix as L @ L.T.

    The input must be symmetric to within 1e-12 relative tolerance. On
    pivot failure a diagonal jitter proportional to trace/dim is added and
    doubled until 1e-6 * trace/dim; past that the matrix is treated as not
    positive definite.

    Raises
    ------
    NotPositiveDefiniteError
        If no jittered factorization succeeds.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    scale = np.max(np.abs(m))
    if scale > 0 and np.max(np.abs(m - m.T)) > _SYMMETRY_RTOL * scale:
        raise NotPositiveDefiniteError("matrix is not symmetric")

    try:
        return CholeskyFactor(np.linalg.cholesky(m))
    except np.linalg.LinAlgError:
        pass

    tau = float(np.trace(m)) / m.shape[0]
    if tau <= 0:
        # Nonpositive trace cannot come from an SPD matrix.
        raise NotPositiveDefiniteError("matrix has nonpositive trace")
    jitter = _JITTER_START * tau
    eye = np.eye(m.shape[0])
    while jitter <= _JITTER_CAP * tau:
        try:
            return CholeskyFactor(np.linalg.cholesky(m + jitter * eye))
        except np.linalg.LinAlgError:
            jitter *= 2.0
    raise NotPositiveDefiniteError(
        f"pivot failure persisted up to jitter {_JITTER_CAP:.0e} * trace/dim"
    )


def solve_spd(factor: CholeskyFactor, b: np.ndarray) -> np.ndarray:
    """Solve (L @ L.T) x = b given the Cholesky factor L.

    Accepts a vector or a matrix of right-hand sides.
    """
    b = np.asarray(b, dtype=float)
    if b.shape[0] != factor.dim:
        raise DimensionMismatchError(
            f"right-hand side has length {b.shape[0]}, factor has dim {factor.dim}"
        )
    y = solve_triangular(factor.lower, b, lower=True)
    return solve_triangular(factor.lower.T, y, lower=False)


def spd_inverse(m: np.ndarray) -> np.ndarray:
    """Inverse of an SPD matrix via its Cholesky factor."""
    f = cholesky(m)
    return solve_spd(f, np.eye(f.dim))


def stable_sigmoid(z):
    """Logistic function 1 / (1 + exp(-z)) without overflow.

    Both tails are computed from exp(-|z|), so sigmoid(z) + sigmoid(-z)
    sums to exactly 1.0 in floating point and the small tail keeps full
    relative precision.
    """
    z = np.asarray(z, dtype=float)
    a = np.exp(-np.abs(z))
    small = a / (1.0 + a)
    out = np.where(z >= 0.0, 1.0 - small, small)
    return out if out.ndim else float(out)


def log1pexp(z):
    """log(1 + exp(z)) evaluated branch-wise to avoid overflow and underflow.

    Uses exp(z) below -37, log1p(exp(z)) in the central range, z + exp(-z)
    up to 33.3, and plain z beyond, giving full double precision throughout.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    lo = z <= -37.0
    mid = (z > -37.0) & (z <= 18.0)
    hi = (z > 18.0) & (z <= 33.3)
    top = z > 33.3
    out[lo] = np.exp(z[lo])
    out[mid] = np.log1p(np.exp(z[mid]))
    out[hi] = z[hi] + np.exp(-z[hi])
    out[top] = z[top]
    return out if out.ndim else float(out)
