"""Symmetric positive definite matrix primitives.

Everything downstream (EM decomposition, untangling, scoring) funnels its
matrix work through the handful of operations here: symmetrization with a
trace-scaled ridge, Cholesky-backed SPD solves, Mahalanobis forms, and the
block-structured inverse of the per-class joint covariance

    Sigma_r = I_m (x) S_eps + 1_m 1_m^T (x) S_mu

whose inverse has constant diagonal blocks F + G and off-diagonal blocks G
with F = S_eps^-1 and G = -(m S_mu + S_eps)^-1 S_mu S_eps^-1.  Exploiting
that structure keeps the per-class cost at O(d^3 + m d^2) instead of the
O(m^3 d^3) a dense inverse would need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .errors import DimensionError, NumericError, SingularMatrixError

__all__ = [
    "SymMatrix",
    "BlockInverseParts",
    "symmetrize_regularize",
    "spd_solve",
    "block_inverse_parts",
    "mahalanobis_sq",
]


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """A dense d x d symmetric matrix; symmetrization is enforced on construction."""

    values: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.values, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise DimensionError("matrix dimension must be at least 1")
        # (a[i,j] + a[j,i]) / 2 evaluates identically at (i,j) and (j,i),
        # so the result is exactly symmetric in floating point.
        sym = (a + a.T) / 2.0
        sym.flags.writeable = False
        object.__setattr__(self, "values", sym)

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class BlockInverseParts:
    """F and G blocks of the inverse of the m-sample joint covariance.

    The m*d x m*d matrix with diagonal blocks ``f + g`` and off-diagonal
    blocks ``g`` equals the inverse of the joint covariance with diagonal
    blocks S_mu + S_eps and off-diagonal blocks S_mu.
    """

    f: SymMatrix
    g: SymMatrix
    m: int

    def __post_init__(self):
        if self.f.dim != self.g.dim:
            raise DimensionError("f and g must have equal dimension")
        if self.m < 1:
            raise DimensionError("sample count m must be positive")

    @property
    def dim(self) -> int:
        return self.f.dim

    def assembled(self) -> np.ndarray:
        """Materialize the full m*d x m*d inverse (test oracle use only)."""
        d, m = self.dim, self.m
        out = np.tile(self.g.values, (m, m))
        for i in range(m):
            out[i * d : (i + 1) * d, i * d : (i + 1) * d] += self.f.values
        return out


def symmetrize_regularize(a: np.ndarray, ridge_scale: float) -> SymMatrix:
    """Symmetrize ``a`` and add a trace-scaled ridge to the diagonal.

    Returns (a + a^T)/2 + ridge * I with ridge = ridge_scale * trace/d,
    where the trace is taken after symmetrization.
    """
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError("matrix contains non-finite entries")
    if ridge_scale < 0:
        raise NumericError("ridge_scale must be nonnegative")
    sym = (arr + arr.T) / 2.0
    d = sym.shape[0]
    ridge = ridge_scale * np.trace(sym) / d
    if ridge != 0.0:
        sym = sym + ridge * np.eye(d)
    return SymMatrix(sym)


def _cholesky_lower(a: np.ndarray, what: str = "matrix") -> np.ndarray:
    """Lower Cholesky factor of ``a``; raises naming the failing pivot."""
    c, info = lapack.dpotrf(a, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        raise SingularMatrixError(
            f"{what} is not positive definite (leading minor {info} failed)",
            pivot=int(info),
        )
    if info < 0:
        raise NumericError(f"illegal value in argument {-info} of the factorization")
    return c


def spd_solve(a: SymMatrix, b: np.ndarray) -> np.ndarray:
    """Solve a x = b for SPD ``a`` via Cholesky factorization.

    ``b`` may be a vector of length d or a d x k matrix; the result has
    matching shape.
    """
    rhs = np.asarray(b, dtype=np.float64)
    vec = rhs.ndim == 1
    if vec:
        rhs = rhs[:, None]
    if rhs.ndim != 2 or rhs.shape[0] != a.dim:
        raise DimensionError(
            f"right-hand side has {rhs.shape[0] if rhs.ndim else 0} rows, expected {a.dim}"
        )
    c = _cholesky_lower(a.values)
    x, info = lapack.dpotrs(c, rhs, lower=1)
    if info != 0:
        raise NumericError(f"triangular solve failed with status {info}")
    return x[:, 0] if vec else x


def block_inverse_parts(s_mu: SymMatrix, s_eps: SymMatrix, m: int) -> BlockInverseParts:
    """Compute F = S_eps^-1 and G = -(m S_mu + S_eps)^-1 S_mu S_eps^-1.

    ``s_eps`` and m*s_mu + s_eps must be SPD; ``s_mu`` itself only needs to
    be symmetric (a zero identity covariance is legal and yields G = 0).
    """
    if s_mu.dim != s_eps.dim:
        raise DimensionError(
            f"covariance dimensions disagree: {s_mu.dim} vs {s_eps.dim}"
        )
    if m < 1:
        raise DimensionError("class sample count m must be positive")
    d = s_eps.dim
    c_eps = _cholesky_lower(s_eps.values, "variation covariance")
    f, info = lapack.dpotrs(c_eps, np.eye(d), lower=1)
    if info != 0:
        raise NumericError(f"triangular solve failed with status {info}")
    coupled = m * s_mu.values + s_eps.values
    c_coupled = _cholesky_lower(coupled, "m*S_mu + S_eps")
    g, info = lapack.dpotrs(c_coupled, s_mu.values @ f, lower=1)
    if info != 0:
        raise NumericError(f"triangular solve failed with status {info}")
    return BlockInverseParts(f=SymMatrix(f), g=SymMatrix(-g), m=m)


def mahalanobis_sq(x: np.ndarray, mu: np.ndarray, s: SymMatrix) -> float:
    """Squared Mahalanobis distance (x - mu)^T s^-1 (x - mu).

    Computed as the squared norm of a triangular solve against the Cholesky
    factor, so the result is nonnegative by construction.
    """
    xv = np.asarray(x, dtype=np.float64)
    mv = np.asarray(mu, dtype=np.float64)
    if xv.shape != (s.dim,) or mv.shape != (s.dim,):
        raise DimensionError(
            f"vectors must have shape ({s.dim},), got {xv.shape} and {mv.shape}"
        )
    diff = xv - mv
    c = _cholesky_lower(s.values)
    z = solve_triangular(c, diff, lower=True)
    return float(z @ z)
