"""Two-component decomposition of representations: identity plus variation.

Each representation r of class t is modeled as r = mu_t + eps with
mu_t ~ N(0, S_mu) shared by the class and eps ~ N(0, S_eps) drawn per
sample from a distribution common to all classes.  ``fit_em`` estimates
(S_mu, S_eps) on clean data by alternating posterior identity estimates
(E-step) with covariance updates (M-step); ``posterior_identity``
decomposes one class given fitted covariances.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass

import numpy as np

from .data import LabeledMatrix
from .errors import DataError, DegenerateDataError, DimensionError, TooFewClassesError
from .linalg import SymMatrix, block_inverse_parts

__all__ = [
    "GlobalStats",
    "ClassDecomposition",
    "center",
    "posterior_identity",
    "fit_em",
]

# An M-step variation covariance below this trace carries no signal at all;
# only exact collapse (all residuals identical) gets anywhere near it.
_COLLAPSE_TRACE = 1e-300


@dataclass(frozen=True, eq=False)
class GlobalStats:
    """Fitted covariance pair plus the global centering vector."""

    d: int
    s_mu: SymMatrix
    s_eps: SymMatrix
    center: np.ndarray
    em_iters_used: int
    converged: bool

    def fingerprint(self) -> str:
        """Hex digest of the covariance bytes, echoed into scan reports."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.s_mu.values).tobytes())
        h.update(np.ascontiguousarray(self.s_eps.values).tobytes())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class ClassDecomposition:
    """Posterior identity of one class and the per-sample variations.

    mu + eps[j] reconstructs the j-th (centered) representation exactly,
    because eps is defined as the residual against mu.
    """

    class_label: int
    mu: np.ndarray
    eps: np.ndarray
    m: int


def center(data: LabeledMatrix) -> tuple[LabeledMatrix, np.ndarray]:
    """Subtract the global mean from every row; returns (centered, mean)."""
    if data.n < 1:
        raise DataError("cannot center an empty matrix")
    mean = data.rows.mean(axis=0)
    shifted = LabeledMatrix(data.rows - mean, data.labels, data.class_count)
    return shifted, mean


def posterior_identity(
    class_rows: np.ndarray,
    s_mu: SymMatrix,
    s_eps: SymMatrix,
    class_label: int = -1,
) -> ClassDecomposition:
    """Decompose one class's rows into a shared identity and residuals.

    The identity is the posterior mean of mu given the m rows,
    mu = S_mu (F + m G) sum_i r_i, using the block-inverse parts; the
    variations are eps_j = r_j - mu.
    """
    rows = np.asarray(class_rows, dtype=np.float64)
    if rows.ndim != 2:
        raise DimensionError(f"class rows must be 2-d, got shape {rows.shape}")
    m, d = rows.shape
    if m < 1:
        raise DataError("a class needs at least one sample")
    if d != s_mu.dim or d != s_eps.dim:
        raise DimensionError(
            f"row dimension {d} does not match covariances ({s_mu.dim}, {s_eps.dim})"
        )
    parts = block_inverse_parts(s_mu, s_eps, m)
    weight = s_mu.values @ (parts.f.values + m * parts.g.values)
    mu = weight @ rows.sum(axis=0)
    eps = rows - mu
    return ClassDecomposition(class_label=class_label, mu=mu, eps=eps, m=m)


def _sample_cov(vectors: np.ndarray) -> np.ndarray:
    """Mean-subtracted covariance with denominator count-1 (count if 1)."""
    count = vectors.shape[0]
    centered = vectors - vectors.mean(axis=0)
    denom = count - 1 if count > 1 else count
    return (centered.T @ centered) / denom


def _regularize_pair(
    raw_mu: np.ndarray, raw_eps: np.ndarray, ridge_scale: float
) -> tuple[SymMatrix, SymMatrix]:
    # The ridge is scaled by the combined trace: a per-matrix trace ridge
    # would leave a collapsed S_eps exactly singular even when S_mu still
    # sets a healthy scale (zero within-class spread).
    sym_mu = (raw_mu + raw_mu.T) / 2.0
    sym_eps = (raw_eps + raw_eps.T) / 2.0
    d = sym_mu.shape[0]
    ridge = ridge_scale * (np.trace(sym_mu) + np.trace(sym_eps)) / d
    eye = np.eye(d)
    return SymMatrix(sym_mu + ridge * eye), SymMatrix(sym_eps + ridge * eye)


def fit_em(
    clean: LabeledMatrix,
    max_iters: int = 50,
    tol: float = 1e-5,
    ridge_scale: float = 1e-6,
) -> GlobalStats:
    """Fit (S_mu, S_eps) on clean data by expectation maximization.

    The data is globally centered first (the latent components are
    zero-mean by assumption).  Initialization uses the between-class
    covariance of class means for S_mu and the pooled within-class
    covariance for S_eps, which the EM then refines.  Convergence is
    declared when the relative Frobenius change of the stacked pair drops
    below ``tol``; non-convergence is reported in the metadata, never
    raised.

    Args:
        clean: labeled representations, at least 2 distinct classes.
        max_iters: EM iteration cap.
        tol: relative-change stopping tolerance (0 forces all iterations).
        ridge_scale: diagonal loading applied to every estimated covariance.

    Returns:
        GlobalStats with the fitted pair, the centering vector, and
        convergence metadata.  Deterministic given inputs.
    """
    labels = clean.observed_labels()
    if labels.size < 2:
        raise TooFewClassesError(
            f"EM needs at least 2 classes, got {labels.size}"
        )
    if clean.n < clean.d + 2:
        warnings.warn(
            f"only {clean.n} samples for dimension {clean.d}; "
            "covariance estimates will be unstable",
            stacklevel=2,
        )

    centered, mean = center(clean)
    by_class = [centered.class_rows(int(t)) for t in labels]
    d = centered.d
    n = centered.n

    # Coarse start: between-class and pooled within-class covariances.
    class_means = np.stack([rows.mean(axis=0) for rows in by_class])
    raw_mu = _sample_cov(class_means)
    pooled = np.vstack([rows - rows.mean(axis=0) for rows in by_class])
    within_denom = max(n - labels.size, 1)
    raw_eps = (pooled.T @ pooled) / within_denom
    s_mu, s_eps = _regularize_pair(raw_mu, raw_eps, ridge_scale)

    iters_used = 0
    converged = False
    for _ in range(max_iters):
        if np.trace(s_eps.values) < _COLLAPSE_TRACE:
            raise DegenerateDataError(
                "variation covariance collapsed; the data carries no spread"
            )
        identities = np.empty((labels.size, d))
        residuals = np.empty((n, d))
        pos = 0
        for idx, rows in enumerate(by_class):
            dec = posterior_identity(rows, s_mu, s_eps, class_label=int(labels[idx]))
            identities[idx] = dec.mu
            residuals[pos : pos + dec.m] = dec.eps
            pos += dec.m

        raw_mu = _sample_cov(identities)
        raw_eps = _sample_cov(residuals)
        if np.trace(raw_eps) < _COLLAPSE_TRACE:
            raise DegenerateDataError(
                "variation covariance collapsed in the M-step"
            )
        new_mu, new_eps = _regularize_pair(raw_mu, raw_eps, ridge_scale)
        iters_used += 1

        prev = np.concatenate([s_mu.values.ravel(), s_eps.values.ravel()])
        cur = np.concatenate([new_mu.values.ravel(), new_eps.values.ravel()])
        denom = np.linalg.norm(prev)
        change = np.linalg.norm(cur - prev) / denom if denom > 0 else 0.0
        s_mu, s_eps = new_mu, new_eps
        if change < tol:
            converged = True
            break

    return GlobalStats(
        d=d,
        s_mu=s_mu,
        s_eps=s_eps,
        center=mean,
        em_iters_used=iters_used,
        converged=converged,
    )
