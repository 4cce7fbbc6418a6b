"""Two-subgroup untangling of one class by iterated linear discriminants.

A contaminated class holds two populations sharing the global variation
covariance but centered on different identities.  With subgroup labels
unknown, the fit alternates: take subgroup means, build the Fisher
discriminant hyperplane against the fixed variation covariance, relabel
every row by which side of the hyperplane it falls on, and repeat until
the labeling reaches a fixed point.

The alternation only finds a local optimum, and with skewed subgroup
fractions a single balanced starting split reliably lands in the wrong
basin.  ``untangle_class`` therefore restarts from several deterministic
candidate splits along the top principal direction of the whitened rows
and keeps the fixed point with the largest between-subgroup gain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DataError, DimensionError, TooFewSamplesError
from .linalg import SymMatrix, _cholesky_lower, spd_solve

__all__ = [
    "UntangleResult",
    "lda_direction",
    "subgroup_means",
    "untangle_class",
]

# Rows scoring within this band of the hyperplane count as ties, label 1.
_TIE_TOL = 1e-12

# Restart quantiles for the candidate splits (plus the best 1-d two-means
# cut); skewed mixtures need starts far from the median.
_SPLIT_QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)


@dataclass(frozen=True, eq=False)
class UntangleResult:
    """Fitted two-subgroup split of one class.

    ``labels`` holds 1 or 2 per row; at a converged fixed point label 1
    marks the rows on the mu1 side of the hyperplane (v, t).  ``degenerate``
    means one subgroup emptied, i.e. no two-group structure was found.
    """

    mu1: np.ndarray
    mu2: np.ndarray
    labels: np.ndarray
    v: np.ndarray
    t: float
    iters: int
    converged: bool
    degenerate: bool


def lda_direction(
    mu1: np.ndarray, mu2: np.ndarray, s_eps: SymMatrix
) -> tuple[np.ndarray, float]:
    """Fisher discriminant hyperplane for two groups sharing ``s_eps``.

    Returns v = S_eps^-1 (mu1 - mu2) and the midpoint threshold
    t = (mu1^T S_eps^-1 mu1 - mu2^T S_eps^-1 mu2) / 2.  Swapping the two
    means negates both outputs.
    """
    m1 = np.asarray(mu1, dtype=np.float64)
    m2 = np.asarray(mu2, dtype=np.float64)
    if m1.shape != (s_eps.dim,) or m2.shape != (s_eps.dim,):
        raise DimensionError(
            f"means must have shape ({s_eps.dim},), got {m1.shape} and {m2.shape}"
        )
    a1 = spd_solve(s_eps, m1)
    a2 = spd_solve(s_eps, m2)
    v = a1 - a2
    t = 0.5 * (float(m1 @ a1) - float(m2 @ a2))
    return v, t


def subgroup_means(
    class_rows: np.ndarray, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Arithmetic means of the label-1 and label-2 subgroups."""
    rows = np.asarray(class_rows, dtype=np.float64)
    lab = np.asarray(labels)
    one = rows[lab == 1]
    two = rows[lab == 2]
    if one.shape[0] == 0 or two.shape[0] == 0:
        raise DataError("both subgroups must be non-empty")
    return one.mean(axis=0), two.mean(axis=0)


def _whitened(rows: np.ndarray, s_eps: SymMatrix) -> np.ndarray:
    chol = _cholesky_lower(s_eps.values, "variation covariance")
    centered = rows - rows.mean(axis=0)
    return solve_triangular(chol, centered.T, lower=True).T


def _candidate_inits(white: np.ndarray) -> list[np.ndarray]:
    """Deterministic starting labelings along the top whitened direction.

    One candidate per distinct split index: the best single-direction
    two-means cut plus fixed quantile cuts.  Empty when every projection
    is identical (no split exists).
    """
    m = white.shape[0]
    cov = (white.T @ white) / max(m - 1, 1)
    top = np.linalg.eigh(cov)[1][:, -1]
    proj = white @ top
    order = np.argsort(proj, kind="stable")
    sorted_proj = proj[order]
    if sorted_proj[0] == sorted_proj[-1]:
        return []

    prefix = np.cumsum(sorted_proj)
    counts = np.arange(1, m)
    left_mean = prefix[:-1] / counts
    right_mean = (prefix[-1] - prefix[:-1]) / (m - counts)
    gain = counts * (m - counts) / m * (left_mean - right_mean) ** 2
    best_k = int(np.argmax(gain)) + 1

    candidates = []
    seen: set[int] = set()
    for k in [best_k] + [
        min(m - 1, max(1, int(round(q * m)))) for q in _SPLIT_QUANTILES
    ]:
        if k in seen:
            continue
        seen.add(k)
        labels = np.full(m, 2, dtype=np.int64)
        labels[order[:k]] = 1
        candidates.append(labels)
    return candidates


def _between_gain(white: np.ndarray, labels: np.ndarray) -> float:
    """Within-sum-of-squares reduction of a split, in whitened coordinates."""
    one = white[labels == 1]
    two = white[labels == 2]
    n1, n2 = one.shape[0], two.shape[0]
    diff = one.mean(axis=0) - two.mean(axis=0)
    return n1 * n2 / (n1 + n2) * float(diff @ diff)


def _iterate(
    rows: np.ndarray,
    s_eps: SymMatrix,
    labels: np.ndarray,
    max_iters: int,
) -> UntangleResult:
    """Run the mean/hyperplane/relabel alternation from one labeling.

    The relabel rule assigns label 1 to rows on the mu1 side.  The raw
    threshold comparison against t would hand each row to the subgroup
    whose mean is farther away, making every pass swap the two labels and
    the alternation cycle with period 2 instead of reaching a fixed point;
    orienting the hyperplane as (v, t) = lda_direction(mu2, mu1) keeps
    subgroup names stable without changing the partition.
    """
    d = rows.shape[1]
    seen = {labels.tobytes()}
    mu1 = mu2 = rows.mean(axis=0)
    v = np.zeros(d)
    t = 0.0
    iters = 0
    converged = False
    degenerate = False
    for it in range(1, max_iters + 1):
        iters = it
        mu1, mu2 = subgroup_means(rows, labels)
        v, t = lda_direction(mu2, mu1, s_eps)
        score = rows @ v - t
        new_labels = np.where(score <= _TIE_TOL, 1, 2).astype(np.int64)
        if new_labels.min() == new_labels.max():
            # Keep the last assignment in which both subgroups were present.
            degenerate = True
            break
        if np.array_equal(new_labels, labels):
            converged = True
            break
        key = new_labels.tobytes()
        if key in seen:
            labels = new_labels
            break
        seen.add(key)
        labels = new_labels

    return UntangleResult(
        mu1=mu1,
        mu2=mu2,
        labels=labels,
        v=v,
        t=t,
        iters=iters,
        converged=converged,
        degenerate=degenerate,
    )


def _degenerate_result(rows: np.ndarray) -> UntangleResult:
    m, d = rows.shape
    mean = rows.mean(axis=0)
    return UntangleResult(
        mu1=mean,
        mu2=mean.copy(),
        labels=np.ones(m, dtype=np.int64),
        v=np.zeros(d),
        t=0.0,
        iters=0,
        converged=False,
        degenerate=True,
    )


def untangle_class(
    class_rows: np.ndarray,
    s_eps: SymMatrix,
    max_iters: int = 100,
    init_labels: np.ndarray | None = None,
) -> UntangleResult:
    """Fit the two-subgroup mixture of one class's rows.

    S_eps stays fixed at the supplied global estimate throughout.  Each
    restart stops at a label fixed point (converged), on revisiting an
    earlier labeling (a cycle, reported as non-converged), at
    ``max_iters``, or when a relabeling empties a subgroup (degenerate);
    the restart with the largest between-subgroup gain wins.

    Passing ``init_labels`` (values 1 and 2) skips the restarts and runs
    the alternation once from exactly that labeling.
    """
    rows = np.asarray(class_rows, dtype=np.float64)
    if rows.ndim != 2:
        raise DimensionError(f"class rows must be 2-d, got shape {rows.shape}")
    m, d = rows.shape
    if m < 2:
        raise TooFewSamplesError(f"untangling needs at least 2 rows, got {m}")
    if d != s_eps.dim:
        raise DimensionError(
            f"row dimension {d} does not match covariance dimension {s_eps.dim}"
        )

    if init_labels is not None:
        labels = np.asarray(init_labels, dtype=np.int64).copy()
        if labels.shape != (m,) or not np.all((labels == 1) | (labels == 2)):
            raise DataError("init_labels must be an m-vector of 1s and 2s")
        if labels.min() == labels.max():
            return _degenerate_result(rows)
        return _iterate(rows, s_eps, labels, max_iters)

    white = _whitened(rows, s_eps)
    best: UntangleResult | None = None
    best_gain = -np.inf
    for labels in _candidate_inits(white):
        result = _iterate(rows, s_eps, labels, max_iters)
        gain = 0.0 if result.degenerate else _between_gain(white, result.labels)
        if gain > best_gain:
            best, best_gain = result, gain
    return best if best is not None else _degenerate_result(rows)
