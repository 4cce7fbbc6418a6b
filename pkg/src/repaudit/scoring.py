"""Likelihood-ratio scoring and robust cross-class outlier flagging.

For each class the statistic J compares the homogeneous model (one
identity) against the fitted two-subgroup mixture; both share the global
variation covariance, so the ratio reduces to a difference of Mahalanobis
forms.  J is recentered per a chi-square reading (J_bar), then scored
across classes with the median absolute deviation (J_star); classes whose
J_star exceeds exp(2) are flagged as contaminated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigError, DimensionError, TooFewClassesError
from .linalg import SymMatrix, _cholesky_lower
from .untangle import UntangleResult

__all__ = [
    "ClassScore",
    "ScanReport",
    "DEFAULT_THRESHOLD",
    "MAD_SCALE",
    "j_statistic",
    "regularize_j",
    "mad_scores",
    "assemble_report",
    "report_to_json",
]

# exp(2); the usual citation rounds it to 7.3891.
DEFAULT_THRESHOLD = math.exp(2.0)

# Rescales the median absolute deviation to a standard-normal sigma.
MAD_SCALE = 1.4826


@dataclass(frozen=True, eq=False)
class ClassScore:
    class_label: int
    j: float
    j_bar: float
    j_star: float
    flagged: bool
    degenerate: bool


@dataclass(frozen=True, eq=False)
class ScanReport:
    """Per-class scores plus the run configuration that produced them."""

    scores: list[ClassScore]
    threshold: float
    dof: float
    config: dict = field(default_factory=dict)
    global_fingerprint: str = ""

    def flagged_labels(self) -> list[int]:
        return [s.class_label for s in self.scores if s.flagged]


def j_statistic(
    class_rows: np.ndarray,
    mu_t: np.ndarray,
    untangled: UntangleResult,
    s_eps: SymMatrix,
) -> float:
    """Likelihood-ratio statistic of one class.

    Sums, over rows, the squared Mahalanobis distance to the homogeneous
    identity ``mu_t`` minus the distance to the row's own subgroup mean.
    A degenerate untangling found no second subgroup and scores 0.
    """
    if untangled.degenerate:
        return 0.0
    rows = np.asarray(class_rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != s_eps.dim:
        raise DimensionError(
            f"class rows must be m x {s_eps.dim}, got shape {rows.shape}"
        )
    mu = np.asarray(mu_t, dtype=np.float64)
    if mu.shape != (s_eps.dim,):
        raise DimensionError(f"mu_t must have shape ({s_eps.dim},), got {mu.shape}")
    if untangled.labels.shape[0] != rows.shape[0]:
        raise DimensionError(
            f"{untangled.labels.shape[0]} subgroup labels for {rows.shape[0]} rows"
        )
    if untangled.mu1.shape != (s_eps.dim,) or untangled.mu2.shape != (s_eps.dim,):
        raise DimensionError(
            f"subgroup means must have shape ({s_eps.dim},), got "
            f"{untangled.mu1.shape} and {untangled.mu2.shape}"
        )
    chol = _cholesky_lower(s_eps.values, "variation covariance")
    sub_mu = np.where(
        (untangled.labels == 1)[:, None], untangled.mu1[None, :], untangled.mu2[None, :]
    )
    z0 = solve_triangular(chol, (rows - mu).T, lower=True)
    z1 = solve_triangular(chol, (rows - sub_mu).T, lower=True)
    return float(np.sum(z0 * z0) - np.sum(z1 * z1))


def regularize_j(j: float, k: float) -> float:
    """Chi-square-to-normal recentering (j - k) / sqrt(2k)."""
    if k <= 0:
        raise ConfigError(f"degrees of freedom must be positive, got {k}")
    return (j - k) / math.sqrt(2.0 * k)


def mad_scores(values: list[float] | np.ndarray) -> np.ndarray:
    """Median-absolute-deviation outlier scores |v - median| / (MAD * 1.4826).

    With a zero MAD, entries at the median score 0 and any other entry
    scores infinity (reported as a sentinel, never dropped).
    """
    vals = np.asarray(values, dtype=np.float64)
    if vals.ndim != 1:
        raise DimensionError("mad_scores expects a flat list of values")
    if vals.size < 3:
        raise TooFewClassesError(
            f"MAD needs at least 3 values to be meaningful, got {vals.size}"
        )
    med = np.median(vals)
    dev = np.abs(vals - med)
    mad = np.median(dev)
    if mad == 0.0:
        return np.where(dev == 0.0, 0.0, np.inf)
    return dev / (mad * MAD_SCALE)


def assemble_report(
    per_class: list[tuple[int, float, bool]],
    k: float,
    threshold: float = DEFAULT_THRESHOLD,
    config: dict | None = None,
    global_fingerprint: str = "",
) -> ScanReport:
    """Turn per-class (label, J, degenerate) triples into a ScanReport.

    J_bar is computed per class, J_star jointly across all classes, and a
    class is flagged when J_star exceeds the threshold.  Output order is
    ascending class label regardless of input order.
    """
    if threshold <= 0:
        raise ConfigError(f"threshold must be positive, got {threshold}")
    ordered = sorted(per_class, key=lambda item: item[0])
    labels = [item[0] for item in ordered]
    if len(set(labels)) != len(labels):
        raise ConfigError("duplicate class labels in per-class scores")
    j_bars = [regularize_j(j, k) for _, j, _ in ordered]
    stars = mad_scores(j_bars)
    scores = [
        ClassScore(
            class_label=label,
            j=j,
            j_bar=j_bar,
            j_star=float(star),
            flagged=bool(star > threshold),
            degenerate=degenerate,
        )
        for (label, j, degenerate), j_bar, star in zip(ordered, j_bars, stars)
    ]
    return ScanReport(
        scores=scores,
        threshold=threshold,
        dof=float(k),
        config=dict(config or {}),
        global_fingerprint=global_fingerprint,
    )


def report_to_json(report: ScanReport) -> str:
    """Serialize a ScanReport; infinite J_star becomes the string "inf"."""
    payload = {
        "threshold": report.threshold,
        "dof": report.dof,
        "classes": [
            {
                "label": s.class_label,
                "j": s.j,
                "j_bar": s.j_bar,
                "j_star": "inf" if math.isinf(s.j_star) else s.j_star,
                "flagged": s.flagged,
                "degenerate": s.degenerate,
            }
            for s in report.scores
        ],
        "config": report.config,
        "global_fingerprint": report.global_fingerprint,
    }
    return json.dumps(payload, indent=2) + "\n"
