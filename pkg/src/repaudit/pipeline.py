"""In-library fit and analyze pipelines, shared by the CLI and tests."""

from __future__ import annotations

from .data import LabeledMatrix
from .decomposition import GlobalStats, fit_em, posterior_identity
from .errors import DimensionError, TooFewClassesError
from .io import RunConfig
from .scoring import ScanReport, assemble_report, j_statistic
from .untangle import untangle_class

__all__ = ["fit", "analyze"]


def fit(clean: LabeledMatrix, config: RunConfig | None = None) -> GlobalStats:
    """Center the clean data and fit the global decomposition model."""
    cfg = config or RunConfig()
    return fit_em(
        clean,
        max_iters=cfg.em_max_iters,
        tol=cfg.em_tol,
        ridge_scale=cfg.ridge_scale,
    )


def analyze(
    data: LabeledMatrix, stats: GlobalStats, config: RunConfig | None = None
) -> ScanReport:
    """Scan every class of ``data`` for contamination.

    Per class: estimate the identity under the homogeneous model, untangle
    the two-subgroup mixture, and compute the likelihood-ratio statistic;
    then flag MAD outliers across classes.  Classes with a single sample
    score 0 like any other degenerate (no-mixture) outcome.
    """
    cfg = config or RunConfig()
    if data.d != stats.d:
        raise DimensionError(
            f"data dimension {data.d} does not match fitted dimension {stats.d}"
        )
    labels = data.observed_labels()
    if labels.size < 3:
        raise TooFewClassesError(
            f"analysis needs at least 3 classes, got {labels.size}"
        )
    centered = data.rows - stats.center

    per_class: list[tuple[int, float, bool]] = []
    for label in labels:
        rows = centered[data.labels == label]
        dec = posterior_identity(rows, stats.s_mu, stats.s_eps, class_label=int(label))
        if rows.shape[0] < 2:
            per_class.append((int(label), 0.0, True))
            continue
        unt = untangle_class(rows, stats.s_eps, max_iters=cfg.untangle_max_iters)
        j = j_statistic(rows, dec.mu, unt, stats.s_eps)
        per_class.append((int(label), j, unt.degenerate))

    return assemble_report(
        per_class,
        k=cfg.dof(stats.d),
        threshold=cfg.threshold,
        config=cfg.echo(),
        global_fingerprint=stats.fingerprint(),
    )
