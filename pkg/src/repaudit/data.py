"""Labeled representation matrices, the common currency of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError, NumericError

__all__ = ["LabeledMatrix"]


@dataclass(frozen=True, eq=False)
class LabeledMatrix:
    """n representation vectors of dimension d with integer class labels.

    ``class_count`` is the label-space size L; every label lies in [0, L).
    Arrays are copied on construction and frozen, so instances are safe to
    share across concurrent readers.
    """

    rows: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        if rows.ndim != 2:
            raise DimensionError(f"rows must be 2-d, got shape {rows.shape}")
        if rows.shape[0] < 1:
            raise DataError("a labeled matrix needs at least one row")
        if labels.shape != (rows.shape[0],):
            raise DimensionError(
                f"labels shape {labels.shape} does not match {rows.shape[0]} rows"
            )
        if not np.all(np.isfinite(rows)):
            raise NumericError("representation matrix contains non-finite entries")
        if self.class_count < 1:
            raise DataError("class_count must be positive")
        if labels.min() < 0 or labels.max() >= self.class_count:
            raise DataError(
                f"labels must lie in [0, {self.class_count}), "
                f"got range [{labels.min()}, {labels.max()}]"
            )
        rows.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def observed_labels(self) -> np.ndarray:
        """Sorted distinct labels actually present in the data."""
        return np.unique(self.labels)

    def class_rows(self, label: int) -> np.ndarray:
        rows = self.rows[self.labels == label]
        if rows.shape[0] == 0:
            raise DataError(f"label {label} has no samples")
        return rows
