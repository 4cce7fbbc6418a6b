"""Data-poisoning toolkit: trigger stamping and targeted contamination.

A trigger is a mask/pattern pair applied elementwise to flattened tensors,
A(x) = (1 - kappa) * x + kappa * delta.  A poisoning plan appends two kinds
of stamped rows to a dataset: attack rows (source-class samples relabeled
to the target) and cover rows (samples from designated cover classes that
keep their true labels), which together teach a model a source-specific
backdoor.  This module is the attack-side oracle for the detector; it
never touches image formats, only pre-flattened tensors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import LabeledMatrix
from .errors import ConfigError, DataError, DimensionError, NumericError

__all__ = ["TriggerSpec", "PoisonPlan", "stamp", "poison_dataset"]


@dataclass(frozen=True, eq=False)
class TriggerSpec:
    """Elementwise trigger: mask kappa in [0,1]^d and pattern delta."""

    kappa: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        kappa = np.array(self.kappa, dtype=np.float64)
        delta = np.array(self.delta, dtype=np.float64)
        if kappa.ndim != 1 or delta.shape != kappa.shape:
            raise DimensionError(
                f"kappa and delta must be equal-length vectors, got "
                f"{kappa.shape} and {delta.shape}"
            )
        if not (np.all(np.isfinite(kappa)) and np.all(np.isfinite(delta))):
            raise NumericError("trigger contains non-finite entries")
        if kappa.min() < 0.0 or kappa.max() > 1.0:
            raise DataError("mask entries must lie in [0, 1]")
        kappa.flags.writeable = False
        delta.flags.writeable = False
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "delta", delta)

    @property
    def d(self) -> int:
        return self.kappa.shape[0]

    @property
    def magnitude(self) -> float:
        """Euclidean norm of the effective pattern kappa * delta."""
        return float(np.linalg.norm(self.kappa * self.delta))


@dataclass(frozen=True)
class PoisonPlan:
    """Which classes to poison, how much, and with what seed.

    Fractions are relative to the dataset size n and must stay small
    (legitimate samples dominate in the threat model, so the pair must sum
    below one half).  Defaults mirror the standard recipe of 2% attack
    plus 1% cover rows.
    """

    source_label: int
    target_label: int
    cover_labels: tuple[int, ...] = field(default_factory=tuple)
    attack_fraction: float = 0.02
    cover_fraction: float = 0.01
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "cover_labels", tuple(self.cover_labels))
        if self.source_label == self.target_label:
            raise ConfigError("source and target labels must differ")
        if self.target_label in self.cover_labels:
            raise ConfigError("the target label cannot serve as a cover label")
        for frac, name in (
            (self.attack_fraction, "attack_fraction"),
            (self.cover_fraction, "cover_fraction"),
        ):
            if not 0.0 < frac < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {frac}")
        if self.attack_fraction + self.cover_fraction >= 0.5:
            raise ConfigError("attack and cover fractions must sum below 0.5")
        if not self.cover_labels:
            raise ConfigError("at least one cover label is required")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")


def stamp(x: np.ndarray, trig: TriggerSpec) -> np.ndarray:
    """Apply the trigger to one flattened tensor: (1-kappa)*x + kappa*delta."""
    xv = np.asarray(x, dtype=np.float64)
    if xv.shape != (trig.d,):
        raise DimensionError(
            f"input must have shape ({trig.d},), got {xv.shape}"
        )
    return (1.0 - trig.kappa) * xv + trig.kappa * trig.delta


def _split_evenly(total: int, buckets: tuple[int, ...]) -> dict[int, int]:
    """Split a count across labels evenly, remainder to the lowest label."""
    ordered = sorted(buckets)
    base, rem = divmod(total, len(ordered))
    counts = {label: base for label in ordered}
    counts[ordered[0]] += rem
    return counts


def poison_dataset(
    data: LabeledMatrix, trig: TriggerSpec, plan: PoisonPlan
) -> tuple[LabeledMatrix, list[str]]:
    """Append stamped attack and cover rows to a dataset.

    Attack rows are a seeded without-replacement sample of source-class
    rows, stamped and relabeled to the target; cover rows are stamped
    samples from the cover classes keeping their true labels.  Counts are
    round(fraction * n).  The original rows are preserved bit for bit.

    Returns the widened dataset and a provenance tag per output row,
    one of "clean", "attack", or "cover".  Deterministic given the seed;
    multi-trigger attacks compose by repeated calls with distinct plans.
    """
    if trig.d != data.d:
        raise DimensionError(
            f"trigger dimension {trig.d} does not match data dimension {data.d}"
        )
    present = set(int(v) for v in data.observed_labels())
    for label, role in (
        (plan.source_label, "source"),
        (plan.target_label, "target"),
        *((c, "cover") for c in plan.cover_labels),
    ):
        if label not in present:
            raise DataError(f"{role} label {label} has no samples in the data")

    n = data.n
    attack_count = int(round(plan.attack_fraction * n))
    cover_count = int(round(plan.cover_fraction * n))
    if attack_count < 1:
        raise ConfigError(
            f"attack_fraction {plan.attack_fraction} yields zero rows for n={n}"
        )
    if cover_count < 1:
        raise ConfigError(
            f"cover_fraction {plan.cover_fraction} yields zero rows for n={n}"
        )

    rng = np.random.Generator(np.random.Philox(plan.seed))

    source_idx = np.flatnonzero(data.labels == plan.source_label)
    if attack_count > source_idx.size:
        raise DataError(
            f"source class {plan.source_label} has {source_idx.size} samples, "
            f"cannot draw {attack_count} without replacement"
        )
    attack_sel = rng.choice(source_idx, size=attack_count, replace=False)

    cover_sel: list[tuple[int, np.ndarray]] = []
    for label, count in _split_evenly(cover_count, plan.cover_labels).items():
        if count == 0:
            continue
        idx = np.flatnonzero(data.labels == label)
        if count > idx.size:
            raise DataError(
                f"cover class {label} has {idx.size} samples, "
                f"cannot draw {count} without replacement"
            )
        cover_sel.append((label, rng.choice(idx, size=count, replace=False)))

    new_rows = [data.rows]
    new_labels = [data.labels]
    tags = ["clean"] * n
    attack_rows = np.stack([stamp(data.rows[i], trig) for i in attack_sel])
    new_rows.append(attack_rows)
    new_labels.append(np.full(attack_count, plan.target_label, dtype=np.int64))
    tags.extend(["attack"] * attack_count)
    for label, sel in cover_sel:
        new_rows.append(np.stack([stamp(data.rows[i], trig) for i in sel]))
        new_labels.append(np.full(sel.size, label, dtype=np.int64))
        tags.extend(["cover"] * sel.size)

    widened = LabeledMatrix(
        np.vstack(new_rows), np.concatenate(new_labels), data.class_count
    )
    return widened, tags
