"""Seeded synthetic representation generator, the end-to-end test oracle.

Samples follow the generative law the detector assumes: each class draws
an identity mu_t ~ N(0, S_mu) and every sample adds an independent
variation eps ~ N(0, S_eps).  An infected class plants a second identity
at a controlled Mahalanobis separation s from mu_t, so detection power
becomes a function of a single interpretable knob.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import LabeledMatrix
from .errors import ConfigError
from .linalg import SymMatrix, _cholesky_lower, spd_solve

__all__ = ["Infection", "SynthSpec", "generate"]


@dataclass(frozen=True)
class Infection:
    """One planted contamination: which class, what fraction, how far."""

    class_label: int
    mix_fraction: float
    separation: float

    def __post_init__(self):
        if not 0.0 < self.mix_fraction < 1.0:
            raise ConfigError(
                f"mix_fraction must lie in (0, 1), got {self.mix_fraction}"
            )
        if self.separation < 0.0:
            raise ConfigError(f"separation must be nonnegative, got {self.separation}")


@dataclass(frozen=True, eq=False)
class SynthSpec:
    """Scale, true covariances, planted infections, and the seed."""

    d: int
    num_classes: int
    samples_per_class: int
    s_mu_true: SymMatrix
    s_eps_true: SymMatrix
    infections: tuple[Infection, ...] = field(default_factory=tuple)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "infections", tuple(self.infections))
        if self.d < 1 or self.num_classes < 1 or self.samples_per_class < 1:
            raise ConfigError("d, num_classes, and samples_per_class must be positive")
        if self.s_mu_true.dim != self.d or self.s_eps_true.dim != self.d:
            raise ConfigError("covariance dimensions must equal d")
        labels = [inf.class_label for inf in self.infections]
        if len(set(labels)) != len(labels):
            raise ConfigError("infected class labels must be distinct")
        if any(lab < 0 or lab >= self.num_classes for lab in labels):
            raise ConfigError("infected class labels must lie in [0, num_classes)")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")


def generate(spec: SynthSpec) -> tuple[LabeledMatrix, list[str]]:
    """Draw a synthetic dataset; returns the data and per-row tags.

    Tags are "clean" or "mix" (a row drawn from an infected class's second
    identity).  Within an infected class the first round(p * m) rows form
    the mixed subgroup, displaced by s * u / |u|_Seps where u is a seeded
    random direction and |.|_Seps the Mahalanobis norm, so the planted
    separation under S_eps_true is exactly s.

    All class-level randomness is drawn before any infection offsets, so
    two specs differing only in infection fractions or separations share
    identical underlying noise for the same seed.
    """
    rng = np.random.Generator(np.random.Philox(spec.seed))
    d, L, m = spec.d, spec.num_classes, spec.samples_per_class
    chol_mu = _cholesky_lower(spec.s_mu_true.values, "identity covariance")
    chol_eps = _cholesky_lower(spec.s_eps_true.values, "variation covariance")

    rows = np.empty((L * m, d))
    labels = np.repeat(np.arange(L, dtype=np.int64), m)
    for t in range(L):
        mu_t = chol_mu @ rng.standard_normal(d)
        eps = rng.standard_normal((m, d)) @ chol_eps.T
        rows[t * m : (t + 1) * m] = mu_t + eps

    tags = ["clean"] * (L * m)
    for infection in spec.infections:
        u = rng.standard_normal(d)
        norm_sq = float(u @ spd_solve(spec.s_eps_true, u))
        offset = infection.separation * u / np.sqrt(norm_sq)
        n_mix = int(round(infection.mix_fraction * m))
        start = infection.class_label * m
        rows[start : start + n_mix] += offset
        tags[start : start + n_mix] = ["mix"] * n_mix

    return LabeledMatrix(rows, labels, L), tags
