"""Backdoor contamination detection in classifier representation spaces.

The detector decomposes every class's representations into a shared
identity and per-sample variation under a global two-component Gaussian
model, untangles each class into a candidate two-subgroup mixture, and
flags classes whose likelihood-ratio statistic is a robust (MAD) outlier.
A poisoning toolkit and a seeded synthetic generator allow end-to-end
verification without ever training a network.
"""

from .contamination import PoisonPlan, TriggerSpec, poison_dataset, stamp
from .data import LabeledMatrix
from .decomposition import (
    ClassDecomposition,
    GlobalStats,
    center,
    fit_em,
    posterior_identity,
)
from .errors import (
    AuditError,
    ConfigError,
    DataError,
    DegenerateDataError,
    DimensionError,
    NumericError,
    ParseError,
    SingularMatrixError,
    TooFewClassesError,
    TooFewSamplesError,
)
from .io import RunConfig, make_config, read_lrm, read_stats, read_trigger, write_lrm, write_stats, write_trigger
from .linalg import (
    BlockInverseParts,
    SymMatrix,
    block_inverse_parts,
    mahalanobis_sq,
    spd_solve,
    symmetrize_regularize,
)
from .pipeline import analyze, fit
from .scoring import (
    DEFAULT_THRESHOLD,
    ClassScore,
    ScanReport,
    assemble_report,
    j_statistic,
    mad_scores,
    regularize_j,
    report_to_json,
)
from .synth import Infection, SynthSpec, generate
from .untangle import UntangleResult, lda_direction, subgroup_means, untangle_class

__version__ = "0.1.0"

__all__ = [
    "AuditError",
    "BlockInverseParts",
    "ClassDecomposition",
    "ClassScore",
    "ConfigError",
    "DEFAULT_THRESHOLD",
    "DataError",
    "DegenerateDataError",
    "DimensionError",
    "GlobalStats",
    "Infection",
    "LabeledMatrix",
    "NumericError",
    "ParseError",
    "PoisonPlan",
    "RunConfig",
    "ScanReport",
    "SingularMatrixError",
    "SymMatrix",
    "SynthSpec",
    "TooFewClassesError",
    "TooFewSamplesError",
    "TriggerSpec",
    "UntangleResult",
    "analyze",
    "assemble_report",
    "block_inverse_parts",
    "center",
    "fit",
    "fit_em",
    "generate",
    "j_statistic",
    "lda_direction",
    "mad_scores",
    "mahalanobis_sq",
    "make_config",
    "poison_dataset",
    "posterior_identity",
    "read_lrm",
    "read_stats",
    "read_trigger",
    "regularize_j",
    "report_to_json",
    "spd_solve",
    "stamp",
    "subgroup_means",
    "symmetrize_regularize",
    "untangle_class",
    "write_lrm",
    "write_stats",
    "write_trigger",
]
