"""Source-free continual adaptation with streaming kernel LDA.

Feature vectors pass through a frozen random Fourier map approximating an
RBF kernel; a streaming LDA keeps per-class means and one shared
covariance.  Unlabeled target batches are pseudo-labeled by fusing the
classifier's softmax with a zero-shot branch, weighted by the fused
prediction's normalized entropy, and optionally expanded with Haar
high-band augmentations before the weighted statistics updates.
"""

from .config import RunConfig, format_config, load_config, parse_config, save_config
from .emb1 import Emb1File, peek_emb1, read_emb1, write_emb1
from .errors import (
    DegenerateEmbeddingError,
    DegenerateScaleError,
    EmptyModelError,
    FormatError,
    FrozenModelError,
    InvalidParameterError,
    InvalidWeightError,
    NotFinalizedError,
    ProtocolError,
    ShapeError,
    SingularCovarianceError,
)
from .fusion import (
    FusedPrediction,
    fuse,
    fuse_batch,
    pseudo_label,
    shannon_entropy,
    softmax,
    uncertainty_weight,
    vlm_scores,
)
from .klda import ClassStats, KldaModel, WeightedBatch
from .manifest import ManifestTask, StreamManifest, read_manifest, write_manifest
from .pipeline import (
    AccuracyMatrix,
    AdaptResult,
    SyntheticStream,
    TaskSpec,
    adapt_target,
    build_rff_map,
    evaluate_task,
    evaluate_tasks,
    gen_synthetic_sfcdcl,
    make_zero_shot_table,
    pretrain_source,
    rotation_matrix,
)
from .rff import RffMap, RffParams, kernel_oracle, map_features, sample_rff
from .wavelet import SubBands, augment, augment1d, dwt1, dwt2, idwt1, idwt2

__version__ = "0.1.0"

__all__ = [
    "AccuracyMatrix",
    "AdaptResult",
    "ClassStats",
    "DegenerateEmbeddingError",
    "DegenerateScaleError",
    "Emb1File",
    "EmptyModelError",
    "FormatError",
    "FrozenModelError",
    "FusedPrediction",
    "InvalidParameterError",
    "InvalidWeightError",
    "KldaModel",
    "ManifestTask",
    "NotFinalizedError",
    "ProtocolError",
    "RffMap",
    "RffParams",
    "RunConfig",
    "ShapeError",
    "SingularCovarianceError",
    "StreamManifest",
    "SubBands",
    "SyntheticStream",
    "TaskSpec",
    "WeightedBatch",
    "adapt_target",
    "augment",
    "augment1d",
    "build_rff_map",
    "dwt1",
    "dwt2",
    "evaluate_task",
    "evaluate_tasks",
    "format_config",
    "fuse",
    "fuse_batch",
    "gen_synthetic_sfcdcl",
    "idwt1",
    "idwt2",
    "kernel_oracle",
    "load_config",
    "make_zero_shot_table",
    "map_features",
    "parse_config",
    "peek_emb1",
    "pretrain_source",
    "pseudo_label",
    "read_emb1",
    "read_manifest",
    "rotation_matrix",
    "sample_rff",
    "save_config",
    "shannon_entropy",
    "softmax",
    "uncertainty_weight",
    "vlm_scores",
    "write_emb1",
    "write_manifest",
]
