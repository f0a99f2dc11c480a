"""Streaming kernelized LDA: per-class means, one shared covariance.

The model ingests batches of kernel features, maintains per-class means
and a shared covariance, and solves ridge-regularized LDA weights on
demand.  Two axes of behaviour are fixed at construction:

* ``weighted``  -- covariance normalization.  Unweighted mode divides the
  accumulated within-class scatter by the raw sample count; weighted mode
  divides by (total weight sum - 1), with the scatter itself scaled by
  the per-sample weights.  With unit weights the two differ only by the
  N vs N-1 scale.
* ``mean_mode`` -- divisor of the weighted class-mean sum.  ``literal``
  divides by the sample count n_m, ``normalized`` by the weight sum.
  Both coincide at unit weights.

Internally the model keeps exact sufficient statistics (per-class weighted
sums inside the means, plus one global weighted outer-product matrix) and
rebuilds the covariance from them after every batch.  This makes the final
statistics independent of how a dataset was split into batches, which the
naive recursive decay-and-add update cannot guarantee once class means
drift between batches.

Updates require exclusive access (single writer); scoring on a finalized
model is read-only and thread-safe.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateScaleError,
    EmptyModelError,
    FormatError,
    FrozenModelError,
    InvalidParameterError,
    InvalidWeightError,
    NotFinalizedError,
    ShapeError,
    SingularCovarianceError,
)

MEAN_LITERAL = "literal"
MEAN_NORMALIZED = "normalized"
MEAN_MODES = (MEAN_LITERAL, MEAN_NORMALIZED)

_MAGIC = b"KLDA"
_VERSION = 1
_FLAG_WEIGHTED = 1
_FLAG_FINALIZED = 2
_FLAG_MEAN_NORMALIZED = 4
_FLAG_EXPLICIT_RIDGE = 8


@dataclass
class ClassStats:
    """Running statistics of one class: mean, sample count, weight sum."""

    class_id: int
    mean: np.ndarray
    count: int = 0
    weight_sum: float = 0.0


@dataclass
class WeightedBatch:
    """A batch of features with labels and per-sample weights in [0, 1].

    ``weights`` defaults to all ones, which reduces every weighted update
    to its unweighted form.
    """

    features: np.ndarray
    labels: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ShapeError(f"features must be (n, D), got {self.features.shape}")
        n = self.features.shape[0]
        if self.labels.shape != (n,):
            raise ShapeError(
                f"labels shape {self.labels.shape} does not match {n} samples"
            )
        if self.weights is None:
            self.weights = np.ones(n, dtype=np.float64)
        else:
            self.weights = np.asarray(self.weights, dtype=np.float64)
            if self.weights.shape != (n,):
                raise ShapeError(
                    f"weights shape {self.weights.shape} does not match {n} samples"
                )
            if np.any(self.weights < 0.0) or np.any(self.weights > 1.0):
                raise InvalidWeightError("weights must lie in [0, 1]")

    def __len__(self) -> int:
        return self.features.shape[0]

    def select(self, class_id: int) -> "WeightedBatch":
        mask = self.labels == class_id
        return WeightedBatch(self.features[mask], self.labels[mask], self.weights[mask])


class KldaModel:
    """Streaming LDA over a fixed feature map.

    Typical flow per task: ``update`` each batch, then ``finalize`` to
    solve the classifier; call ``unfreeze`` before feeding the next task.
    """

    def __init__(
        self,
        feature_dim: int,
        weighted: bool = False,
        mean_mode: str = MEAN_LITERAL,
        ridge: Optional[float] = None,
    ):
        if feature_dim < 1:
            raise InvalidParameterError(f"feature_dim must be >= 1, got {feature_dim}")
        if mean_mode not in MEAN_MODES:
            raise InvalidParameterError(f"mean_mode must be one of {MEAN_MODES}")
        if ridge is not None and ridge < 0:
            raise InvalidParameterError(f"ridge must be >= 0, got {ridge}")
        self.feature_dim = feature_dim
        self.weighted = weighted
        self.mean_mode = mean_mode
        self.ridge = ridge
        self.classes: Dict[int, ClassStats] = {}
        self.covariance = np.zeros((feature_dim, feature_dim))
        self.total_count = 0
        self.prev_count = 0
        self.total_weight_sum = 0.0
        self.weights_matrix: Optional[np.ndarray] = None  # (D, M)
        self.bias: Optional[np.ndarray] = None  # (M,)
        self.finalized = False
        # global weighted outer-product sum; with the class means it
        # determines the within-class scatter exactly
        self._sqsum = np.zeros((feature_dim, feature_dim))

    # -- bookkeeping --------------------------------------------------

    @property
    def class_ids(self) -> List[int]:
        return sorted(self.classes.keys())

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def effective_ridge(self) -> float:
        """Explicit ridge if set, else 1e-4 * trace(A) / D."""
        if self.ridge is not None:
            return self.ridge
        return 1e-4 * float(np.trace(self.covariance)) / self.feature_dim

    def _require_updatable(self):
        if self.finalized:
            raise FrozenModelError("model is finalized; call unfreeze() to keep updating")

    def _check_batch(self, batch: WeightedBatch):
        if batch.features.shape[1] != self.feature_dim:
            raise ShapeError(
                f"batch feature dim {batch.features.shape[1]} != model dim {self.feature_dim}"
            )

    # -- statistics updates -------------------------------------------

    def update_mean(self, batch: WeightedBatch, class_id: int) -> ClassStats:
        """Fold a single-class batch into that class's running mean.

        The stored mean always equals the weighted sum of every sample of
        the class seen so far, divided by the mode's divisor (sample count
        or weight sum).
        """
        self._require_updatable()
        self._check_batch(batch)
        if not np.all(batch.labels == class_id):
            raise InvalidParameterError(
                f"update_mean batch contains labels other than {class_id}"
            )
        stats = self.classes.get(class_id)
        if stats is None:
            stats = ClassStats(class_id=class_id, mean=np.zeros(self.feature_dim))
            self.classes[class_id] = stats
        n_new = len(batch)
        if n_new == 0:
            return stats
        wsum_new = float(batch.weights.sum())
        weighted_sum = batch.weights @ batch.features
        if self.mean_mode == MEAN_LITERAL:
            old_div, new_div = stats.count, stats.count + n_new
        else:
            old_div, new_div = stats.weight_sum, stats.weight_sum + wsum_new
        if new_div > 0:
            stats.mean = (stats.mean * old_div + weighted_sum) / new_div
        stats.count += n_new
        stats.weight_sum += wsum_new
        return stats

    def update_covariance(self, batch: WeightedBatch) -> "KldaModel":
        """Fold a batch into the shared covariance.

        Class means referenced by the batch must already include these
        samples (call ``update_mean`` first).  Counts advance by first
        capturing the old total, then adding the batch size.
        """
        self._require_updatable()
        self._check_batch(batch)
        n_new = len(batch)
        if n_new == 0:
            return self
        self.prev_count = self.total_count
        self.total_count = self.prev_count + n_new
        self.total_weight_sum += float(batch.weights.sum())
        self._sqsum += (batch.features * batch.weights[:, None]).T @ batch.features
        if self.weighted:
            scale = self.total_weight_sum - 1.0
            if scale <= 0.0:
                raise DegenerateScaleError(
                    f"weight sum {self.total_weight_sum} must exceed 1 for the weighted scale"
                )
        else:
            scale = float(self.total_count)
        scatter = self._sqsum.copy()
        for stats in self.classes.values():
            if stats.count == 0:
                continue
            if self.mean_mode == MEAN_LITERAL:
                coef = 2.0 * stats.count - stats.weight_sum
            else:
                coef = stats.weight_sum
            if coef != 0.0:
                scatter -= coef * np.outer(stats.mean, stats.mean)
        self.covariance = (scatter + scatter.T) / (2.0 * scale)
        return self

    def update(self, batch: WeightedBatch) -> "KldaModel":
        """Means for every class present in the batch, then the covariance."""
        self._check_batch(batch)
        for class_id in np.unique(batch.labels):
            self.update_mean(batch.select(int(class_id)), int(class_id))
        return self.update_covariance(batch)

    # -- classifier ----------------------------------------------------

    def finalize(self) -> "KldaModel":
        """Solve ``(A + ridge I) w_m = mu_m`` for every class and set the
        biases ``b_m = -0.5 mu_m . w_m``.  Idempotent; ``unfreeze`` makes
        the model updatable again and a later re-finalize just re-solves.
        """
        if not self.classes:
            raise EmptyModelError("cannot finalize a model with no classes")
        ridge = self.effective_ridge()
        regularized = self.covariance + ridge * np.eye(self.feature_dim)
        means = np.column_stack([self.classes[cid].mean for cid in self.class_ids])
        try:
            factor = scipy.linalg.cho_factor(regularized, lower=True)
            solved = scipy.linalg.cho_solve(factor, means)
        except np.linalg.LinAlgError as exc:
            raise SingularCovarianceError(
                f"covariance solve failed with ridge {ridge}: {exc}"
            ) from exc
        self.weights_matrix = solved
        self.bias = -0.5 * np.einsum("dm,dm->m", means, solved)
        self.finalized = True
        return self

    def unfreeze(self) -> "KldaModel":
        self.finalized = False
        return self

    def _column_indices(self, class_ids: Optional[Sequence[int]]) -> np.ndarray:
        order = self.class_ids
        if class_ids is None:
            return np.arange(len(order))
        lookup = {cid: i for i, cid in enumerate(order)}
        try:
            return np.asarray([lookup[cid] for cid in class_ids], dtype=np.intp)
        except KeyError as exc:
            raise InvalidParameterError(f"unknown class id {exc.args[0]}") from exc

    def score(self, z: np.ndarray, class_ids: Optional[Sequence[int]] = None) -> np.ndarray:
        """Per-class scores ``z @ W + b`` for one feature vector."""
        z = np.asarray(z, dtype=np.float64)
        if z.ndim != 1 or z.shape[0] != self.feature_dim:
            raise ShapeError(f"expected features of shape ({self.feature_dim},), got {z.shape}")
        return self.scores(z[None, :], class_ids)[0]

    def scores(self, Z: np.ndarray, class_ids: Optional[Sequence[int]] = None) -> np.ndarray:
        """Score a (n, D) batch; columns follow ascending class id (or the
        requested ``class_ids`` order)."""
        if not self.finalized:
            raise NotFinalizedError("call finalize() before scoring")
        Z = np.asarray(Z, dtype=np.float64)
        if Z.ndim != 2 or Z.shape[1] != self.feature_dim:
            raise ShapeError(f"expected batch of shape (n, {self.feature_dim}), got {Z.shape}")
        cols = self._column_indices(class_ids)
        return Z @ self.weights_matrix[:, cols] + self.bias[cols]

    def predict(self, Z: np.ndarray, class_ids: Optional[Sequence[int]] = None) -> np.ndarray:
        """Argmax class ids; ties break to the lowest class id."""
        order = self.class_ids if class_ids is None else list(class_ids)
        f = self.scores(Z, class_ids)
        return np.asarray(order, dtype=np.int64)[np.argmax(f, axis=1)]

    # -- serialization --------------------------------------------------
    #
    # Versioned little-endian snapshot, layout (version 1):
    #   magic "KLDA" | u16 version | u16 flags | u32 D | u32 M
    #   i64 N_total | i64 N_prev | f64 total_weight_sum | f64 ridge
    #   M class records: i64 class_id | i64 count | f64 weight_sum | D f64 mean
    #   D*D f64 covariance | D*D f64 outer-product sum
    #   if finalized: D*M f64 weights | M f64 bias
    # Flags: 1 weighted, 2 finalized, 4 normalized mean mode,
    #        8 ridge explicitly set (else the ridge field is ignored).

    def save(self, path) -> None:
        flags = 0
        if self.weighted:
            flags |= _FLAG_WEIGHTED
        if self.finalized:
            flags |= _FLAG_FINALIZED
        if self.mean_mode == MEAN_NORMALIZED:
            flags |= _FLAG_MEAN_NORMALIZED
        if self.ridge is not None:
            flags |= _FLAG_EXPLICIT_RIDGE
        parts = [
            _MAGIC,
            struct.pack("<HHII", _VERSION, flags, self.feature_dim, self.num_classes),
            struct.pack(
                "<qqdd",
                self.total_count,
                self.prev_count,
                self.total_weight_sum,
                self.ridge if self.ridge is not None else 0.0,
            ),
        ]
        for cid in self.class_ids:
            stats = self.classes[cid]
            parts.append(struct.pack("<qqd", stats.class_id, stats.count, stats.weight_sum))
            parts.append(stats.mean.astype("<f8").tobytes())
        parts.append(self.covariance.astype("<f8").tobytes())
        parts.append(self._sqsum.astype("<f8").tobytes())
        if self.finalized:
            parts.append(self.weights_matrix.astype("<f8").tobytes())
            parts.append(self.bias.astype("<f8").tobytes())
        with open(path, "wb") as fh:
            fh.write(b"".join(parts))

    @classmethod
    def load(cls, path) -> "KldaModel":
        with open(path, "rb") as fh:
            raw = fh.read()
        if len(raw) < 16 or raw[:4] != _MAGIC:
            raise FormatError("bad model magic", offset=0)
        version, flags, dim, n_classes = struct.unpack_from("<HHII", raw, 4)
        if version != _VERSION:
            raise FormatError(f"unsupported model version {version}", offset=4)
        off = 16
        if len(raw) < off + 32:
            raise FormatError("truncated model header", offset=len(raw))
        total_count, prev_count, total_weight_sum, ridge_value = struct.unpack_from(
            "<qqdd", raw, off
        )
        off += 32
        model = cls(
            feature_dim=dim,
            weighted=bool(flags & _FLAG_WEIGHTED),
            mean_mode=MEAN_NORMALIZED if flags & _FLAG_MEAN_NORMALIZED else MEAN_LITERAL,
            ridge=ridge_value if flags & _FLAG_EXPLICIT_RIDGE else None,
        )
        model.total_count = total_count
        model.prev_count = prev_count
        model.total_weight_sum = total_weight_sum
        rec_bytes = 24 + 8 * dim
        for _ in range(n_classes):
            if len(raw) < off + rec_bytes:
                raise FormatError("truncated class record", offset=len(raw))
            cid, count, weight_sum = struct.unpack_from("<qqd", raw, off)
            mean = np.frombuffer(raw, dtype="<f8", count=dim, offset=off + 24).copy()
            model.classes[cid] = ClassStats(
                class_id=cid, mean=mean, count=count, weight_sum=weight_sum
            )
            off += rec_bytes
        mat_bytes = 8 * dim * dim
        if len(raw) < off + 2 * mat_bytes:
            raise FormatError("truncated covariance payload", offset=len(raw))
        model.covariance = (
            np.frombuffer(raw, dtype="<f8", count=dim * dim, offset=off)
            .reshape(dim, dim)
            .copy()
        )
        off += mat_bytes
        model._sqsum = (
            np.frombuffer(raw, dtype="<f8", count=dim * dim, offset=off)
            .reshape(dim, dim)
            .copy()
        )
        off += mat_bytes
        if flags & _FLAG_FINALIZED:
            tail = 8 * dim * n_classes + 8 * n_classes
            if len(raw) < off + tail:
                raise FormatError("truncated classifier payload", offset=len(raw))
            model.weights_matrix = (
                np.frombuffer(raw, dtype="<f8", count=dim * n_classes, offset=off)
                .reshape(dim, n_classes)
                .copy()
            )
            off += 8 * dim * n_classes
            model.bias = np.frombuffer(raw, dtype="<f8", count=n_classes, offset=off).copy()
            off += 8 * n_classes
            model.finalized = True
        if off != len(raw):
            raise FormatError(f"{len(raw) - off} trailing bytes after payload", offset=off)
        return model
