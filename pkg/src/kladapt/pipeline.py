"""Task-stream orchestration: source pretraining, target adaptation, eval.

A run sees an ordered stream of tasks, each owning a disjoint slice of the
label space.  Source tasks arrive labeled; target tasks arrive unlabeled
in a shifted domain and are learned from pseudo-labels.  For every target
sample the classifier branch (softmax over kernel-LDA scores restricted to
the task's classes) is fused with a zero-shot branch by peak confidence,
the fused entropy sets a weight in [0, 1], and the argmax becomes the
pseudo-label when it clears the confidence threshold.  Accepted samples --
optionally expanded into frequency-augmented triples -- drive weighted
statistics updates.

Evaluation is task-aware: a test sample is scored against its own task's
class set, mirroring how the adaptation restricted scores.  Accuracy
bookkeeping uses the usual lower-triangular matrix (row k = accuracies on
tasks 0..k after learning task k) with final-average and
backward-transfer summaries.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import RunConfig
from .errors import InvalidParameterError, ProtocolError, ShapeError
from .fusion import fuse_batch, softmax
from .klda import KldaModel, WeightedBatch
from .rff import RffMap, RffParams, sample_rff
from .wavelet import augment1d

_ROW_SUM_TOL = 1e-3


@dataclass
class TaskSpec:
    """One task of the stream: a class slice plus its feature array.

    ``features`` is (n, d) or (n, 3, d) when augmented triples were
    precomputed; ``labels`` may be ``None`` (unlabeled target data).
    """

    task_id: int
    class_ids: Tuple[int, ...]
    domain: str
    features: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        self.class_ids = tuple(sorted(int(c) for c in self.class_ids))
        if len(set(self.class_ids)) != len(self.class_ids) or not self.class_ids:
            raise InvalidParameterError(f"class_ids must be non-empty unique, got {self.class_ids}")
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim not in (2, 3):
            raise ShapeError(f"features must be (n, d) or (n, 3, d), got {self.features.shape}")
        if self.features.ndim == 3 and self.features.shape[1] != 3:
            raise ShapeError(f"triple layout needs (n, 3, d), got {self.features.shape}")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.features.shape[0],):
                raise ShapeError(
                    f"labels shape {self.labels.shape} does not match {self.features.shape[0]} samples"
                )
            unknown = set(self.labels.tolist()) - set(self.class_ids)
            if unknown:
                raise InvalidParameterError(f"labels outside class set: {sorted(unknown)}")

    @property
    def count(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[-1]

    @property
    def has_triples(self) -> bool:
        return self.features.ndim == 3

    def flat_features(self) -> np.ndarray:
        """Original samples only, shape (n, d)."""
        return self.features[:, 0, :] if self.has_triples else self.features


class AccuracyMatrix:
    """Lower-triangular accuracy bookkeeping over a task stream."""

    def __init__(self, task_count: int):
        if task_count < 1:
            raise InvalidParameterError(f"task_count must be >= 1, got {task_count}")
        self.values = np.full((task_count, task_count), np.nan)

    @property
    def task_count(self) -> int:
        return self.values.shape[0]

    def set(self, after_task: int, on_task: int, accuracy: float) -> None:
        if on_task > after_task:
            raise InvalidParameterError(
                f"cannot evaluate task {on_task} before learning it (after_task={after_task})"
            )
        if not 0.0 <= accuracy <= 1.0:
            raise InvalidParameterError(f"accuracy must be in [0, 1], got {accuracy}")
        self.values[after_task, on_task] = accuracy

    def get(self, after_task: int, on_task: int) -> float:
        v = self.values[after_task, on_task]
        if np.isnan(v):
            raise InvalidParameterError(f"entry ({after_task}, {on_task}) was never set")
        return float(v)

    def final_average(self) -> float:
        """Mean accuracy over all tasks after the last one was learned."""
        last = self.values[-1, :]
        if np.any(np.isnan(last)):
            raise InvalidParameterError("final row is incomplete")
        return float(last.mean())

    def backward_transfer(self) -> float:
        """Mean of (final accuracy - just-learned accuracy) over earlier tasks.

        Zero means no forgetting; 0.0 by convention for a single task.
        """
        t = self.task_count
        if t == 1:
            return 0.0
        diffs = [self.get(t - 1, j) - self.get(j, j) for j in range(t - 1)]
        return float(np.mean(diffs))


@dataclass
class TaskAdaptStats:
    """Per-task adaptation diagnostics."""

    task_id: int
    sample_count: int
    accepted_count: int
    ingested_count: int
    mean_weight: float
    mean_alpha: float


@dataclass
class AdaptResult:
    model: KldaModel
    task_stats: List[TaskAdaptStats]
    matrix: Optional[AccuracyMatrix] = None
    snapshot_paths: List[str] = field(default_factory=list)


def _batch_slices(n: int, size: int):
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def _check_common_dim(tasks: Sequence[TaskSpec]) -> int:
    dims = {t.dim for t in tasks}
    if len(dims) != 1:
        raise ShapeError(f"tasks disagree on feature dim: {sorted(dims)}")
    return dims.pop()


def build_rff_map(config: RunConfig, input_dim: int) -> RffMap:
    params = RffParams(
        feature_dim=config.d_rff,
        sigma=config.sigma,
        convention=config.convention,
        seed=config.rff_seed,
    )
    return sample_rff(params, input_dim)


def pretrain_source(
    tasks: Sequence[TaskSpec], config: RunConfig
) -> Tuple[KldaModel, RffMap]:
    """Supervised pass over labeled source tasks.

    Samples one feature map (shared by everything downstream), feeds each
    task's batches with unit weights, and finalizes after every task so
    the returned model is ready to score.
    """
    if not tasks:
        raise InvalidParameterError("no source tasks given")
    dim = _check_common_dim(tasks)
    rff_map = build_rff_map(config, dim)
    model = KldaModel(
        config.d_rff, weighted=False, mean_mode=config.mean_mode, ridge=config.ridge
    )
    for task in tasks:
        if task.labels is None:
            raise ProtocolError(f"source task {task.task_id} has no labels")
        if task.has_triples:
            raise ShapeError(f"source task {task.task_id} must use flat features")
        if model.finalized:
            model.unfreeze()
        for sl in _batch_slices(task.count, config.batch_size):
            z = rff_map.transform_batch(task.features[sl])
            model.update(WeightedBatch(z, task.labels[sl]))
        model.finalize()
    return model, rff_map


def _validate_table(table: np.ndarray, count: int, m: int, task_id: int) -> np.ndarray:
    table = np.asarray(table, dtype=np.float64)
    if table.shape != (count, m):
        raise ShapeError(
            f"zero-shot table for task {task_id} has shape {table.shape}, expected {(count, m)}"
        )
    if np.any(table < 0):
        raise InvalidParameterError(f"zero-shot table for task {task_id} has negative entries")
    sums = table.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > _ROW_SUM_TOL):
        worst = float(np.abs(sums - 1.0).max())
        raise InvalidParameterError(
            f"zero-shot rows for task {task_id} deviate from unit sum by {worst:.2e}"
        )
    return table / sums[:, None]


def _label_task(
    model: KldaModel,
    rff_map: RffMap,
    task: TaskSpec,
    table: np.ndarray,
    config: RunConfig,
):
    """Pseudo-label a full task with the currently frozen classifier.

    Returns (pseudo_classes, weights, accepted_mask, mean_alpha); label
    and weight of a sample depend only on its original (non-augmented)
    features.
    """
    flat = task.flat_features()
    m = len(task.class_ids)
    fused_rows = np.empty((task.count, m))
    alphas = np.empty(task.count)
    weights = np.empty(task.count)
    for sl in _batch_slices(task.count, config.batch_size):
        z = rff_map.transform_batch(flat[sl])
        scores = model.scores(z, task.class_ids)
        p = softmax(scores, config.temperature)
        fused_rows[sl], alphas[sl], weights[sl] = fuse_batch(p, table[sl])
    top = np.argmax(fused_rows, axis=1)
    accepted = fused_rows[np.arange(task.count), top] >= config.threshold
    pseudo = np.asarray(task.class_ids, dtype=np.int64)[top]
    return pseudo, weights, accepted, float(alphas.mean()) if task.count else 0.0


def adapt_target(
    model: KldaModel,
    rff_map: RffMap,
    tasks: Sequence[TaskSpec],
    vlm_tables: Sequence[np.ndarray],
    config: RunConfig,
    eval_tasks: Optional[Sequence[TaskSpec]] = None,
    eval_vlm_tables: Optional[Sequence[np.ndarray]] = None,
    snapshot_dir=None,
) -> AdaptResult:
    """Continually adapt a pretrained model over unlabeled target tasks.

    The model switches to weighted covariance normalization (a source
    model trained with unit weights converts in place: its accumulated
    weight sums already equal its counts).  Per task: pseudo-label every
    sample with the classifier frozen from the previous finalize, then
    ingest the accepted samples -- expanded to augmentation triples when
    enabled -- with their fused-entropy weights, and re-finalize.

    When ``eval_tasks`` is given, row k of the returned accuracy matrix is
    filled right after task k's finalize.
    """
    if len(tasks) != len(vlm_tables):
        raise InvalidParameterError(
            f"{len(tasks)} tasks but {len(vlm_tables)} zero-shot tables"
        )
    if eval_tasks is not None and len(eval_tasks) != len(tasks):
        raise InvalidParameterError(
            f"{len(tasks)} tasks but {len(eval_tasks)} eval tasks"
        )
    if rff_map.feature_dim != model.feature_dim:
        raise ShapeError(
            f"feature map dim {rff_map.feature_dim} != model dim {model.feature_dim}"
        )
    model.weighted = True
    rng = np.random.Generator(np.random.Philox(key=np.uint64(config.augment_seed)))
    matrix = AccuracyMatrix(len(tasks)) if eval_tasks is not None else None
    result = AdaptResult(model=model, task_stats=[])
    for k, task in enumerate(tasks):
        table = _validate_table(
            vlm_tables[k], task.count, len(task.class_ids), task.task_id
        )
        if not model.finalized:
            model.finalize()
        pseudo, weights, accepted, mean_alpha = _label_task(
            model, rff_map, task, table, config
        )
        model.unfreeze()
        idx = np.flatnonzero(accepted)
        ingested = 0
        if idx.size:
            if config.augment:
                if task.has_triples:
                    feats = task.features[idx].reshape(idx.size * 3, task.dim)
                else:
                    rows = []
                    for i in idx:
                        rows.extend(
                            augment1d(
                                task.features[i],
                                noise_scale=config.noise_scale,
                                rng=rng,
                            )
                        )
                    feats = np.asarray(rows)
                labels = np.repeat(pseudo[idx], 3)
                sample_w = np.repeat(weights[idx], 3)
            else:
                feats = task.flat_features()[idx]
                labels = pseudo[idx]
                sample_w = weights[idx]
            ingested = feats.shape[0]
            for sl in _batch_slices(ingested, config.batch_size):
                z = rff_map.transform_batch(feats[sl])
                model.update(WeightedBatch(z, labels[sl], sample_w[sl]))
        model.finalize()
        result.task_stats.append(
            TaskAdaptStats(
                task_id=task.task_id,
                sample_count=task.count,
                accepted_count=int(idx.size),
                ingested_count=ingested,
                mean_weight=float(weights[idx].mean()) if idx.size else 0.0,
                mean_alpha=mean_alpha,
            )
        )
        if snapshot_dir is not None:
            path = os.path.join(str(snapshot_dir), f"model_task{task.task_id}.klda")
            model.save(path)
            result.snapshot_paths.append(path)
        if matrix is not None:
            for j in range(k + 1):
                table_j = None
                if config.fused_inference and eval_vlm_tables is not None:
                    table_j = eval_vlm_tables[j]
                matrix.set(
                    k, j, evaluate_task(model, rff_map, eval_tasks[j], config, table_j)
                )
    result.matrix = matrix
    return result


def evaluate_task(
    model: KldaModel,
    rff_map: RffMap,
    task: TaskSpec,
    config: RunConfig,
    vlm_table: Optional[np.ndarray] = None,
) -> float:
    """Task-aware accuracy: argmax over the task's own class set.

    With ``config.fused_inference`` and a zero-shot table, predictions use
    the fused probabilities instead of the raw classifier scores.
    """
    if task.labels is None:
        raise InvalidParameterError(f"eval task {task.task_id} has no labels")
    flat = task.flat_features()
    class_arr = np.asarray(task.class_ids, dtype=np.int64)
    fused = config.fused_inference and vlm_table is not None
    if fused:
        table = _validate_table(vlm_table, task.count, len(task.class_ids), task.task_id)
    correct = 0
    for sl in _batch_slices(task.count, config.batch_size):
        z = rff_map.transform_batch(flat[sl])
        scores = model.scores(z, task.class_ids)
        if fused:
            p = softmax(scores, config.temperature)
            mixed, _, _ = fuse_batch(p, table[sl])
            pred = class_arr[np.argmax(mixed, axis=1)]
        else:
            pred = class_arr[np.argmax(scores, axis=1)]
        correct += int((pred == task.labels[sl]).sum())
    return correct / task.count


def evaluate_tasks(
    model: KldaModel,
    rff_map: RffMap,
    tasks: Sequence[TaskSpec],
    config: RunConfig,
    vlm_tables: Optional[Sequence[np.ndarray]] = None,
) -> List[float]:
    return [
        evaluate_task(
            model, rff_map, t, config, vlm_tables[i] if vlm_tables is not None else None
        )
        for i, t in enumerate(tasks)
    ]


# --- synthetic streams ------------------------------------------------------


@dataclass
class SyntheticStream:
    """A full synthetic benchmark: labeled source, unlabeled-by-protocol
    target (ground truth kept for scoring), eval splits, zero-shot tables."""

    dim: int
    class_count: int
    task_count: int
    source_train: List[TaskSpec]
    target_train: List[TaskSpec]
    target_eval: List[TaskSpec]
    vlm_train: List[np.ndarray]
    vlm_eval: List[np.ndarray]


def rotation_matrix(dim: int, angle_deg: float) -> np.ndarray:
    """Block-diagonal planar rotation: the same angle in each (2i, 2i+1)
    plane; a trailing odd coordinate is left fixed."""
    theta = np.deg2rad(angle_deg)
    r = np.eye(dim)
    c, s = np.cos(theta), np.sin(theta)
    for i in range(dim // 2):
        r[2 * i, 2 * i] = c
        r[2 * i, 2 * i + 1] = -s
        r[2 * i + 1, 2 * i] = s
        r[2 * i + 1, 2 * i + 1] = c
    return r


def make_zero_shot_table(
    labels: np.ndarray,
    class_ids: Sequence[int],
    accuracy: float,
    rng: np.random.Generator,
    conf_low: float = 0.55,
    conf_high: float = 0.95,
) -> np.ndarray:
    """Synthetic zero-shot probabilities hitting a target top-1 accuracy.

    Each row puts a drawn confidence on one winner class -- the true one
    with probability ``accuracy``, else a uniformly random wrong one --
    and spreads the rest evenly.  Draw order per call: correctness coins,
    wrong-class offsets, confidences.
    """
    class_ids = sorted(int(c) for c in class_ids)
    m = len(class_ids)
    if m < 2:
        raise InvalidParameterError("need at least 2 classes for a score table")
    if not 0.0 <= accuracy <= 1.0:
        raise InvalidParameterError(f"accuracy must be in [0, 1], got {accuracy}")
    index_of = {c: i for i, c in enumerate(class_ids)}
    true_idx = np.asarray([index_of[int(c)] for c in labels])
    n = true_idx.shape[0]
    correct = rng.random(n) < accuracy
    offsets = rng.integers(1, m, size=n)
    conf = rng.uniform(conf_low, conf_high, size=n)
    winner = np.where(correct, true_idx, (true_idx + offsets) % m)
    table = np.repeat(((1.0 - conf) / (m - 1))[:, None], m, axis=1)
    table[np.arange(n), winner] = conf
    return table


def gen_synthetic_sfcdcl(
    class_count: int = 12,
    task_count: int = 4,
    dim: int = 8,
    samples_per_class: int = 50,
    eval_per_class: int = 20,
    separation: float = 6.0,
    noise: float = 0.5,
    angle_deg: float = 30.0,
    translation: float = 1.0,
    scale: float = 1.0,
    zero_shot_acc: float = 0.85,
    seed: int = 0,
) -> SyntheticStream:
    """Gaussian-blob stream with a rigid source-to-target domain shift.

    Classes are consecutive integer blobs split across tasks in order.
    The target domain applies ``x -> scale * R x + t`` (R the planar
    rotation above, t a constant vector of norm ``translation``) to fresh
    draws from the class blobs, plus the same observation noise.  One
    Philox stream keyed by ``seed`` drives everything in a fixed order:
    class centers, then per task (per class: source draws, target draws,
    eval draws), then per task the two zero-shot tables.
    """
    if class_count < task_count:
        raise InvalidParameterError(
            f"need at least one class per task, got {class_count} classes / {task_count} tasks"
        )
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    centers = rng.normal(0.0, 1.0, size=(class_count, dim)) * separation
    rot = rotation_matrix(dim, angle_deg)
    shift = translation * np.ones(dim) / np.sqrt(dim)
    partitions = np.array_split(np.arange(class_count), task_count)

    def draw_block(cids, per_class, transform):
        xs, ys = [], []
        for cid in cids:
            pts = centers[cid] + noise * rng.normal(size=(per_class, dim))
            if transform:
                pts = scale * (pts @ rot.T) + shift
            xs.append(pts)
            ys.append(np.full(per_class, cid, dtype=np.int64))
        return np.concatenate(xs), np.concatenate(ys)

    stream = SyntheticStream(
        dim=dim,
        class_count=class_count,
        task_count=task_count,
        source_train=[],
        target_train=[],
        target_eval=[],
        vlm_train=[],
        vlm_eval=[],
    )
    for k, cids in enumerate(partitions):
        cid_tuple = tuple(int(c) for c in cids)
        sx, sy = draw_block(cids, samples_per_class, transform=False)
        tx, ty = draw_block(cids, samples_per_class, transform=True)
        ex, ey = draw_block(cids, eval_per_class, transform=True)
        stream.source_train.append(
            TaskSpec(k, cid_tuple, "source", sx, sy)
        )
        stream.target_train.append(
            TaskSpec(k, cid_tuple, "target", tx, ty)
        )
        stream.target_eval.append(
            TaskSpec(k, cid_tuple, "target", ex, ey)
        )
    for k in range(task_count):
        stream.vlm_train.append(
            make_zero_shot_table(
                stream.target_train[k].labels,
                stream.target_train[k].class_ids,
                zero_shot_acc,
                rng,
            )
        )
        stream.vlm_eval.append(
            make_zero_shot_table(
                stream.target_eval[k].labels,
                stream.target_eval[k].class_ids,
                zero_shot_acc,
                rng,
            )
        )
    return stream
