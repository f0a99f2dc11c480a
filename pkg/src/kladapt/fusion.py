"""Dual-branch probability fusion and entropy-based uncertainty weights.

The two branches are the kernel-LDA classifier (softmax over its scores)
and a zero-shot scorer operating on precomputed embeddings.  Their
probability vectors are mixed by peak confidence, and the mixed
prediction's normalized Shannon entropy yields a per-sample weight in
[0, 1] that later scales the statistics updates.

All functions here are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateEmbeddingError, InvalidParameterError, ShapeError

_PROB_SUM_TOL = 1e-6


def check_prob_vector(p: np.ndarray) -> np.ndarray:
    """Validate a probability vector: non-negative, sums to one."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1:
        raise ShapeError(f"probability vector must be 1-D, got shape {p.shape}")
    if np.any(p < 0):
        raise InvalidParameterError("probability vector has negative entries")
    if abs(float(p.sum()) - 1.0) > _PROB_SUM_TOL:
        raise InvalidParameterError(f"probabilities sum to {p.sum()}, expected 1")
    return p


def softmax(logits: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Temperature softmax, numerically stabilized by max subtraction."""
    if not temperature > 0:
        raise InvalidParameterError(f"temperature must be > 0, got {temperature}")
    z = np.asarray(logits, dtype=np.float64) / temperature
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class FusedPrediction:
    """Mixed prediction of the two branches plus its confidence summary.

    ``pseudo_label`` stays ``None`` until a threshold is applied.
    """

    probs: np.ndarray
    alpha: float
    beta: float
    entropy: float
    weight: float
    pseudo_label: Optional[int] = None


def vlm_scores(
    image_embedding: np.ndarray,
    text_embeddings: np.ndarray,
    temperature: float,
) -> np.ndarray:
    """Zero-shot class probabilities from cosine similarities.

    ``probs_k = softmax_k(cos(image, text_k) / temperature)``; the
    temperature divides every logit, so the output is a genuine
    probability vector.
    """
    img = np.asarray(image_embedding, dtype=np.float64)
    texts = np.atleast_2d(np.asarray(text_embeddings, dtype=np.float64))
    if img.ndim != 1 or texts.shape[1] != img.shape[0]:
        raise ShapeError(
            f"image dim {img.shape} incompatible with text dims {texts.shape}"
        )
    img_norm = np.linalg.norm(img)
    text_norms = np.linalg.norm(texts, axis=1)
    if img_norm == 0.0 or np.any(text_norms == 0.0):
        raise DegenerateEmbeddingError("zero-norm embedding cannot be cosine-scored")
    cosines = (texts @ img) / (text_norms * img_norm)
    return softmax(cosines, temperature)


def fuse(p: np.ndarray, p_branch: np.ndarray) -> FusedPrediction:
    """Mix two probability vectors by their peak confidences.

    ``alpha = max(p) / (max(p) + max(p_branch))``, ``beta = 1 - alpha``,
    and the fused vector is ``alpha * p + beta * p_branch``.  Symmetric in
    its arguments up to the alpha/beta swap.
    """
    p = check_prob_vector(p)
    q = check_prob_vector(p_branch)
    if p.shape != q.shape:
        raise ShapeError(f"branch lengths differ: {p.shape} vs {q.shape}")
    if p.shape[0] < 2:
        raise ShapeError("fusion needs at least 2 classes")
    peak_p = float(p.max())
    peak_q = float(q.max())
    alpha = peak_p / (peak_p + peak_q)
    beta = peak_q / (peak_p + peak_q)
    mixed = alpha * p + beta * q
    h = shannon_entropy(mixed)
    w = uncertainty_weight(mixed, mixed.shape[0], _entropy=h)
    return FusedPrediction(probs=mixed, alpha=alpha, beta=beta, entropy=h, weight=w)


def fuse_batch(P: np.ndarray, Q: np.ndarray):
    """Row-wise :func:`fuse` over two (n, M) probability arrays.

    Returns ``(mixed, alpha, weight)`` where ``mixed`` is (n, M) and the
    other two are length-n vectors.  Rows are assumed pre-validated.
    """
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    if P.ndim != 2 or P.shape != Q.shape:
        raise ShapeError(f"branch shapes differ: {P.shape} vs {Q.shape}")
    if P.shape[1] < 2:
        raise ShapeError("fusion needs at least 2 classes")
    peak_p = P.max(axis=1)
    peak_q = Q.max(axis=1)
    alpha = peak_p / (peak_p + peak_q)
    mixed = alpha[:, None] * P + (1.0 - alpha)[:, None] * Q
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(mixed > 0, np.log(np.where(mixed > 0, mixed, 1.0)), 0.0)
    entropy = -(mixed * logs).sum(axis=1)
    weight = np.clip(1.0 - entropy / np.log(P.shape[1]), 0.0, 1.0)
    return mixed, alpha, weight


def shannon_entropy(p: np.ndarray) -> float:
    """Shannon entropy in nats, with 0 * log 0 = 0."""
    p = check_prob_vector(p)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def uncertainty_weight(p: np.ndarray, class_count: int, _entropy=None) -> float:
    """Linear normalized-entropy weight ``1 - H(p) / log(class_count)``.

    Clamped to [0, 1]: uniform predictions weigh 0, one-hot predictions
    weigh 1.
    """
    if class_count < 2:
        raise InvalidParameterError(
            f"class_count must be >= 2 for entropy normalization, got {class_count}"
        )
    h = shannon_entropy(p) if _entropy is None else _entropy
    w = 1.0 - h / np.log(class_count)
    return float(min(1.0, max(0.0, w)))


def pseudo_label(p: np.ndarray, threshold: float) -> Optional[int]:
    """Index of the most probable class if its probability reaches
    ``threshold`` (inclusive), else ``None``.  Ties break to the lowest
    index."""
    p = check_prob_vector(p)
    top = int(np.argmax(p))
    if p[top] >= threshold:
        return top
    return None
