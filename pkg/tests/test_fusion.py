import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kladapt.errors import (
    DegenerateEmbeddingError,
    InvalidParameterError,
    ShapeError,
)
from kladapt.fusion import (
    check_prob_vector,
    fuse,
    fuse_batch,
    pseudo_label,
    shannon_entropy,
    softmax,
    uncertainty_weight,
    vlm_scores,
)


def test_check_prob_vector():
    check_prob_vector([0.25, 0.25, 0.5])
    with pytest.raises(ShapeError):
        check_prob_vector(np.ones((2, 2)) / 4)
    with pytest.raises(InvalidParameterError):
        check_prob_vector([-0.1, 1.1])
    with pytest.raises(InvalidParameterError):
        check_prob_vector([0.4, 0.4])


def test_softmax_basics():
    p = softmax([1.0, 2.0, 3.0])
    assert p.shape == (3,) and np.isclose(p.sum(), 1.0)
    assert p[2] > p[1] > p[0]
    # stable for huge logits
    q = softmax([1000.0, 1001.0])
    assert np.isfinite(q).all() and np.isclose(q.sum(), 1.0)
    with pytest.raises(InvalidParameterError):
        softmax([1.0, 2.0], temperature=0.0)


def test_softmax_temperature_flattens():
    logits = np.array([0.0, 1.0, 4.0])
    sharp = softmax(logits, 0.5)
    flat = softmax(logits, 10.0)
    assert sharp.max() > flat.max()
    assert np.allclose(softmax(logits, 2.0), softmax(logits / 2.0, 1.0), atol=1e-15)


def test_entropy_reference_values():
    assert shannon_entropy([1.0, 0.0, 0.0]) == 0.0
    assert np.isclose(shannon_entropy([0.25] * 4), np.log(4), atol=1e-15)
    # 0 log 0 contributes nothing
    assert np.isclose(shannon_entropy([0.5, 0.5, 0.0]), np.log(2), atol=1e-15)


def test_uncertainty_weight_endpoints():
    assert uncertainty_weight([1.0, 0.0, 0.0, 0.0], 4) == 1.0
    assert uncertainty_weight([0.25] * 4, 4) == 0.0
    # half-entropy point: two equal halves over four classes
    assert np.isclose(uncertainty_weight([0.5, 0.5, 0.0, 0.0], 4), 0.5, atol=1e-15)
    with pytest.raises(InvalidParameterError):
        uncertainty_weight([1.0], 1)


def test_uncertainty_weight_clamped():
    # entropy above log(class_count) would go negative without the clamp
    w = uncertainty_weight([0.2] * 5, 2)
    assert w == 0.0


def test_fuse_alpha_formula():
    p = np.array([0.7, 0.2, 0.1])
    q = np.array([0.3, 0.4, 0.3])
    out = fuse(p, q)
    assert np.isclose(out.alpha, 0.7 / (0.7 + 0.4))
    assert np.isclose(out.alpha + out.beta, 1.0)
    assert np.allclose(out.probs, out.alpha * p + out.beta * q)
    assert np.isclose(out.probs.sum(), 1.0)
    assert 0.0 <= out.weight <= 1.0
    assert out.pseudo_label is None
    # swapping the branches swaps alpha and beta
    swapped = fuse(q, p)
    assert np.isclose(swapped.alpha, out.beta)
    assert np.allclose(swapped.probs, out.probs)


def test_fuse_validation():
    with pytest.raises(ShapeError):
        fuse([0.5, 0.5], [0.2, 0.3, 0.5])
    with pytest.raises(ShapeError):
        fuse([1.0], [1.0])
    with pytest.raises(InvalidParameterError):
        fuse([0.9, 0.2], [0.5, 0.5])


def test_fuse_batch_matches_scalar():
    rng = np.random.Generator(np.random.Philox(key=13))
    P = softmax(rng.normal(size=(30, 5)))
    Q = softmax(rng.normal(size=(30, 5)))
    mixed, alpha, weight = fuse_batch(P, Q)
    for i in range(30):
        one = fuse(P[i], Q[i])
        assert np.allclose(mixed[i], one.probs, atol=1e-12)
        assert np.isclose(alpha[i], one.alpha, atol=1e-12)
        assert np.isclose(weight[i], one.weight, atol=1e-12)
    with pytest.raises(ShapeError):
        fuse_batch(P, Q[:, :4])


def test_pseudo_label_threshold_and_ties():
    assert pseudo_label([0.1, 0.6, 0.3], 0.5) == 1
    assert pseudo_label([0.1, 0.6, 0.3], 0.6) == 1  # inclusive
    assert pseudo_label([0.1, 0.6, 0.3], 0.61) is None
    assert pseudo_label([0.4, 0.4, 0.2], 0.0) == 0  # tie -> lowest index
    assert pseudo_label([0.25] * 4, 1.0) is None


def test_vlm_scores_cosine_oracle():
    img = np.array([1.0, 0.0])
    texts = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    tau = 0.5
    p = vlm_scores(img, texts, tau)
    cosines = np.array([1.0, 0.0, -1.0])
    expected = np.exp(cosines / tau) / np.exp(cosines / tau).sum()
    assert np.allclose(p, expected, atol=1e-12)
    # scaling the embeddings must not change cosine scores
    assert np.allclose(vlm_scores(3.0 * img, 5.0 * texts, tau), p, atol=1e-12)


def test_vlm_scores_degenerate_and_shapes():
    with pytest.raises(DegenerateEmbeddingError):
        vlm_scores([0.0, 0.0], [[1.0, 0.0]], 0.1)
    with pytest.raises(DegenerateEmbeddingError):
        vlm_scores([1.0, 0.0], [[0.0, 0.0]], 0.1)
    with pytest.raises(ShapeError):
        vlm_scores([1.0, 0.0, 0.0], [[1.0, 0.0]], 0.1)


@settings(deadline=None, max_examples=50)
@given(
    logits_p=st.lists(st.floats(-30, 30), min_size=2, max_size=6),
    key=st.integers(min_value=0, max_value=2**16),
)
def test_property_fusion_valid_probability(logits_p, key):
    rng = np.random.Generator(np.random.Philox(key=np.uint64(key)))
    p = softmax(np.asarray(logits_p))
    q = softmax(rng.normal(size=len(logits_p)))
    out = fuse(p, q)
    assert np.isclose(out.probs.sum(), 1.0, atol=1e-9)
    assert np.all(out.probs >= 0)
    assert 0.0 < out.alpha < 1.0
    assert 0.0 <= out.weight <= 1.0
    assert 0.0 <= out.entropy <= np.log(len(logits_p)) + 1e-12


@settings(deadline=None, max_examples=30)
@given(st.integers(min_value=2, max_value=8))
def test_property_weight_monotone_in_confidence(m):
    # mixing a one-hot with uniform: more one-hot mass => larger weight
    onehot = np.zeros(m)
    onehot[0] = 1.0
    uniform = np.full(m, 1.0 / m)
    weights = [
        uncertainty_weight(lam * onehot + (1 - lam) * uniform, m)
        for lam in (0.0, 0.3, 0.6, 0.9, 1.0)
    ]
    assert all(a <= b + 1e-12 for a, b in zip(weights, weights[1:]))
    assert weights[0] < 1e-12 and weights[-1] > 1.0 - 1e-12
