"""Random Fourier feature map approximating the RBF kernel.

A frozen random projection ``z(x) = sqrt(2/D) * cos(Omega @ x + beta)``
whose inner products approximate ``exp(-||x_i - x_j||^2 / (2 sigma^2))``.
Frequencies ``Omega`` are Gaussian, phases ``beta`` uniform on [0, 2pi).

Two frequency-sampling conventions are supported because both appear in
practice:

* ``bandwidth``       -- per-coordinate std dev of Omega is ``1/sigma``
                         (the Fourier transform of the RBF kernel with
                         width ``sigma``; the default).
* ``frequency_scale`` -- per-coordinate std dev is ``sigma`` itself.

Sampling uses the counter-based Philox generator keyed by the seed, so a
map is bit-reproducible across runs and platforms.  Draw order: all of
``Omega`` (row-major, D x d normals), then the D phases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, ShapeError

BANDWIDTH = "bandwidth"
FREQUENCY_SCALE = "frequency_scale"
CONVENTIONS = (BANDWIDTH, FREQUENCY_SCALE)


@dataclass(frozen=True)
class RffParams:
    """Static description of a feature map: dimension, kernel width, seed."""

    feature_dim: int
    sigma: float
    convention: str = BANDWIDTH
    seed: int = 0

    def __post_init__(self):
        if self.feature_dim < 1:
            raise InvalidParameterError(f"feature_dim must be >= 1, got {self.feature_dim}")
        if not self.sigma > 0:
            raise InvalidParameterError(f"sigma must be > 0, got {self.sigma}")
        if self.convention not in CONVENTIONS:
            raise InvalidParameterError(
                f"convention must be one of {CONVENTIONS}, got {self.convention!r}"
            )

    @property
    def frequency_std(self) -> float:
        """Per-coordinate standard deviation of the frequency matrix."""
        if self.convention == BANDWIDTH:
            return 1.0 / self.sigma
        return self.sigma


@dataclass(frozen=True)
class RffMap:
    """Frozen random projection: frequencies ``omega`` and phases ``beta``.

    Immutable after construction; ``transform`` is pure, so one map can be
    shared freely across threads.
    """

    omega: np.ndarray  # (D, d)
    beta: np.ndarray  # (D,)
    params: RffParams
    input_dim: int

    @property
    def feature_dim(self) -> int:
        return self.params.feature_dim

    def transform(self, x: np.ndarray) -> np.ndarray:
        """Map one input vector of length d to kernel features of length D."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] != self.input_dim:
            raise ShapeError(
                f"expected input of shape ({self.input_dim},), got {x.shape}"
            )
        scale = np.sqrt(2.0 / self.feature_dim)
        return scale * np.cos(self.omega @ x + self.beta)

    def transform_batch(self, X: np.ndarray) -> np.ndarray:
        """Map a (n, d) batch to (n, D) kernel features."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise ShapeError(
                f"expected batch of shape (n, {self.input_dim}), got {X.shape}"
            )
        scale = np.sqrt(2.0 / self.feature_dim)
        return scale * np.cos(X @ self.omega.T + self.beta)


def sample_rff(params: RffParams, input_dim: int) -> RffMap:
    """Draw a feature map for inputs of dimension ``input_dim``.

    Identical ``(params, input_dim)`` always produce a bit-identical map.
    """
    if input_dim < 1:
        raise InvalidParameterError(f"input_dim must be >= 1, got {input_dim}")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(params.seed)))
    omega = rng.normal(0.0, params.frequency_std, size=(params.feature_dim, input_dim))
    beta = rng.uniform(0.0, 2.0 * np.pi, size=params.feature_dim)
    omega.setflags(write=False)
    beta.setflags(write=False)
    return RffMap(omega=omega, beta=beta, params=params, input_dim=input_dim)


def map_features(rff_map: RffMap, x: np.ndarray) -> np.ndarray:
    """Functional alias for :meth:`RffMap.transform`."""
    return rff_map.transform(x)


def kernel_oracle(x_i: np.ndarray, x_j: np.ndarray, sigma: float) -> float:
    """Exact RBF kernel value ``exp(-||x_i - x_j||^2 / (2 sigma^2))``.

    Used as the independent reference the random features are tested
    against; never used on the feature-map code path.
    """
    if not sigma > 0:
        raise InvalidParameterError(f"sigma must be > 0, got {sigma}")
    x_i = np.asarray(x_i, dtype=np.float64)
    x_j = np.asarray(x_j, dtype=np.float64)
    if x_i.shape != x_j.shape:
        raise ShapeError(f"mismatched shapes {x_i.shape} vs {x_j.shape}")
    diff = x_i - x_j
    return float(np.exp(-(diff @ diff) / (2.0 * sigma * sigma)))
