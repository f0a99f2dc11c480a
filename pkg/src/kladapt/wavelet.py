"""One-level orthonormal Haar analysis/synthesis and high-band augmentation.

The 2-D transform applies the filter pair low = [1/sqrt2, 1/sqrt2],
high = [1/sqrt2, -1/sqrt2] with stride 2, first along rows (the
horizontal axis) and then along columns.  Band names use the order
<vertical filter><horizontal filter>, so e.g. ``lh`` is vertically
low-passed, horizontally high-passed.  On a 2x2 block

    a b
    c d

the coefficients are (with s1 = a+b, s2 = c+d, d1 = a-b, d2 = c-d):

    ll = (s1 + s2) / 2      lh = (d1 + d2) / 2
    hl = (s1 - s2) / 2      hh = (d1 - d2) / 2

The pairwise grouping above is kept verbatim in the code: it makes both
the transform of a constant grid and its reconstruction bit-exact, which
the augmentation fixed point (constant image => zeroing changes nothing)
relies on.

Grids are plain float arrays of shape (H, W) or (C, H, W); all routines
operate on the trailing two axes.  Odd heights/widths are edge-replicated
by one row/column before analysis and cropped back after synthesis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .errors import FormatError, InvalidParameterError, ShapeError


@dataclass
class SubBands:
    """One decomposition level: four coefficient grids of half resolution.

    ``pad`` records how many rows/columns of edge padding the analysis
    added, so synthesis can restore the original support.
    """

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray
    pad: Tuple[int, int] = (0, 0)

    def energy(self) -> float:
        """Sum of squared coefficients over all four bands."""
        return float(
            (self.ll**2).sum()
            + (self.lh**2).sum()
            + (self.hl**2).sum()
            + (self.hh**2).sum()
        )


def _as_grid(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (2, 3) or x.shape[-1] == 0 or x.shape[-2] == 0:
        raise InvalidParameterError(f"grid must be (H, W) or (C, H, W), got {x.shape}")
    return x


def dwt2(x) -> SubBands:
    """One-level 2-D Haar analysis of a grid."""
    x = _as_grid(x)
    pad_h = x.shape[-2] % 2
    pad_w = x.shape[-1] % 2
    if pad_h or pad_w:
        widths = [(0, 0)] * (x.ndim - 2) + [(0, pad_h), (0, pad_w)]
        x = np.pad(x, widths, mode="edge")
    a = x[..., 0::2, 0::2]
    b = x[..., 0::2, 1::2]
    c = x[..., 1::2, 0::2]
    d = x[..., 1::2, 1::2]
    s1 = a + b
    s2 = c + d
    d1 = a - b
    d2 = c - d
    return SubBands(
        ll=(s1 + s2) * 0.5,
        lh=(d1 + d2) * 0.5,
        hl=(s1 - s2) * 0.5,
        hh=(d1 - d2) * 0.5,
        pad=(pad_h, pad_w),
    )


def idwt2(bands: SubBands) -> np.ndarray:
    """Exact inverse of :func:`dwt2`, cropped to the original support."""
    ll, lh, hl, hh = bands.ll, bands.lh, bands.hl, bands.hh
    for name, band in (("lh", lh), ("hl", hl), ("hh", hh)):
        if band.shape != ll.shape:
            raise ShapeError(f"band {name} has shape {band.shape}, ll has {ll.shape}")
    s1 = ll + hl
    s2 = ll - hl
    d1 = lh + hh
    d2 = lh - hh
    out_shape = ll.shape[:-2] + (2 * ll.shape[-2], 2 * ll.shape[-1])
    x = np.empty(out_shape, dtype=np.float64)
    x[..., 0::2, 0::2] = (s1 + d1) * 0.5
    x[..., 0::2, 1::2] = (s1 - d1) * 0.5
    x[..., 1::2, 0::2] = (s2 + d2) * 0.5
    x[..., 1::2, 1::2] = (s2 - d2) * 0.5
    pad_h, pad_w = bands.pad
    if pad_h or pad_w:
        x = x[..., : out_shape[-2] - pad_h, : out_shape[-1] - pad_w]
    return x


def dwt1(v) -> Tuple[np.ndarray, np.ndarray]:
    """1-D variant on the trailing axis: (low, high) half-bands.

    Uses the pair average/difference scaling (low = (a+b)/2), matching
    the 2-D transform's block averages; dividing by the power of two
    keeps the constant fixed point bit-exact, which the sqrt(2)
    orthonormal scaling cannot.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] == 0:
        raise InvalidParameterError("empty signal")
    if v.shape[-1] % 2:
        widths = [(0, 0)] * (v.ndim - 1) + [(0, 1)]
        v = np.pad(v, widths, mode="edge")
    even = v[..., 0::2]
    odd = v[..., 1::2]
    return (even + odd) * 0.5, (even - odd) * 0.5


def idwt1(low: np.ndarray, high: np.ndarray, length: Union[int, None] = None) -> np.ndarray:
    """Inverse of :func:`dwt1`; ``length`` crops an odd-length original."""
    if low.shape != high.shape:
        raise ShapeError(f"band shapes differ: {low.shape} vs {high.shape}")
    out_shape = low.shape[:-1] + (2 * low.shape[-1],)
    v = np.empty(out_shape, dtype=np.float64)
    v[..., 0::2] = low + high
    v[..., 1::2] = low - high
    if length is not None:
        v = v[..., :length]
    return v


def augment(x, seed: int = 0, noise_scale: float = 1.0, rng=None):
    """High-band suppressed and randomized variants of a grid.

    Returns ``(x, x_zeros, x_rand)`` where ``x_zeros`` reconstructs from
    the low-low band alone and ``x_rand`` replaces the three high bands
    with Gaussian noise drawn from a Philox stream keyed by ``seed``
    (draw order lh, hl, hh).  Passing ``rng`` instead reuses the caller's
    generator, so a stream of samples draws from one sequence.  All three
    variants share whatever label the caller attached to ``x``.
    """
    x = _as_grid(x)
    bands = dwt2(x)
    zero = np.zeros_like(bands.ll)
    x_zeros = idwt2(SubBands(bands.ll, zero, zero, zero, bands.pad))
    if rng is None:
        rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    g_lh = rng.normal(0.0, noise_scale, size=bands.ll.shape)
    g_hl = rng.normal(0.0, noise_scale, size=bands.ll.shape)
    g_hh = rng.normal(0.0, noise_scale, size=bands.ll.shape)
    x_rand = idwt2(SubBands(bands.ll, g_lh, g_hl, g_hh, bands.pad))
    return x, x_zeros, x_rand


def augment1d(v, seed: int = 0, noise_scale: float = 1.0, rng=None):
    """1-D counterpart of :func:`augment` for vector-valued samples."""
    v = np.asarray(v, dtype=np.float64)
    length = v.shape[-1]
    low, high = dwt1(v)
    v_zeros = idwt1(low, np.zeros_like(high), length)
    if rng is None:
        rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    g = rng.normal(0.0, noise_scale, size=high.shape)
    v_rand = idwt1(low, g, length)
    return v, v_zeros, v_rand


# --- golden conformance vectors -------------------------------------------
#
# The golden file pins the transform bit-for-bit so independent
# implementations can check against it.  Layout: 256 little-endian float64
# values, in order
#
#   [0:64)    the 8x8 input grid, row-major
#   [64:80)   ll   [80:96)   lh   [96:112)  hl   [112:128) hh
#   [128:192) reconstruction idwt2(all bands), row-major 8x8
#   [192:256) zero-high-band reconstruction, row-major 8x8
#
# (2048 bytes total, no header).

GOLDEN_GRID_SIZE = 8
_GOLDEN_VALUE_COUNT = 256


def packaged_golden_path() -> str:
    """Path of the golden file shipped inside the package."""
    import os

    return os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "dwt_golden8.bin")


def golden_grid() -> np.ndarray:
    """Fixed 8x8 integer-valued test grid (Philox stream, key 2024)."""
    rng = np.random.Generator(np.random.Philox(key=np.uint64(2024)))
    return rng.integers(0, 16, size=(GOLDEN_GRID_SIZE, GOLDEN_GRID_SIZE)).astype(np.float64)


def golden_payload(grid=None) -> np.ndarray:
    """Concatenated golden vectors for ``grid`` (default: builtin grid)."""
    grid = golden_grid() if grid is None else _as_grid(grid)
    if grid.shape != (GOLDEN_GRID_SIZE, GOLDEN_GRID_SIZE):
        raise ShapeError(f"golden grid must be 8x8, got {grid.shape}")
    bands = dwt2(grid)
    recon = idwt2(bands)
    zero = np.zeros_like(bands.ll)
    recon_zeros = idwt2(SubBands(bands.ll, zero, zero, zero))
    return np.concatenate(
        [
            grid.ravel(),
            bands.ll.ravel(),
            bands.lh.ravel(),
            bands.hl.ravel(),
            bands.hh.ravel(),
            recon.ravel(),
            recon_zeros.ravel(),
        ]
    )


def write_golden(path, grid=None) -> None:
    payload = golden_payload(grid)
    with open(path, "wb") as fh:
        fh.write(payload.astype("<f8").tobytes())


def read_golden(path) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) != 8 * _GOLDEN_VALUE_COUNT:
        raise FormatError(
            f"golden file holds {len(raw)} bytes, expected {8 * _GOLDEN_VALUE_COUNT}",
            offset=min(len(raw), 8 * _GOLDEN_VALUE_COUNT),
        )
    return np.frombuffer(raw, dtype="<f8")
