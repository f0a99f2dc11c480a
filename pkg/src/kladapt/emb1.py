"""EMB1 embedding files: a minimal binary container for feature vectors.

Layout (all integers little-endian):

    offset  size  field
    0       4     magic "EMB1"
    4       2     u16 version (currently 1)
    6       2     u16 flags: bit0 = labels appended, bit1 = triple layout
    8       4     u32 count  (number of samples, >= 1)
    12      4     u32 dim    (vector length, >= 1)
    16      ...   count * dim float32 row-major   (flat layout)
                  count * 3 * dim float32         (triple layout)
    ...     ...   count * int32 labels            (only if bit0 set)

The triple layout stores three aligned variants per sample (original plus
two frequency-domain augmentations), so the payload is (count, 3, dim).
Values are float32 on disk; readers hand back float64 for computation.

Every successful read can append one entry to an audit list, which the
pipeline uses to prove which files a run actually touched.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import FormatError, InvalidParameterError, ShapeError

MAGIC = b"EMB1"
VERSION = 1
FLAG_LABELS = 1
FLAG_TRIPLE = 2
_KNOWN_FLAGS = FLAG_LABELS | FLAG_TRIPLE
HEADER_BYTES = 16


@dataclass
class Emb1File:
    """Decoded contents: float64 features, optional int64 labels."""

    features: np.ndarray
    labels: Optional[np.ndarray] = None

    @property
    def triple(self) -> bool:
        return self.features.ndim == 3

    @property
    def count(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[-1]


def audit_entry(path, header: dict) -> dict:
    return {
        "path": str(path),
        "count": header["count"],
        "dim": header["dim"],
        "labeled": header["labeled"],
        "triple": header["triple"],
    }


def _parse_header(raw: bytes) -> dict:
    if len(raw) < HEADER_BYTES:
        raise FormatError(
            f"file too short for header ({len(raw)} bytes)", offset=len(raw)
        )
    if raw[:4] != MAGIC:
        raise FormatError(f"bad magic {raw[:4]!r}, expected {MAGIC!r}", offset=0)
    version, flags, count, dim = struct.unpack_from("<HHII", raw, 4)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    if flags & ~_KNOWN_FLAGS:
        raise FormatError(f"reserved flag bits set in {flags:#06x}", offset=6)
    if count == 0:
        raise FormatError("count must be >= 1", offset=8)
    if dim == 0:
        raise FormatError("dim must be >= 1", offset=12)
    labeled = bool(flags & FLAG_LABELS)
    triple = bool(flags & FLAG_TRIPLE)
    per_sample = 3 * dim if triple else dim
    expected = HEADER_BYTES + 4 * count * per_sample + (4 * count if labeled else 0)
    return {
        "version": version,
        "flags": flags,
        "count": count,
        "dim": dim,
        "labeled": labeled,
        "triple": triple,
        "payload_bytes": 4 * count * per_sample,
        "expected_bytes": expected,
    }


def peek_emb1(path) -> dict:
    """Header fields plus the on-disk size check, without loading the payload."""
    with open(path, "rb") as fh:
        raw = fh.read()
    header = _parse_header(raw)
    if len(raw) != header["expected_bytes"]:
        raise FormatError(
            f"file is {len(raw)} bytes, header implies {header['expected_bytes']}",
            offset=min(len(raw), header["expected_bytes"]),
        )
    return header


def read_emb1(path, audit: Optional[List[dict]] = None) -> Emb1File:
    with open(path, "rb") as fh:
        raw = fh.read()
    header = _parse_header(raw)
    if len(raw) != header["expected_bytes"]:
        raise FormatError(
            f"file is {len(raw)} bytes, header implies {header['expected_bytes']}",
            offset=min(len(raw), header["expected_bytes"]),
        )
    count, dim, triple = header["count"], header["dim"], header["triple"]
    per_sample = 3 * dim if triple else dim
    flat = np.frombuffer(raw, dtype="<f4", count=count * per_sample, offset=HEADER_BYTES)
    bad = np.flatnonzero(~np.isfinite(flat))
    if bad.size:
        raise FormatError(
            "non-finite value in payload", offset=HEADER_BYTES + 4 * int(bad[0])
        )
    shape = (count, 3, dim) if triple else (count, dim)
    features = flat.astype(np.float64).reshape(shape)
    labels = None
    if header["labeled"]:
        labels = np.frombuffer(
            raw,
            dtype="<i4",
            count=count,
            offset=HEADER_BYTES + header["payload_bytes"],
        ).astype(np.int64)
    if audit is not None:
        audit.append(audit_entry(path, header))
    return Emb1File(features=features, labels=labels)


def write_emb1(path, features: np.ndarray, labels: Optional[np.ndarray] = None) -> int:
    """Write features (n, d) or (n, 3, d) as float32; returns bytes written."""
    features = np.asarray(features)
    if features.ndim == 3:
        if features.shape[1] != 3:
            raise ShapeError(
                f"triple layout needs (n, 3, d), got {features.shape}"
            )
        triple = True
    elif features.ndim == 2:
        triple = False
    else:
        raise ShapeError(f"features must be 2-D or 3-D, got shape {features.shape}")
    n, d = features.shape[0], features.shape[-1]
    if n == 0 or d == 0:
        raise InvalidParameterError(f"refusing to write empty file, shape {features.shape}")
    if not np.all(np.isfinite(features)):
        raise InvalidParameterError("features contain non-finite values")
    flags = 0
    if triple:
        flags |= FLAG_TRIPLE
    payload = features.astype("<f4").tobytes()
    tail = b""
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != (n,):
            raise ShapeError(f"labels shape {labels.shape} does not match {n} samples")
        flags |= FLAG_LABELS
        tail = labels.astype("<i4").tobytes()
    blob = MAGIC + struct.pack("<HHII", VERSION, flags, n, d) + payload + tail
    with open(path, "wb") as fh:
        fh.write(blob)
    return len(blob)
