#!/usr/bin/env python3
"""Regenerate the packaged wavelet conformance vectors.

Writes src/kladapt/data/dwt_golden8.bin (2048 bytes: 256 little-endian
float64 values -- grid, four sub-bands, both reconstructions).  The file
is committed; other implementations check their transform against it.
"""

import os
import sys

from kladapt.wavelet import golden_payload, write_golden

OUT = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    "src",
    "kladapt",
    "data",
    "dwt_golden8.bin",
)


def main() -> int:
    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    write_golden(OUT)
    payload = golden_payload()
    print(f"wrote {OUT} ({os.path.getsize(OUT)} bytes)")
    print(f"grid row 0: {payload[:8].tolist()}")
    print(f"ll row 0:   {payload[64:68].tolist()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
