/** One-level 2-D Haar analysis/synthesis and the high-band augmentation.
 *
 * Same convention as the adaptation engine's golden vectors: on a 2x2 block
 * [a b; c d] with s1 = a+b, s2 = c+d, d1 = a-b, d2 = c-d,
 *
 *     ll = (s1 + s2) / 2    lh = (d1 + d2) / 2
 *     hl = (s1 - s2) / 2    hh = (d1 - d2) / 2
 *
 * Band names are <vertical filter><horizontal filter>. The pairwise grouping
 * keeps constant grids bit-exact through analysis + synthesis, so zeroing the
 * detail bands of a constant image is an exact no-op. Odd sizes are
 * edge-replicated by one row/column and cropped back on synthesis.
 */

import { FormatError } from "./errors.js";
import { Rng } from "./prng.js";

export interface Grid {
  rows: number;
  cols: number;
  data: Float64Array; // row-major, rows*cols
}

export interface SubBands {
  ll: Grid;
  lh: Grid;
  hl: Grid;
  hh: Grid;
  pad: [number, number];
}

export function makeGrid(rows: number, cols: number, data?: Float64Array): Grid {
  if (rows < 1 || cols < 1) {
    throw new FormatError(`grid must be at least 1x1, got ${rows}x${cols}`);
  }
  if (data !== undefined && data.length !== rows * cols) {
    throw new FormatError(`grid data has ${data.length} values, expected ${rows * cols}`);
  }
  return { rows, cols, data: data ?? new Float64Array(rows * cols) };
}

export function gridFrom2d(values: number[][]): Grid {
  const rows = values.length;
  const cols = rows > 0 ? values[0].length : 0;
  const grid = makeGrid(rows, cols);
  for (let r = 0; r < rows; r++) {
    if (values[r].length !== cols) {
      throw new FormatError(`ragged grid: row ${r} has ${values[r].length} values`);
    }
    grid.data.set(values[r], r * cols);
  }
  return grid;
}

function padToEven(grid: Grid): { padded: Grid; pad: [number, number] } {
  const padH = grid.rows % 2;
  const padW = grid.cols % 2;
  if (!padH && !padW) return { padded: grid, pad: [0, 0] };
  const rows = grid.rows + padH;
  const cols = grid.cols + padW;
  const out = makeGrid(rows, cols);
  for (let r = 0; r < rows; r++) {
    const srcR = Math.min(r, grid.rows - 1);
    for (let c = 0; c < cols; c++) {
      const srcC = Math.min(c, grid.cols - 1);
      out.data[r * cols + c] = grid.data[srcR * grid.cols + srcC];
    }
  }
  return { padded: out, pad: [padH, padW] };
}

export function dwt2(grid: Grid): SubBands {
  const { padded, pad } = padToEven(grid);
  const halfR = padded.rows / 2;
  const halfC = padded.cols / 2;
  const ll = makeGrid(halfR, halfC);
  const lh = makeGrid(halfR, halfC);
  const hl = makeGrid(halfR, halfC);
  const hh = makeGrid(halfR, halfC);
  for (let r = 0; r < halfR; r++) {
    for (let c = 0; c < halfC; c++) {
      const a = padded.data[2 * r * padded.cols + 2 * c];
      const b = padded.data[2 * r * padded.cols + 2 * c + 1];
      const cc = padded.data[(2 * r + 1) * padded.cols + 2 * c];
      const d = padded.data[(2 * r + 1) * padded.cols + 2 * c + 1];
      const s1 = a + b;
      const s2 = cc + d;
      const d1 = a - b;
      const d2 = cc - d;
      const i = r * halfC + c;
      ll.data[i] = (s1 + s2) * 0.5;
      lh.data[i] = (d1 + d2) * 0.5;
      hl.data[i] = (s1 - s2) * 0.5;
      hh.data[i] = (d1 - d2) * 0.5;
    }
  }
  return { ll, lh, hl, hh, pad };
}

export function idwt2(bands: SubBands): Grid {
  const { ll, lh, hl, hh, pad } = bands;
  for (const [name, band] of [["lh", lh], ["hl", hl], ["hh", hh]] as const) {
    if (band.rows !== ll.rows || band.cols !== ll.cols) {
      throw new FormatError(
        `band ${name} is ${band.rows}x${band.cols}, ll is ${ll.rows}x${ll.cols}`,
      );
    }
  }
  const fullR = 2 * ll.rows;
  const fullC = 2 * ll.cols;
  const full = makeGrid(fullR, fullC);
  for (let r = 0; r < ll.rows; r++) {
    for (let c = 0; c < ll.cols; c++) {
      const i = r * ll.cols + c;
      const s1 = ll.data[i] + hl.data[i];
      const s2 = ll.data[i] - hl.data[i];
      const d1 = lh.data[i] + hh.data[i];
      const d2 = lh.data[i] - hh.data[i];
      full.data[2 * r * fullC + 2 * c] = (s1 + d1) * 0.5;
      full.data[2 * r * fullC + 2 * c + 1] = (s1 - d1) * 0.5;
      full.data[(2 * r + 1) * fullC + 2 * c] = (s2 + d2) * 0.5;
      full.data[(2 * r + 1) * fullC + 2 * c + 1] = (s2 - d2) * 0.5;
    }
  }
  const [padH, padW] = pad;
  if (!padH && !padW) return full;
  const rows = fullR - padH;
  const cols = fullC - padW;
  const cropped = makeGrid(rows, cols);
  for (let r = 0; r < rows; r++) {
    cropped.data.set(full.data.subarray(r * fullC, r * fullC + cols), r * cols);
  }
  return cropped;
}

/** (x, x_zeros, x_rand): original, detail bands zeroed, detail bands noised. */
export function augmentTriple(grid: Grid, rng: Rng, noiseScale = 1.0): [Grid, Grid, Grid] {
  const bands = dwt2(grid);
  const zero = makeGrid(bands.ll.rows, bands.ll.cols);
  const xZeros = idwt2({ ll: bands.ll, lh: zero, hl: zero, hh: zero, pad: bands.pad });
  const noisy = (): Grid => {
    const band = makeGrid(bands.ll.rows, bands.ll.cols);
    for (let i = 0; i < band.data.length; i++) band.data[i] = noiseScale * rng.normal();
    return band;
  };
  const xRand = idwt2({ ll: bands.ll, lh: noisy(), hl: noisy(), hh: noisy(), pad: bands.pad });
  return [grid, xZeros, xRand];
}

export const GOLDEN_GRID_SIZE = 8;
export const GOLDEN_VALUE_COUNT = 256;

/** Recompute the 256-value golden layout from its leading 8x8 grid:
 * grid (64), ll/lh/hl/hh (16 each), reconstruction (64), detail-zeroed
 * reconstruction (64). Matching a shipped golden file within tolerance
 * proves this transform agrees with the one that produced it.
 */
export function goldenPayloadFromGrid(grid: Grid): Float64Array {
  if (grid.rows !== GOLDEN_GRID_SIZE || grid.cols !== GOLDEN_GRID_SIZE) {
    throw new FormatError(`golden grid must be 8x8, got ${grid.rows}x${grid.cols}`);
  }
  const bands = dwt2(grid);
  const recon = idwt2(bands);
  const zero = makeGrid(bands.ll.rows, bands.ll.cols);
  const reconZeros = idwt2({ ll: bands.ll, lh: zero, hl: zero, hh: zero, pad: bands.pad });
  const out = new Float64Array(GOLDEN_VALUE_COUNT);
  let offset = 0;
  for (const part of [grid, bands.ll, bands.lh, bands.hl, bands.hh, recon, reconZeros]) {
    out.set(part.data, offset);
    offset += part.data.length;
  }
  return out;
}

/** Decode a 2048-byte little-endian f64 golden file. */
export function parseGoldenFile(buffer: Buffer): Float64Array {
  if (buffer.length !== 8 * GOLDEN_VALUE_COUNT) {
    throw new FormatError(
      `golden file must be ${8 * GOLDEN_VALUE_COUNT} bytes, got ${buffer.length}`,
      buffer.length,
    );
  }
  const values = new Float64Array(GOLDEN_VALUE_COUNT);
  for (let i = 0; i < GOLDEN_VALUE_COUNT; i++) values[i] = buffer.readDoubleLE(8 * i);
  return values;
}

/** Largest absolute deviation between a golden file's stored values and the
 * values this implementation derives from the file's own grid. */
export function goldenDeviation(values: Float64Array): number {
  const grid = makeGrid(GOLDEN_GRID_SIZE, GOLDEN_GRID_SIZE, values.slice(0, 64));
  const expected = goldenPayloadFromGrid(grid);
  let worst = 0;
  for (let i = 0; i < GOLDEN_VALUE_COUNT; i++) {
    worst = Math.max(worst, Math.abs(values[i] - expected[i]));
  }
  return worst;
}
