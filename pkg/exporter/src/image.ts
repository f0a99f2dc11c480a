/** Binary netpbm readers (PGM "P5", PPM "P6") and block-average pooling.
 *
 * Pixels come back as a float grid scaled to [0, 1]; color images are
 * converted to luma (0.299 R + 0.587 G + 0.114 B). Both 8-bit and 16-bit
 * (big-endian, per the netpbm spec) sample sizes are supported.
 */

import { readFileSync } from "fs";

import { ImageError } from "./errors.js";
import { Grid, makeGrid } from "./wavelet.js";

interface Header {
  magic: "P5" | "P6";
  width: number;
  height: number;
  maxval: number;
  dataOffset: number;
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d || byte === 0x0b || byte === 0x0c;
}

function parseHeader(buffer: Buffer, path: string): Header {
  const magic = buffer.toString("ascii", 0, 2);
  if (magic !== "P5" && magic !== "P6") {
    throw new ImageError(`${path}: not a binary PGM/PPM file (magic ${JSON.stringify(magic)})`);
  }
  let pos = 2;
  const fields: number[] = [];
  while (fields.length < 3) {
    while (pos < buffer.length && isSpace(buffer[pos])) pos++;
    if (pos < buffer.length && buffer[pos] === 0x23) { // '#' comment to end of line
      while (pos < buffer.length && buffer[pos] !== 0x0a) pos++;
      continue;
    }
    let start = pos;
    while (pos < buffer.length && !isSpace(buffer[pos]) && buffer[pos] !== 0x23) pos++;
    if (pos === start) throw new ImageError(`${path}: truncated header`);
    const token = buffer.toString("ascii", start, pos);
    const value = Number(token);
    if (!Number.isInteger(value) || value < 0) {
      throw new ImageError(`${path}: bad header token ${JSON.stringify(token)}`);
    }
    fields.push(value);
  }
  if (pos >= buffer.length || !isSpace(buffer[pos])) {
    throw new ImageError(`${path}: missing whitespace after maxval`);
  }
  pos++; // exactly one whitespace byte separates header and raster
  const [width, height, maxval] = fields;
  if (width < 1 || height < 1) throw new ImageError(`${path}: empty image ${width}x${height}`);
  if (maxval < 1 || maxval > 65535) throw new ImageError(`${path}: maxval ${maxval} out of range`);
  return { magic, width, height, maxval, dataOffset: pos };
}

/** Decode a P5/P6 buffer into a [0, 1] grayscale grid. */
export function decodePnm(buffer: Buffer, path = "<buffer>"): Grid {
  const header = parseHeader(buffer, path);
  const { magic, width, height, maxval, dataOffset } = header;
  const channels = magic === "P6" ? 3 : 1;
  const bytesPerSample = maxval > 255 ? 2 : 1;
  const expected = dataOffset + width * height * channels * bytesPerSample;
  if (buffer.length < expected) {
    throw new ImageError(
      `${path}: raster truncated (${buffer.length} bytes, header implies ${expected})`,
    );
  }
  const grid = makeGrid(height, width);
  let pos = dataOffset;
  const readSample = (): number => {
    const value = bytesPerSample === 2 ? buffer.readUInt16BE(pos) : buffer[pos];
    pos += bytesPerSample;
    return value / maxval;
  };
  for (let i = 0; i < width * height; i++) {
    if (channels === 1) {
      grid.data[i] = readSample();
    } else {
      const r = readSample();
      const g = readSample();
      const b = readSample();
      grid.data[i] = 0.299 * r + 0.587 * g + 0.114 * b;
    }
  }
  return grid;
}

export function readPnm(path: string): Grid {
  let buffer: Buffer;
  try {
    buffer = readFileSync(path);
  } catch (err) {
    throw new ImageError(`${path}: ${(err as Error).message}`);
  }
  return decodePnm(buffer, path);
}

/** Encode a [0, 1] grid as an 8-bit binary PGM (useful for tests/demos). */
export function encodePgm(grid: Grid): Buffer {
  const header = Buffer.from(`P5\n${grid.cols} ${grid.rows}\n255\n`, "ascii");
  const raster = Buffer.alloc(grid.rows * grid.cols);
  for (let i = 0; i < grid.data.length; i++) {
    raster[i] = Math.max(0, Math.min(255, Math.round(grid.data[i] * 255)));
  }
  return Buffer.concat([header, raster]);
}

/** Average-pool a grid to size x size using contiguous integer blocks. */
export function poolGrid(grid: Grid, size: number): Float64Array {
  if (size < 1) throw new ImageError(`pool size must be >= 1, got ${size}`);
  const out = new Float64Array(size * size);
  for (let br = 0; br < size; br++) {
    const r0 = Math.floor((br * grid.rows) / size);
    const r1 = Math.max(r0 + 1, Math.floor(((br + 1) * grid.rows) / size));
    for (let bc = 0; bc < size; bc++) {
      const c0 = Math.floor((bc * grid.cols) / size);
      const c1 = Math.max(c0 + 1, Math.floor(((bc + 1) * grid.cols) / size));
      let sum = 0;
      for (let r = Math.min(r0, grid.rows - 1); r < Math.min(r1, grid.rows); r++) {
        for (let c = Math.min(c0, grid.cols - 1); c < Math.min(c1, grid.cols); c++) {
          sum += grid.data[r * grid.cols + c];
        }
      }
      const area =
        (Math.min(r1, grid.rows) - Math.min(r0, grid.rows - 1)) *
        (Math.min(c1, grid.cols) - Math.min(c0, grid.cols - 1));
      out[br * size + bc] = sum / Math.max(area, 1);
    }
  }
  return out;
}
