/** EMB1 embedding files: the binary contract with the adaptation engine.
 *
 * Layout (little-endian): magic "EMB1", u16 version (1), u16 flags
 * (bit 0 = int32 labels appended, bit 1 = rows are (3, dim) triples),
 * u32 count >= 1, u32 dim >= 1, then count*dim (or count*3*dim) float32
 * values and, if flagged, count int32 labels. No other flag bits exist;
 * the engine rejects reserved bits, so score tables are distinguished by
 * file naming, not flags.
 */

import { readFileSync, writeFileSync } from "fs";

import { FormatError } from "./errors.js";

export const MAGIC = "EMB1";
export const VERSION = 1;
export const FLAG_LABELS = 1;
export const FLAG_TRIPLE = 2;
export const HEADER_BYTES = 16;
const KNOWN_FLAGS = FLAG_LABELS | FLAG_TRIPLE;

export interface Emb1Data {
  /** Row-major float values, count*dim (flat) or count*3*dim (triple). */
  features: Float64Array;
  count: number;
  dim: number;
  triple: boolean;
  labels?: Int32Array;
}

export function encodeEmb1(data: Emb1Data): Buffer {
  const { features, count, dim, triple, labels } = data;
  if (count < 1) throw new FormatError(`count must be >= 1, got ${count}`);
  if (dim < 1) throw new FormatError(`dim must be >= 1, got ${dim}`);
  const perSample = triple ? 3 * dim : dim;
  if (features.length !== count * perSample) {
    throw new FormatError(
      `features hold ${features.length} values, expected ${count * perSample}`,
    );
  }
  if (labels !== undefined && labels.length !== count) {
    throw new FormatError(`labels hold ${labels.length} values, expected ${count}`);
  }
  for (let i = 0; i < features.length; i++) {
    if (!Number.isFinite(features[i])) {
      throw new FormatError(`non-finite feature value at flat index ${i}`);
    }
  }
  const flags = (labels !== undefined ? FLAG_LABELS : 0) | (triple ? FLAG_TRIPLE : 0);
  const buffer = Buffer.alloc(
    HEADER_BYTES + 4 * features.length + (labels !== undefined ? 4 * count : 0),
  );
  buffer.write(MAGIC, 0, "ascii");
  buffer.writeUInt16LE(VERSION, 4);
  buffer.writeUInt16LE(flags, 6);
  buffer.writeUInt32LE(count, 8);
  buffer.writeUInt32LE(dim, 12);
  let offset = HEADER_BYTES;
  for (let i = 0; i < features.length; i++, offset += 4) {
    buffer.writeFloatLE(Math.fround(features[i]), offset);
  }
  if (labels !== undefined) {
    for (let i = 0; i < count; i++, offset += 4) {
      buffer.writeInt32LE(labels[i], offset);
    }
  }
  return buffer;
}

export function writeEmb1(path: string, data: Emb1Data): number {
  const buffer = encodeEmb1(data);
  writeFileSync(path, buffer);
  return buffer.length;
}

export function decodeEmb1(buffer: Buffer): Emb1Data {
  if (buffer.length < HEADER_BYTES) {
    throw new FormatError(`file too short for header (${buffer.length} bytes)`, buffer.length);
  }
  if (buffer.toString("ascii", 0, 4) !== MAGIC) {
    throw new FormatError(`bad magic, expected "${MAGIC}"`, 0);
  }
  const version = buffer.readUInt16LE(4);
  if (version !== VERSION) throw new FormatError(`unsupported version ${version}`, 4);
  const flags = buffer.readUInt16LE(6);
  if (flags & ~KNOWN_FLAGS) {
    throw new FormatError(`reserved flag bits set in 0x${flags.toString(16)}`, 6);
  }
  const count = buffer.readUInt32LE(8);
  if (count === 0) throw new FormatError("count must be >= 1", 8);
  const dim = buffer.readUInt32LE(12);
  if (dim === 0) throw new FormatError("dim must be >= 1", 12);
  const triple = (flags & FLAG_TRIPLE) !== 0;
  const labeled = (flags & FLAG_LABELS) !== 0;
  const valueCount = count * (triple ? 3 * dim : dim);
  const expected = HEADER_BYTES + 4 * valueCount + (labeled ? 4 * count : 0);
  if (buffer.length !== expected) {
    throw new FormatError(
      `file is ${buffer.length} bytes, header implies ${expected}`,
      Math.min(buffer.length, expected),
    );
  }
  const features = new Float64Array(valueCount);
  for (let i = 0; i < valueCount; i++) {
    const value = buffer.readFloatLE(HEADER_BYTES + 4 * i);
    if (!Number.isFinite(value)) {
      throw new FormatError("non-finite value in payload", HEADER_BYTES + 4 * i);
    }
    features[i] = value;
  }
  let labels: Int32Array | undefined;
  if (labeled) {
    labels = new Int32Array(count);
    const base = HEADER_BYTES + 4 * valueCount;
    for (let i = 0; i < count; i++) labels[i] = buffer.readInt32LE(base + 4 * i);
  }
  return { features, count, dim, triple, labels };
}

export function readEmb1(path: string): Emb1Data {
  return decodeEmb1(readFileSync(path));
}
