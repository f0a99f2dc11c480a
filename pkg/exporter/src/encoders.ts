/** Pluggable encoders, selected by identifier string.
 *
 * This build ships deterministic synthetic encoders — a seeded random
 * projection of pooled pixels for vision and a seeded unit vector per
 * prompt for text — so the whole export pipeline is reproducible and
 * testable offline. Real backbone identifiers (e.g. "vit-b16",
 * "clip-vit-b32") are recognized as such but fatal here: swapping them in
 * means registering a new factory, not changing any call sites.
 */

import { EncoderError } from "./errors.js";
import { poolGrid } from "./image.js";
import { Rng } from "./prng.js";
import { Grid } from "./wavelet.js";

export interface VisionEncoder {
  readonly id: string;
  readonly dim: number;
  encodeGrid(grid: Grid): Float64Array;
}

export interface TextEncoder {
  readonly id: string;
  readonly dim: number;
  encodePrompt(prompt: string): Float64Array;
}

const POOL_SIZE = 16; // synthetic vision encoders see a 16x16 block-mean image

function normalize(vec: Float64Array): Float64Array {
  let sq = 0;
  for (let i = 0; i < vec.length; i++) sq += vec[i] * vec[i];
  const norm = Math.sqrt(sq);
  if (norm > 0) {
    for (let i = 0; i < vec.length; i++) vec[i] /= norm;
  }
  return vec;
}

function parseSyntheticDim(id: string, prefix: string): number | null {
  if (!id.startsWith(prefix + ":")) return null;
  const dim = Number(id.slice(prefix.length + 1));
  if (!Number.isInteger(dim) || dim < 1) {
    throw new EncoderError(`bad feature dimension in encoder id "${id}"`);
  }
  return dim;
}

class SyntheticVisionEncoder implements VisionEncoder {
  readonly id: string;
  readonly dim: number;
  private readonly projection: Float64Array; // dim x POOL_SIZE^2, row-major

  constructor(id: string, dim: number, seed: number) {
    this.id = id;
    this.dim = dim;
    const rng = new Rng("vision-encoder", id, seed);
    this.projection = rng.normals(dim * POOL_SIZE * POOL_SIZE);
  }

  encodeGrid(grid: Grid): Float64Array {
    const pooled = poolGrid(grid, POOL_SIZE);
    const out = new Float64Array(this.dim);
    const inputs = POOL_SIZE * POOL_SIZE;
    for (let d = 0; d < this.dim; d++) {
      let acc = 0;
      const base = d * inputs;
      for (let i = 0; i < inputs; i++) acc += this.projection[base + i] * pooled[i];
      out[d] = acc;
    }
    return normalize(out);
  }
}

class SyntheticTextEncoder implements TextEncoder {
  readonly id: string;
  readonly dim: number;
  private readonly seed: number;

  constructor(id: string, dim: number, seed: number) {
    this.id = id;
    this.dim = dim;
    this.seed = seed;
  }

  encodePrompt(prompt: string): Float64Array {
    const rng = new Rng("text-encoder", this.id, this.seed, prompt);
    return normalize(rng.normals(this.dim));
  }
}

export function createVisionEncoder(id: string, seed: number): VisionEncoder {
  const dim = parseSyntheticDim(id, "synthetic");
  if (dim !== null) return new SyntheticVisionEncoder(id, dim, seed);
  throw new EncoderError(
    `vision encoder "${id}" is not available in this build (only synthetic:<dim>)`,
  );
}

export function createTextEncoder(id: string, seed: number): TextEncoder {
  const dim = parseSyntheticDim(id, "synthetic-text");
  if (dim !== null) return new SyntheticTextEncoder(id, dim, seed);
  throw new EncoderError(
    `text encoder "${id}" is not available in this build (only synthetic-text:<dim>)`,
  );
}
