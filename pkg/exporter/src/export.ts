/** The two export operations: vision embeddings and zero-shot score tables.
 *
 * Both walk the manifest's sample list task by task, decode each image,
 * and write one EMB1 file per task. Unreadable images are skipped with a
 * warning (and skipped identically by both operations, so score rows stay
 * aligned with embedding rows); a missing encoder is fatal before any file
 * is touched.
 */

import { mkdirSync } from "fs";
import { join } from "path";

import { createTextEncoder, createVisionEncoder } from "./encoders.js";
import { FormatError } from "./errors.js";
import { ManifestError } from "./errors.js";
import { ImageError } from "./errors.js";
import { writeEmb1 } from "./emb1.js";
import { readPnm } from "./image.js";
import { allClassIds, ExportManifest, ExportSample, validateManifest } from "./manifest.js";
import { scoreRow } from "./scores.js";
import { augmentTriple, Grid } from "./wavelet.js";
import { Rng } from "./prng.js";

export type WarnFn = (message: string) => void;

export interface TaskFileReport {
  taskId: number;
  path: string;
  count: number;
  skipped: string[];
}

export interface VisionExportOptions {
  /** Write (count, 3, dim) triples of {x, x_zeros, x_rand}; default true. */
  augment?: boolean;
  /** Append int32 class labels; default true (turn off for target files). */
  labels?: boolean;
  noiseScale?: number;
  filePrefix?: string;
  warn?: WarnFn;
}

function taskSamples(manifest: ExportManifest, classIds: number[]): ExportSample[] {
  const members = new Set(classIds);
  return manifest.samples.filter((sample) => members.has(sample.classId));
}

function decodeOrSkip(
  sample: ExportSample,
  skipped: string[],
  warn: WarnFn,
): Grid | null {
  try {
    return readPnm(sample.path);
  } catch (err) {
    if (err instanceof ImageError) {
      warn(`skipping unreadable image: ${err.message}`);
      skipped.push(sample.path);
      return null;
    }
    throw err;
  }
}

export function exportVisionEmbeddings(
  manifest: ExportManifest,
  outDir: string,
  options: VisionExportOptions = {},
): TaskFileReport[] {
  validateManifest(manifest);
  const augment = options.augment ?? true;
  const labels = options.labels ?? true;
  const noiseScale = options.noiseScale ?? 1.0;
  const prefix = options.filePrefix ?? "vision";
  const warn = options.warn ?? ((message) => console.warn(message));
  const encoder = createVisionEncoder(manifest.visionEncoder, manifest.seed);
  mkdirSync(outDir, { recursive: true });

  const reports: TaskFileReport[] = [];
  for (const task of manifest.tasks) {
    const samples = taskSamples(manifest, task.classIds);
    const rng = new Rng("augment", manifest.seed, task.taskId);
    const rows: Float64Array[] = [];
    const rowLabels: number[] = [];
    const skipped: string[] = [];
    for (const sample of samples) {
      const grid = decodeOrSkip(sample, skipped, warn);
      if (grid === null) continue;
      if (augment) {
        const variants = augmentTriple(grid, rng, noiseScale);
        const row = new Float64Array(3 * encoder.dim);
        variants.forEach((variant, v) => {
          row.set(encoder.encodeGrid(variant), v * encoder.dim);
        });
        rows.push(row);
      } else {
        rows.push(encoder.encodeGrid(grid));
      }
      rowLabels.push(sample.classId);
    }
    if (rows.length === 0) {
      throw new FormatError(`task ${task.taskId} has no readable samples`);
    }
    const features = new Float64Array(rows.length * rows[0].length);
    rows.forEach((row, i) => features.set(row, i * rows[0].length));
    const path = join(outDir, `${prefix}_task${task.taskId}.emb1`);
    writeEmb1(path, {
      features,
      count: rows.length,
      dim: encoder.dim,
      triple: augment,
      labels: labels ? Int32Array.from(rowLabels) : undefined,
    });
    reports.push({ taskId: task.taskId, path, count: rows.length, skipped });
  }
  return reports;
}

export interface ScoreExportOptions {
  tau?: number;
  filePrefix?: string;
  warn?: WarnFn;
}

export function exportVlmScores(
  manifest: ExportManifest,
  prompts: string[],
  outDir: string,
  options: ScoreExportOptions = {},
): TaskFileReport[] {
  validateManifest(manifest);
  if (prompts.length === 0) {
    throw new ManifestError("class prompt list is empty");
  }
  const classIds = allClassIds(manifest);
  if (prompts.length !== classIds.length) {
    throw new ManifestError(
      `${prompts.length} prompts for ${classIds.length} classes; ` +
        "provide one prompt per class in ascending class-id order",
    );
  }
  const tau = options.tau ?? 1.0;
  const prefix = options.filePrefix ?? "scores";
  const warn = options.warn ?? ((message) => console.warn(message));
  const vision = createVisionEncoder(manifest.visionEncoder, manifest.seed);
  const text = createTextEncoder(manifest.textEncoder, manifest.seed);
  const promptVecByClass = new Map<number, Float64Array>();
  classIds.forEach((classId, i) => {
    promptVecByClass.set(classId, text.encodePrompt(prompts[i]));
  });
  mkdirSync(outDir, { recursive: true });

  const reports: TaskFileReport[] = [];
  for (const task of manifest.tasks) {
    const columns = [...task.classIds].sort((a, b) => a - b);
    const promptVecs = columns.map((classId) => promptVecByClass.get(classId)!);
    const samples = taskSamples(manifest, task.classIds);
    const rows: Float64Array[] = [];
    const skipped: string[] = [];
    for (const sample of samples) {
      const grid = decodeOrSkip(sample, skipped, warn);
      if (grid === null) continue;
      rows.push(scoreRow(vision.encodeGrid(grid), promptVecs, tau));
    }
    if (rows.length === 0) {
      throw new FormatError(`task ${task.taskId} has no readable samples`);
    }
    const features = new Float64Array(rows.length * columns.length);
    rows.forEach((row, i) => features.set(row, i * columns.length));
    const path = join(outDir, `${prefix}_task${task.taskId}.emb1`);
    writeEmb1(path, {
      features,
      count: rows.length,
      dim: columns.length,
      triple: false,
    });
    reports.push({ taskId: task.taskId, path, count: rows.length, skipped });
  }
  return reports;
}
