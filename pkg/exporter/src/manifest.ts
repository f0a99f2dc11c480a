/** Export manifests (what to encode) and stream manifests (what was written).
 *
 * Both are flat text. An export manifest describes a dataset: encoder ids,
 * seed, the task partition of the class space, and one line per sample.
 * A stream manifest is the index the adaptation engine consumes; this module
 * writes it in that engine's exact format.
 */

import { readFileSync, writeFileSync } from "fs";

import { ManifestError } from "./errors.js";

export interface ExportTask {
  taskId: number;
  classIds: number[];
}

export interface ExportSample {
  classId: number;
  path: string;
}

export interface ExportManifest {
  dataset: string;
  domain: string;
  visionEncoder: string;
  textEncoder: string;
  preprocess: string;
  seed: number;
  tasks: ExportTask[];
  samples: ExportSample[];
}

export function validateManifest(manifest: ExportManifest): void {
  if (manifest.tasks.length === 0) throw new ManifestError("manifest defines no tasks");
  const seen = new Map<number, number>();
  manifest.tasks.forEach((task, index) => {
    if (task.taskId !== index) {
      throw new ManifestError(`task ids must be 0..${manifest.tasks.length - 1} in order`);
    }
    if (task.classIds.length === 0) {
      throw new ManifestError(`task ${task.taskId} has no classes`);
    }
    for (const classId of task.classIds) {
      if (seen.has(classId)) {
        throw new ManifestError(
          `class ${classId} appears in tasks ${seen.get(classId)} and ${task.taskId}; ` +
            "the partition must be disjoint",
        );
      }
      seen.set(classId, task.taskId);
    }
  });
  for (const sample of manifest.samples) {
    if (!seen.has(sample.classId)) {
      throw new ManifestError(
        `sample ${sample.path} has class ${sample.classId}, which no task covers`,
      );
    }
  }
}

export function formatManifest(manifest: ExportManifest): string {
  const lines = [
    "# export manifest",
    `dataset=${manifest.dataset}`,
    `domain=${manifest.domain}`,
    `vision_encoder=${manifest.visionEncoder}`,
    `text_encoder=${manifest.textEncoder}`,
    `preprocess=${manifest.preprocess}`,
    `seed=${manifest.seed}`,
  ];
  for (const task of manifest.tasks) {
    lines.push(`task ${task.taskId} classes ${task.classIds.join(",")}`);
  }
  for (const sample of manifest.samples) {
    lines.push(`sample ${sample.classId} ${sample.path}`);
  }
  return lines.join("\n") + "\n";
}

export function parseManifest(text: string): ExportManifest {
  const fields = new Map<string, string>();
  const tasks: ExportTask[] = [];
  const samples: ExportSample[] = [];
  text.split("\n").forEach((raw, index) => {
    const line = raw.trim();
    const lineNo = index + 1;
    if (line === "" || line.startsWith("#")) return;
    if (line.startsWith("task ")) {
      const match = /^task (\d+) classes ([\d,]+)$/.exec(line);
      if (!match) throw new ManifestError(`line ${lineNo}: bad task line ${JSON.stringify(line)}`);
      tasks.push({
        taskId: Number(match[1]),
        classIds: match[2].split(",").map(Number),
      });
      return;
    }
    if (line.startsWith("sample ")) {
      const match = /^sample (\d+) (.+)$/.exec(line);
      if (!match) throw new ManifestError(`line ${lineNo}: bad sample line ${JSON.stringify(line)}`);
      samples.push({ classId: Number(match[1]), path: match[2] });
      return;
    }
    const eq = line.indexOf("=");
    if (eq < 1) throw new ManifestError(`line ${lineNo}: expected key=value, got ${JSON.stringify(line)}`);
    fields.set(line.slice(0, eq).trim(), line.slice(eq + 1).trim());
  });
  for (const key of ["dataset", "domain", "vision_encoder", "text_encoder", "preprocess", "seed"]) {
    if (!fields.has(key)) throw new ManifestError(`missing required field ${key}=`);
  }
  const seed = Number(fields.get("seed"));
  if (!Number.isInteger(seed)) throw new ManifestError(`seed must be an integer, got ${fields.get("seed")}`);
  const manifest: ExportManifest = {
    dataset: fields.get("dataset")!,
    domain: fields.get("domain")!,
    visionEncoder: fields.get("vision_encoder")!,
    textEncoder: fields.get("text_encoder")!,
    preprocess: fields.get("preprocess")!,
    seed,
    tasks,
    samples,
  };
  validateManifest(manifest);
  return manifest;
}

export function readManifest(path: string): ExportManifest {
  return parseManifest(readFileSync(path, "utf-8"));
}

export function writeManifest(manifest: ExportManifest, path: string): void {
  validateManifest(manifest);
  writeFileSync(path, formatManifest(manifest), "utf-8");
}

/** Sorted distinct class ids over the whole partition. */
export function allClassIds(manifest: ExportManifest): number[] {
  return manifest.tasks
    .flatMap((task) => task.classIds)
    .sort((a, b) => a - b);
}

// --- stream manifests (the adaptation engine's input format) -----------------

export type StreamRole =
  | "source_train"
  | "target_train"
  | "target_eval"
  | "vlm_train"
  | "vlm_eval";

export interface StreamTaskFiles {
  taskId: number;
  classIds: number[];
  files: Partial<Record<StreamRole, string>>;
}

const STREAM_ROLES: StreamRole[] = [
  "source_train",
  "target_train",
  "target_eval",
  "vlm_train",
  "vlm_eval",
];

export function formatStreamManifest(
  dim: number,
  classCount: number,
  tasks: StreamTaskFiles[],
): string {
  const lines = [
    "# task stream manifest",
    `dim=${dim}`,
    `classes=${classCount}`,
    `tasks=${tasks.length}`,
  ];
  for (const task of tasks) {
    lines.push(`task ${task.taskId} classes ${task.classIds.join(",")}`);
    for (const role of STREAM_ROLES) {
      const file = task.files[role];
      if (file !== undefined) lines.push(`task ${task.taskId} ${role} ${file}`);
    }
  }
  return lines.join("\n") + "\n";
}

export function writeStreamManifest(
  path: string,
  dim: number,
  classCount: number,
  tasks: StreamTaskFiles[],
): void {
  writeFileSync(path, formatStreamManifest(dim, classCount, tasks), "utf-8");
}
