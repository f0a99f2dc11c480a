import { readFileSync } from "fs";
import { join } from "path";
import { beforeAll, describe, expect, it } from "vitest";

import { readEmb1 } from "../src/emb1.js";
import { EncoderError, FormatError, ManifestError } from "../src/errors.js";
import { exportVisionEmbeddings, exportVlmScores, TaskFileReport } from "../src/export.js";
import { ExportManifest } from "../src/manifest.js";
import { makeGrid } from "../src/wavelet.js";
import { classImage, freshDir, runEngine, writeImage } from "./helpers.js";

const DIM = 24;

/** Office-31-shaped partition: 31 classes over 5 tasks (7+6+6+6+6). */
function office31Tasks(): { taskId: number; classIds: number[] }[] {
  const tasks = [];
  let next = 0;
  for (let k = 0; k < 5; k++) {
    const width = k === 0 ? 7 : 6;
    tasks.push({ taskId: k, classIds: Array.from({ length: width }, () => next++) });
  }
  return tasks;
}

function buildManifest(imgDir: string, perClass: number): ExportManifest {
  const tasks = office31Tasks();
  const samples = [];
  for (const task of tasks) {
    for (const classId of task.classIds) {
      for (let v = 0; v < perClass; v++) {
        const path = writeImage(imgDir, `c${classId}_v${v}.pgm`, classImage(classId, v));
        samples.push({ classId, path });
      }
    }
  }
  return {
    dataset: "office-toy",
    domain: "amazon",
    visionEncoder: `synthetic:${DIM}`,
    textEncoder: `synthetic-text:${DIM}`,
    preprocess: "grayscale",
    seed: 11,
    tasks,
    samples,
  };
}

describe("vision embedding export (office-31 shape)", () => {
  let manifest: ExportManifest;
  let outDir: string;
  let reports: TaskFileReport[];

  beforeAll(() => {
    manifest = buildManifest(freshDir("office-img"), 2);
    outDir = freshDir("office-out");
    reports = exportVisionEmbeddings(manifest, outDir, { filePrefix: "target", labels: true });
  });

  it("writes one file per task", () => {
    expect(reports.map((r) => r.taskId)).toEqual([0, 1, 2, 3, 4]);
    expect(reports.map((r) => r.count)).toEqual([14, 12, 12, 12, 12]);
    for (const report of reports) expect(report.skipped).toEqual([]);
  });

  it("gives each file the task's exact (disjoint) label set", () => {
    const seen = new Set<number>();
    reports.forEach((report, k) => {
      const emb = readEmb1(report.path);
      const labels = [...new Set(emb.labels!)].sort((a, b) => a - b);
      expect(labels).toEqual(manifest.tasks[k].classIds);
      for (const label of labels) {
        expect(seen.has(label)).toBe(false);
        seen.add(label);
      }
    });
    expect(seen.size).toBe(31);
  });

  it("lays out augmented rows as (count, 3, dim) triples", () => {
    const emb = readEmb1(reports[0].path);
    expect(emb.triple).toBe(true);
    expect(emb.dim).toBe(DIM);
    expect(emb.features.length).toBe(14 * 3 * DIM);
    const stat = readFileSync(reports[0].path);
    expect(stat.length).toBe(16 + 14 * 3 * DIM * 4 + 14 * 4);
  });

  it("every emitted file passes the engine's reader", () => {
    for (const report of reports) {
      const result = runEngine(["inspect", report.path]);
      expect(result.status).toBe(0);
      expect(result.stdout).toContain("format=emb1");
      expect(result.stdout).toContain(`count=${report.count} dim=${DIM}`);
      expect(result.stdout).toContain("labeled=true triple=true");
    }
  });

  it("re-exports byte-identically", () => {
    const again = exportVisionEmbeddings(manifest, freshDir("office-again"), {
      filePrefix: "target",
      labels: true,
    });
    reports.forEach((report, k) => {
      expect(readFileSync(report.path).equals(readFileSync(again[k].path))).toBe(true);
    });
  });
});

describe("augmentation structure", () => {
  it("encodes a constant image identically in the x and x_zeros slots", () => {
    const imgDir = freshDir("const-img");
    const grid = makeGrid(24, 24, new Float64Array(24 * 24).fill(0.5));
    const manifest: ExportManifest = {
      dataset: "flat",
      domain: "none",
      visionEncoder: `synthetic:${DIM}`,
      textEncoder: `synthetic-text:${DIM}`,
      preprocess: "grayscale",
      seed: 3,
      tasks: [{ taskId: 0, classIds: [0] }],
      samples: [{ classId: 0, path: writeImage(imgDir, "flat.pgm", grid) }],
    };
    const [report] = exportVisionEmbeddings(manifest, freshDir("const-out"), { labels: false });
    const emb = readEmb1(report.path);
    expect(emb.triple).toBe(true);
    expect(emb.labels).toBeUndefined();
    const x = emb.features.slice(0, DIM);
    const xZeros = emb.features.slice(DIM, 2 * DIM);
    const xRand = emb.features.slice(2 * DIM, 3 * DIM);
    expect(Array.from(xZeros)).toEqual(Array.from(x));
    expect(Array.from(xRand)).not.toEqual(Array.from(x));
  });

  it("flat export writes plain rows", () => {
    const imgDir = freshDir("flat-img");
    const manifest = buildManifest(imgDir, 1);
    manifest.tasks = [{ taskId: 0, classIds: manifest.tasks.flatMap((t) => t.classIds) }];
    const [report] = exportVisionEmbeddings(manifest, freshDir("flat-out"), {
      augment: false,
      filePrefix: "eval",
    });
    const emb = readEmb1(report.path);
    expect(emb.triple).toBe(false);
    expect(emb.count).toBe(31);
    expect(emb.features.length).toBe(31 * DIM);
  });
});

describe("skips and failures", () => {
  it("skips unreadable images with a warning but keeps the file valid", () => {
    const imgDir = freshDir("skip-img");
    const good = writeImage(imgDir, "good.pgm", classImage(0, 0));
    const manifest: ExportManifest = {
      dataset: "skippy",
      domain: "none",
      visionEncoder: `synthetic:${DIM}`,
      textEncoder: `synthetic-text:${DIM}`,
      preprocess: "grayscale",
      seed: 5,
      tasks: [{ taskId: 0, classIds: [0] }],
      samples: [
        { classId: 0, path: good },
        { classId: 0, path: join(imgDir, "missing.pgm") },
      ],
    };
    const warnings: string[] = [];
    const [report] = exportVisionEmbeddings(manifest, freshDir("skip-out"), {
      warn: (message) => warnings.push(message),
    });
    expect(report.count).toBe(1);
    expect(report.skipped).toEqual([join(imgDir, "missing.pgm")]);
    expect(warnings).toHaveLength(1);
    expect(warnings[0]).toContain("skipping unreadable image");
    expect(runEngine(["inspect", report.path]).status).toBe(0);
  });

  it("fails when a task ends up with zero readable samples", () => {
    const manifest: ExportManifest = {
      dataset: "empty",
      domain: "none",
      visionEncoder: `synthetic:${DIM}`,
      textEncoder: `synthetic-text:${DIM}`,
      preprocess: "grayscale",
      seed: 5,
      tasks: [{ taskId: 0, classIds: [0] }],
      samples: [{ classId: 0, path: "/nonexistent/nope.pgm" }],
    };
    expect(() =>
      exportVisionEmbeddings(manifest, freshDir("empty-out"), { warn: () => {} }),
    ).toThrowError(FormatError);
  });

  it("rejects unknown encoder ids before touching the output directory", () => {
    const manifest = buildManifest(freshDir("enc-img"), 1);
    manifest.visionEncoder = "clip-vit-b32";
    expect(() => exportVisionEmbeddings(manifest, "/nonexistent/out")).toThrowError(EncoderError);
  });

  it("requires one prompt per class across the whole partition", () => {
    const manifest = buildManifest(freshDir("prompt-img"), 1);
    expect(() => exportVlmScores(manifest, [], freshDir("prompt-out"))).toThrowError(/empty/);
    expect(() => exportVlmScores(manifest, ["just one"], freshDir("prompt-out"))).toThrowError(
      ManifestError,
    );
  });
});
