import { beforeAll, describe, expect, it } from "vitest";

import { readEmb1 } from "../src/emb1.js";
import { createTextEncoder, createVisionEncoder } from "../src/encoders.js";
import { ManifestError } from "../src/errors.js";
import { exportVlmScores, TaskFileReport } from "../src/export.js";
import { ExportManifest } from "../src/manifest.js";
import { Rng } from "../src/prng.js";
import { scoreRow } from "../src/scores.js";
import { classImage, freshDir, runEngine, writeImage } from "./helpers.js";

const DIM = 24;

function unitVec(seedName: string): Float64Array {
  const vec = new Rng("score-test", seedName).normals(DIM);
  let sq = 0;
  for (const v of vec) sq += v * v;
  for (let i = 0; i < vec.length; i++) vec[i] /= Math.sqrt(sq);
  return vec;
}

describe("score rows", () => {
  it("always sums to one", () => {
    const image = unitVec("img");
    const prompts = ["a", "b", "c", "d"].map(unitVec);
    for (const tau of [0.1, 1.0, 10.0]) {
      const row = scoreRow(image, prompts, tau);
      let total = 0;
      for (const p of row) {
        expect(p).toBeGreaterThan(0);
        total += p;
      }
      expect(Math.abs(total - 1)).toBeLessThan(1e-12);
    }
  });

  it("gives duplicated prompts identical probabilities", () => {
    const image = unitVec("img2");
    const dup = unitVec("same");
    const row = scoreRow(image, [dup, unitVec("other"), dup], 0.5);
    expect(row[0]).toBe(row[2]);
  });

  it("is certain with a single prompt", () => {
    expect(Array.from(scoreRow(unitVec("x"), [unitVec("only")], 1.0))).toEqual([1.0]);
  });

  it("rejects empty prompt lists, bad temperatures, and dim mismatches", () => {
    const image = unitVec("img3");
    expect(() => scoreRow(image, [], 1.0)).toThrowError(ManifestError);
    expect(() => scoreRow(image, [unitVec("p")], 0)).toThrowError(/temperature/);
    expect(() => scoreRow(image, [unitVec("p")], NaN)).toThrowError(/temperature/);
    expect(() => scoreRow(image, [new Float64Array(DIM + 1)], 1.0)).toThrowError(/dim/);
  });

  it("sharpens as temperature drops", () => {
    const vision = createVisionEncoder(`synthetic:${DIM}`, 1);
    const text = createTextEncoder(`synthetic-text:${DIM}`, 1);
    const image = vision.encodeGrid(classImage(0, 0));
    const prompts = ["p0", "p1", "p2"].map((p) => text.encodePrompt(p));
    const soft = scoreRow(image, prompts, 10.0);
    const sharp = scoreRow(image, prompts, 0.05);
    expect(Math.max(...sharp)).toBeGreaterThan(Math.max(...soft));
  });
});

describe("score table export", () => {
  let manifest: ExportManifest;
  let reports: TaskFileReport[];

  beforeAll(() => {
    const imgDir = freshDir("score-img");
    const tasks = [
      { taskId: 0, classIds: [0, 1, 2] },
      { taskId: 1, classIds: [3, 4] },
    ];
    const samples = [];
    for (const task of tasks) {
      for (const classId of task.classIds) {
        for (let v = 0; v < 3; v++) {
          samples.push({
            classId,
            path: writeImage(imgDir, `c${classId}_v${v}.pgm`, classImage(classId, v)),
          });
        }
      }
    }
    manifest = {
      dataset: "score-toy",
      domain: "webcam",
      visionEncoder: `synthetic:${DIM}`,
      textEncoder: `synthetic-text:${DIM}`,
      preprocess: "grayscale",
      seed: 9,
      tasks,
      samples,
    };
    const prompts = ["backpack", "bike", "bottle", "desk lamp", "monitor"];
    reports = exportVlmScores(manifest, prompts, freshDir("score-out"), { tau: 0.5 });
  });

  it("rows sum to one within 1e-5 after the f32 disk round-trip", () => {
    for (const report of reports) {
      const emb = readEmb1(report.path);
      for (let i = 0; i < emb.count; i++) {
        let total = 0;
        for (let m = 0; m < emb.dim; m++) total += emb.features[i * emb.dim + m];
        expect(Math.abs(total - 1)).toBeLessThan(1e-5);
      }
    }
  });

  it("writes one column per task class", () => {
    const first = readEmb1(reports[0].path);
    expect(first.count).toBe(9);
    expect(first.dim).toBe(3);
    const second = readEmb1(reports[1].path);
    expect(second.count).toBe(6);
    expect(second.dim).toBe(2);
  });

  it("emits plain unlabeled tables the engine accepts", () => {
    for (const report of reports) {
      const result = runEngine(["inspect", report.path]);
      expect(result.status).toBe(0);
      expect(result.stdout).toContain("labeled=false triple=false");
    }
  });

  it("orders columns by ascending class id regardless of manifest order", () => {
    const shuffled: ExportManifest = {
      ...manifest,
      tasks: [
        { taskId: 0, classIds: [2, 0, 1] },
        { taskId: 1, classIds: [4, 3] },
      ],
    };
    const prompts = ["backpack", "bike", "bottle", "desk lamp", "monitor"];
    const again = exportVlmScores(shuffled, prompts, freshDir("score-shuffle"), { tau: 0.5 });
    reports.forEach((report, k) => {
      expect(readEmb1(report.path).features).toEqual(readEmb1(again[k].path).features);
    });
  });
});
