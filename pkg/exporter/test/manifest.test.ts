import { join } from "path";
import { describe, expect, it } from "vitest";

import { ManifestError } from "../src/errors.js";
import {
  allClassIds,
  ExportManifest,
  formatManifest,
  formatStreamManifest,
  parseManifest,
  readManifest,
  validateManifest,
  writeManifest,
  writeStreamManifest,
} from "../src/manifest.js";
import { freshDir, runEngine } from "./helpers.js";

function sampleManifest(): ExportManifest {
  return {
    dataset: "office-toy",
    domain: "amazon",
    visionEncoder: "synthetic:64",
    textEncoder: "synthetic-text:64",
    preprocess: "grayscale",
    seed: 7,
    tasks: [
      { taskId: 0, classIds: [0, 1, 2] },
      { taskId: 1, classIds: [3, 4] },
    ],
    samples: [
      { classId: 0, path: "images/backpack_001.pgm" },
      { classId: 3, path: "images/mug with space.pgm" },
    ],
  };
}

describe("export manifest", () => {
  it("round-trips through format/parse", () => {
    const manifest = sampleManifest();
    const parsed = parseManifest(formatManifest(manifest));
    expect(parsed).toEqual(manifest);
  });

  it("round-trips through the filesystem", () => {
    const dir = freshDir("manifest");
    const path = join(dir, "export.manifest");
    writeManifest(sampleManifest(), path);
    expect(readManifest(path)).toEqual(sampleManifest());
  });

  it("keeps sample paths containing spaces intact", () => {
    const parsed = parseManifest(formatManifest(sampleManifest()));
    expect(parsed.samples[1].path).toBe("images/mug with space.pgm");
  });

  it("rejects overlapping task partitions", () => {
    const manifest = sampleManifest();
    manifest.tasks[1].classIds = [2, 3];
    expect(() => writeManifest(manifest, "/dev/null")).toThrowError(/disjoint/);
  });

  it("rejects out-of-order task ids", () => {
    const manifest = sampleManifest();
    manifest.tasks[1].taskId = 5;
    expect(() => parseManifest(formatManifest(manifest))).toThrowError(/0\.\.1 in order/);
  });

  it("rejects samples whose class no task covers", () => {
    const manifest = sampleManifest();
    manifest.samples.push({ classId: 9, path: "images/stray.pgm" });
    expect(() => parseManifest(formatManifest(manifest))).toThrowError(/no task covers/);
  });

  it("rejects empty tasks and missing required fields", () => {
    const manifest = sampleManifest();
    manifest.tasks[0].classIds = [];
    expect(() => validateManifest(manifest)).toThrowError(/has no classes/);
    // an empty class list cannot even be expressed in the text format
    expect(() => parseManifest(formatManifest(manifest))).toThrowError(ManifestError);
    expect(() => parseManifest("dataset=x\n")).toThrowError(ManifestError);
    expect(() => parseManifest("dataset=x\n")).toThrowError(/missing required field/);
  });

  it("rejects a non-integer seed and malformed lines", () => {
    const good = formatManifest(sampleManifest());
    expect(() => parseManifest(good.replace("seed=7", "seed=seven"))).toThrowError(/integer/);
    expect(() => parseManifest(good + "task x classes 1\n")).toThrowError(/bad task line/);
    expect(() => parseManifest(good + "sample nine oops\n")).toThrowError(/bad sample line/);
    expect(() => parseManifest(good + "stray line\n")).toThrowError(/key=value/);
  });

  it("ignores comments and blank lines", () => {
    const text = "# leading comment\n\n" + formatManifest(sampleManifest()) + "\n# trailing\n";
    expect(parseManifest(text)).toEqual(sampleManifest());
  });

  it("lists all class ids sorted", () => {
    const manifest = sampleManifest();
    manifest.tasks[0].classIds = [2, 0, 1];
    expect(allClassIds(manifest)).toEqual([0, 1, 2, 3, 4]);
  });
});

describe("stream manifest writer", () => {
  it("emits the adaptation engine's exact layout", () => {
    const text = formatStreamManifest(64, 5, [
      {
        taskId: 0,
        classIds: [0, 1, 2],
        files: { source_train: "vision_task0.emb1", vlm_eval: "scores_task0.emb1" },
      },
      { taskId: 1, classIds: [3, 4], files: { target_train: "vision_task1.emb1" } },
    ]);
    expect(text).toBe(
      [
        "# task stream manifest",
        "dim=64",
        "classes=5",
        "tasks=2",
        "task 0 classes 0,1,2",
        "task 0 source_train vision_task0.emb1",
        "task 0 vlm_eval scores_task0.emb1",
        "task 1 classes 3,4",
        "task 1 target_train vision_task1.emb1",
        "",
      ].join("\n"),
    );
  });

  it("is parsed by the adaptation engine", () => {
    const dir = freshDir("stream");
    const path = join(dir, "stream.manifest");
    writeStreamManifest(path, 8, 4, [
      {
        taskId: 0,
        classIds: [0, 1],
        files: { target_train: "vision_task0.emb1", target_eval: "vision_eval_task0.emb1" },
      },
      { taskId: 1, classIds: [2, 3], files: { target_train: "vision_task1.emb1" } },
    ]);
    const result = runEngine(["inspect", path]);
    expect(result.status).toBe(0);
    expect(result.stdout).toContain("format=manifest dim=8 classes=4 tasks=2");
    expect(result.stdout).toContain("task 0:");
    expect(result.stdout).toContain("target_eval,target_train");
  });
});
