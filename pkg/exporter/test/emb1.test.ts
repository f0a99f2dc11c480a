import { readFileSync, writeFileSync } from "fs";
import { join } from "path";

import { describe, expect, it } from "vitest";

import {
  FLAG_LABELS,
  FLAG_TRIPLE,
  HEADER_BYTES,
  decodeEmb1,
  encodeEmb1,
  readEmb1,
  writeEmb1,
} from "../src/emb1.js";
import { FormatError } from "../src/errors.js";
import { freshDir, runEngine } from "./helpers.js";

const sample = () => ({
  features: Float64Array.from([0.5, -1.25, 2.0, 0.125, 3.5, -0.75]),
  count: 2,
  dim: 3,
  triple: false,
  labels: Int32Array.from([4, 9]),
});

describe("encode/decode", () => {
  it("round-trips exactly (float32 values chosen to be representable)", () => {
    const data = sample();
    const back = decodeEmb1(encodeEmb1(data));
    expect(back.count).toBe(2);
    expect(back.dim).toBe(3);
    expect(back.triple).toBe(false);
    expect(Array.from(back.features)).toEqual(Array.from(data.features));
    expect(Array.from(back.labels!)).toEqual([4, 9]);
  });

  it("computes exact byte sizes", () => {
    const labeled = encodeEmb1(sample());
    expect(labeled.length).toBe(HEADER_BYTES + 4 * 2 * 3 + 4 * 2);
    const triple = encodeEmb1({
      features: new Float64Array(2 * 3 * 3).fill(1),
      count: 2,
      dim: 3,
      triple: true,
    });
    expect(triple.length).toBe(HEADER_BYTES + 4 * 2 * 3 * 3);
    expect(triple.readUInt16LE(6)).toBe(FLAG_TRIPLE);
    expect(encodeEmb1(sample()).readUInt16LE(6)).toBe(FLAG_LABELS);
  });

  it("rejects bad inputs on write", () => {
    expect(() => encodeEmb1({ features: new Float64Array(0), count: 0, dim: 1, triple: false }))
      .toThrowError(/count/);
    expect(() =>
      encodeEmb1({ features: Float64Array.from([NaN]), count: 1, dim: 1, triple: false }),
    ).toThrowError(/non-finite/);
    expect(() =>
      encodeEmb1({ features: new Float64Array(5), count: 2, dim: 3, triple: false }),
    ).toThrowError(/expected 6/);
  });

  it("rejects corrupted headers and payloads with byte offsets", () => {
    const good = encodeEmb1(sample());
    const badMagic = Buffer.from(good);
    badMagic.write("NOPE", 0, "ascii");
    expect(() => decodeEmb1(badMagic)).toThrowError(/offset 0/);

    const badFlags = Buffer.from(good);
    badFlags.writeUInt16LE(0xff, 6);
    expect(() => decodeEmb1(badFlags)).toThrowError(/offset 6/);

    const badValue = Buffer.from(good);
    badValue.writeFloatLE(Infinity, HEADER_BYTES + 4);
    expect(() => decodeEmb1(badValue)).toThrowError(/offset 20/);

    expect(() => decodeEmb1(good.subarray(0, 30))).toThrowError(FormatError);
  });
});

describe("engine validation (files must pass the consumer's reader)", () => {
  it("labeled, unlabeled, and triple files all pass inspect", () => {
    const dir = freshDir("emb1");
    const cases = [
      { name: "labeled.emb1", data: sample(), expectLine: "labeled=true triple=false" },
      {
        name: "plain.emb1",
        data: { features: new Float64Array(12).fill(0.5), count: 4, dim: 3, triple: false },
        expectLine: "labeled=false triple=false",
      },
      {
        name: "triple.emb1",
        data: {
          features: new Float64Array(2 * 3 * 5).fill(0.25),
          count: 2,
          dim: 5,
          triple: true,
          labels: Int32Array.from([1, 2]),
        },
        expectLine: "labeled=true triple=true",
      },
    ];
    for (const { name, data, expectLine } of cases) {
      const path = join(dir, name);
      writeEmb1(path, data);
      const run = runEngine(["inspect", path]);
      expect(run.status, run.stderr).toBe(0);
      expect(run.stdout).toContain("format=emb1");
      expect(run.stdout).toContain(expectLine);
      expect(run.stdout).toContain(`count=${data.count} dim=${data.dim}`);
    }
  });

  it("label values survive the trip into the engine", () => {
    const dir = freshDir("emb1-labels");
    const path = join(dir, "labels.emb1");
    writeEmb1(path, sample());
    const run = runEngine(["inspect", path]);
    expect(run.stdout).toContain("label_values=4,9");
  });

  it("a tampered file is rejected by the engine with exit 2", () => {
    const dir = freshDir("emb1-bad");
    const path = join(dir, "bad.emb1");
    writeEmb1(path, sample());
    const blob = readFileSync(path);
    blob.writeFloatLE(NaN, HEADER_BYTES);
    writeFileSync(path, blob);
    const run = runEngine(["inspect", path]);
    expect(run.status).toBe(2);
    expect(run.stderr).toContain("offset");
  });

  it("our reader agrees with our writer after a disk round trip", () => {
    const dir = freshDir("emb1-disk");
    const path = join(dir, "roundtrip.emb1");
    const data = sample();
    const bytes = writeEmb1(path, data);
    expect(bytes).toBe(HEADER_BYTES + 4 * 2 * 3 + 4 * 2);
    const back = readEmb1(path);
    expect(Array.from(back.features)).toEqual(Array.from(data.features));
  });
});
