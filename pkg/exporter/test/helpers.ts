import { spawnSync } from "child_process";
import { mkdtempSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

import { encodePgm } from "../src/image.js";
import { Grid, makeGrid } from "../src/wavelet.js";

/** The adaptation engine's CLI — the only way these tests touch it. */
export function runEngine(args: string[]): {
  status: number;
  stdout: string;
  stderr: string;
} {
  const candidates: string[][] = [["kladapt"], ["python3", "-m", "kladapt"]];
  for (const [command, ...prefix] of candidates) {
    const result = spawnSync(command, [...prefix, ...args], { encoding: "utf-8" });
    if (result.error !== undefined) continue; // binary not found; try the next
    return { status: result.status ?? -1, stdout: result.stdout, stderr: result.stderr };
  }
  throw new Error("adaptation engine CLI not found (tried kladapt, python3 -m kladapt)");
}

export function freshDir(label: string): string {
  return mkdtempSync(join(tmpdir(), `${label}-`));
}

/** A deterministic class-and-domain-dependent test image: a smooth ramp whose
 * orientation encodes the class and whose brightness encodes the domain. */
export function classImage(classId: number, variant: number, domainShift = 0): Grid {
  const size = 24;
  const grid = makeGrid(size, size);
  const angle = (classId * 137.5 * Math.PI) / 180;
  const dx = Math.cos(angle);
  const dy = Math.sin(angle);
  for (let r = 0; r < size; r++) {
    for (let c = 0; c < size; c++) {
      const along = (dx * c + dy * r) / size;
      const wobble = 0.08 * Math.sin((variant + 1) * 0.7 + 5 * along);
      const value = 0.5 + 0.45 * Math.sin(2 * Math.PI * (along + 0.1 * classId)) + wobble;
      grid.data[r * size + c] = Math.min(1, Math.max(0, value + domainShift));
    }
  }
  return grid;
}

export function writeImage(dir: string, name: string, grid: Grid): string {
  const path = join(dir, name);
  writeFileSync(path, encodePgm(grid));
  return path;
}
