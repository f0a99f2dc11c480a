#!/usr/bin/env node
/** Command-line wrapper: export embeddings/scores, check wavelet conformance. */

import { readFileSync } from "fs";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { EncoderError, FormatError, ImageError, ManifestError } from "./errors.js";
import { exportVisionEmbeddings, exportVlmScores } from "./export.js";
import { readManifest } from "./manifest.js";
import { goldenDeviation, parseGoldenFile } from "./wavelet.js";

export async function main(argv: string[]): Promise<number> {
  let exitCode = 0;
  const parser = yargs(argv)
    .scriptName("emb-exporter")
    .usage("$0 <command> [options]")
    .command(
      "export-vision",
      "encode images into per-task EMB1 embedding files",
      (cmd) =>
        cmd
          .option("manifest", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true })
          .option("flat", {
            type: "boolean",
            default: false,
            describe: "plain rows instead of (x, x_zeros, x_rand) triples",
          })
          .option("labels", {
            type: "boolean",
            default: true,
            describe: "append class labels; pass --no-labels for target-domain files",
          })
          .option("noise-scale", { type: "number", default: 1.0 })
          .option("prefix", { type: "string", default: "vision" }),
      (args) => {
        const manifest = readManifest(args.manifest);
        const reports = exportVisionEmbeddings(manifest, args.out, {
          augment: !args.flat,
          labels: args.labels,
          noiseScale: args["noise-scale"],
          filePrefix: args.prefix,
        });
        for (const report of reports) {
          const note = report.skipped.length ? ` (${report.skipped.length} skipped)` : "";
          console.log(`task ${report.taskId}: ${report.count} samples -> ${report.path}${note}`);
        }
      },
    )
    .command(
      "export-scores",
      "write per-task zero-shot probability tables",
      (cmd) =>
        cmd
          .option("manifest", { type: "string", demandOption: true })
          .option("prompts", {
            type: "string",
            demandOption: true,
            describe: "text file, one class prompt per line (ascending class id)",
          })
          .option("out", { type: "string", demandOption: true })
          .option("tau", { type: "number", default: 1.0 })
          .option("prefix", { type: "string", default: "scores" }),
      (args) => {
        const manifest = readManifest(args.manifest);
        const prompts = readFileSync(args.prompts, "utf-8")
          .split("\n")
          .map((line) => line.trim())
          .filter((line) => line.length > 0);
        const reports = exportVlmScores(manifest, prompts, args.out, {
          tau: args.tau,
          filePrefix: args.prefix,
        });
        for (const report of reports) {
          console.log(`task ${report.taskId}: ${report.count} rows -> ${report.path}`);
        }
      },
    )
    .command(
      "golden-check <file>",
      "verify this build's wavelet transform against a golden-vector file",
      (cmd) => cmd.positional("file", { type: "string", demandOption: true }),
      (args) => {
        const values = parseGoldenFile(readFileSync(args.file as string));
        const deviation = goldenDeviation(values);
        if (deviation > 1e-5) {
          console.log(`FAIL: wavelet transform deviates from golden vectors by ${deviation.toExponential(3)}`);
          exitCode = 3;
          return;
        }
        console.log(`ok: transform matches golden vectors within 1e-5 (deviation ${deviation.toExponential(3)})`);
      },
    )
    .demandCommand(1, "pick a command")
    .strict()
    .fail((message, error) => {
      throw error ?? new Error(message ?? "usage error");
    });

  try {
    await parser.parse();
    return exitCode;
  } catch (err) {
    const error = err as Error;
    console.error(`error: ${error.message}`);
    if (error instanceof FormatError) return 2;
    if (error instanceof EncoderError) return 3;
    if (error instanceof ManifestError || error instanceof ImageError) return 1;
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);

if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
