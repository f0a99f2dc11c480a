/** Zero-shot probability rows: temperature softmax over cosine similarities. */

import { ManifestError } from "./errors.js";

/** softmax(cos(image, prompt_m) / tau) over the prompt axis. Inputs are
 * unit-normalized by the encoders, so cosine is a plain dot product. */
export function scoreRow(
  imageVec: Float64Array,
  promptVecs: Float64Array[],
  tau: number,
): Float64Array {
  if (promptVecs.length === 0) throw new ManifestError("no class prompts given");
  if (!(tau > 0)) throw new ManifestError(`temperature must be > 0, got ${tau}`);
  const logits = new Float64Array(promptVecs.length);
  for (let m = 0; m < promptVecs.length; m++) {
    const prompt = promptVecs[m];
    if (prompt.length !== imageVec.length) {
      throw new ManifestError(
        `prompt embedding dim ${prompt.length} != image embedding dim ${imageVec.length}`,
      );
    }
    let dot = 0;
    for (let i = 0; i < imageVec.length; i++) dot += imageVec[i] * prompt[i];
    logits[m] = dot / tau;
  }
  let max = -Infinity;
  for (const logit of logits) max = Math.max(max, logit);
  let total = 0;
  const out = new Float64Array(logits.length);
  for (let m = 0; m < logits.length; m++) {
    out[m] = Math.exp(logits[m] - max);
    total += out[m];
  }
  for (let m = 0; m < out.length; m++) out[m] /= total;
  return out;
}
