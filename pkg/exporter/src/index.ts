export { EncoderError, FormatError, ImageError, ManifestError } from "./errors.js";
export { Rng, hashKey } from "./prng.js";
export {
  GOLDEN_GRID_SIZE,
  GOLDEN_VALUE_COUNT,
  Grid,
  SubBands,
  augmentTriple,
  dwt2,
  goldenDeviation,
  goldenPayloadFromGrid,
  gridFrom2d,
  idwt2,
  makeGrid,
  parseGoldenFile,
} from "./wavelet.js";
export {
  Emb1Data,
  FLAG_LABELS,
  FLAG_TRIPLE,
  HEADER_BYTES,
  MAGIC,
  VERSION,
  decodeEmb1,
  encodeEmb1,
  readEmb1,
  writeEmb1,
} from "./emb1.js";
export { decodePnm, encodePgm, poolGrid, readPnm } from "./image.js";
export {
  TextEncoder,
  VisionEncoder,
  createTextEncoder,
  createVisionEncoder,
} from "./encoders.js";
export {
  ExportManifest,
  ExportSample,
  ExportTask,
  StreamRole,
  StreamTaskFiles,
  allClassIds,
  formatManifest,
  formatStreamManifest,
  parseManifest,
  readManifest,
  validateManifest,
  writeManifest,
  writeStreamManifest,
} from "./manifest.js";
export { scoreRow } from "./scores.js";
export {
  ScoreExportOptions,
  TaskFileReport,
  VisionExportOptions,
  exportVisionEmbeddings,
  exportVlmScores,
} from "./export.js";
export { main as cliMain } from "./cli.js";
