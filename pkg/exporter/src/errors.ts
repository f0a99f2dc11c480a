/** Typed failures so callers can tell a malformed file from a missing encoder. */

/** A binary or text artifact violates its declared layout. */
export class FormatError extends Error {
  readonly offset: number | undefined;

  constructor(message: string, offset?: number) {
    super(offset === undefined ? message : `${message} (at byte offset ${offset})`);
    this.name = "FormatError";
    this.offset = offset;
  }
}

/** An export manifest is self-inconsistent (partition overlap, bad coverage...). */
export class ManifestError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ManifestError";
  }
}

/** A requested encoder identifier has no implementation in this build. */
export class EncoderError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "EncoderError";
  }
}

/** An image file cannot be decoded; per-sample recoverable during export. */
export class ImageError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ImageError";
  }
}
