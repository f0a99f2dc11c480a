/** Counter-based deterministic random numbers.
 *
 * Every stream is a pure function of its key: the n-th draw is
 * mix(key + n·golden) (splitmix64), so identical seeds reproduce identical
 * exports on any platform and there is no hidden global state.
 */

const GOLDEN = 0x9e3779b97f4a7c15n;
const MASK64 = (1n << 64n) - 1n;

function mix64(z: bigint): bigint {
  z = z & MASK64;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  return (z ^ (z >> 31n)) & MASK64;
}

/** FNV-1a over the UTF-8 bytes of each part, widened to 64 bits. */
export function hashKey(...parts: Array<string | number>): bigint {
  let h = 0xcbf29ce484222325n;
  const prime = 0x100000001b3n;
  for (const part of parts) {
    const text = typeof part === "number" ? `#${part}` : part;
    for (const byte of Buffer.from(text, "utf-8")) {
      h = ((h ^ BigInt(byte)) * prime) & MASK64;
    }
    h = ((h ^ 0x7en) * prime) & MASK64; // part separator
  }
  return h;
}

export class Rng {
  private readonly key: bigint;
  private counter: bigint;
  private spareNormal: number | null = null;

  constructor(...keyParts: Array<string | number>) {
    this.key = hashKey(...keyParts);
    this.counter = 0n;
  }

  private nextU64(): bigint {
    const value = mix64(this.key + this.counter * GOLDEN);
    this.counter += 1n;
    return value;
  }

  /** Uniform double in [0, 1) from the top 53 bits. */
  uniform(): number {
    return Number(this.nextU64() >> 11n) / 9007199254740992;
  }

  /** Standard normal via Box-Muller; draws are consumed two at a time. */
  normal(): number {
    if (this.spareNormal !== null) {
      const value = this.spareNormal;
      this.spareNormal = null;
      return value;
    }
    let u1 = this.uniform();
    if (u1 === 0) u1 = Number.MIN_VALUE;
    const u2 = this.uniform();
    const radius = Math.sqrt(-2 * Math.log(u1));
    this.spareNormal = radius * Math.sin(2 * Math.PI * u2);
    return radius * Math.cos(2 * Math.PI * u2);
  }

  normals(count: number): Float64Array {
    const out = new Float64Array(count);
    for (let i = 0; i < count; i++) out[i] = this.normal();
    return out;
  }
}
