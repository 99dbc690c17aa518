/**
 * Byte-level helpers shared by the commitment encoding and the
 * transcript verifier. Big-endian throughout.
 */

export const U64_MAX = (1n << 64n) - 1n;

export function utf8(s: string): Uint8Array {
  return new TextEncoder().encode(s);
}

export function concat(...parts: Uint8Array[]): Uint8Array {
  let total = 0;
  for (const p of parts) total += p.length;
  const out = new Uint8Array(total);
  let at = 0;
  for (const p of parts) {
    out.set(p, at);
    at += p.length;
  }
  return out;
}

export function u8(n: number): Uint8Array {
  if (!Number.isInteger(n) || n < 0 || n > 0xff) {
    throw new RangeError(`not a u8: ${n}`);
  }
  return Uint8Array.of(n);
}

export function u32(n: number): Uint8Array {
  if (!Number.isInteger(n) || n < 0 || n > 0xffffffff) {
    throw new RangeError(`not a u32: ${n}`);
  }
  const out = new Uint8Array(4);
  new DataView(out.buffer).setUint32(0, n);
  return out;
}

export function u64(n: bigint): Uint8Array {
  if (n < 0n || n > U64_MAX) throw new RangeError(`not a u64: ${n}`);
  const out = new Uint8Array(8);
  new DataView(out.buffer).setBigUint64(0, n);
  return out;
}

const HEX_RE = /^[0-9a-f]*$/;

/** Strict lowercase hex decode; rejects odd length and uppercase. */
export function fromHex(hex: string): Uint8Array {
  if (hex.length % 2 !== 0 || !HEX_RE.test(hex)) {
    throw new RangeError(`not lowercase hex: ${JSON.stringify(hex)}`);
  }
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

export function toHex(data: Uint8Array): string {
  let s = "";
  for (const b of data) s += b.toString(16).padStart(2, "0");
  return s;
}

export function bytesEqual(a: Uint8Array, b: Uint8Array): boolean {
  if (a.length !== b.length) return false;
  let diff = 0;
  for (let i = 0; i < a.length; i++) diff |= a[i]! ^ b[i]!;
  return diff === 0;
}

/** SHA-256 via WebCrypto (browser and node 20+). */
export async function sha256(data: Uint8Array): Promise<Uint8Array> {
  // slice() detaches from any shared buffer without changing realms;
  // digest implementations are picky about where a BufferSource was born
  return new Uint8Array(await crypto.subtle.digest("SHA-256", data.slice()));
}

/** 32 octets of secure browser entropy for a commitment mask. */
export function randomMask(): Uint8Array {
  const mask = new Uint8Array(32);
  crypto.getRandomValues(mask);
  return mask;
}
