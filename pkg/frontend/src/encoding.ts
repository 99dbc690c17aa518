/**
 * Commitment encoding, computed entirely in the browser so the value
 * and mask never leave it before the reveal phase.
 *
 * Digest = SHA-256 over:
 *   "FAIRDRAW-COMMIT-V1" || u8-len session || u8-len stakeholder ||
 *   mask (32) || modulus u64 || value u64
 * matching the coordination service's published wire format byte for
 * byte (covered by the shared golden vector suite).
 */

import { concat, sha256, toHex, u64, u8, utf8 } from "./bytes.js";

export const COMMIT_TAG = utf8("FAIRDRAW-COMMIT-V1");

export const MAX_MODULUS = (1n << 63n) - 1n;

function identifier(label: string, value: string): Uint8Array {
  const encoded = utf8(value);
  if (encoded.length === 0) throw new RangeError(`${label} is empty`);
  if (encoded.length > 255) {
    throw new RangeError(`${label} longer than 255 octets after UTF-8 encoding`);
  }
  return concat(u8(encoded.length), encoded);
}

export function checkModulus(m: bigint): void {
  if (m < 2n || m > MAX_MODULUS) {
    throw new RangeError(`modulus ${m} outside [2, 2^63 - 1]`);
  }
}

export function checkValue(value: bigint, modulus: bigint): void {
  checkModulus(modulus);
  if (value < 0n || value >= modulus) {
    throw new RangeError(`value ${value} is outside [0, ${modulus})`);
  }
}

export function commitEncoding(
  sessionId: string,
  stakeholderId: string,
  value: bigint,
  modulus: bigint,
  mask: Uint8Array,
): Uint8Array {
  checkValue(value, modulus);
  if (mask.length !== 32) throw new RangeError(`mask must be 32 octets, got ${mask.length}`);
  return concat(
    COMMIT_TAG,
    identifier("session_id", sessionId),
    identifier("stakeholder_id", stakeholderId),
    mask,
    u64(modulus),
    u64(value),
  );
}

export async function commitDigest(
  sessionId: string,
  stakeholderId: string,
  value: bigint,
  modulus: bigint,
  mask: Uint8Array,
): Promise<Uint8Array> {
  return sha256(commitEncoding(sessionId, stakeholderId, value, modulus, mask));
}

export async function commitDigestHex(
  sessionId: string,
  stakeholderId: string,
  value: bigint,
  modulus: bigint,
  mask: Uint8Array,
): Promise<string> {
  return toHex(await commitDigest(sessionId, stakeholderId, value, modulus, mask));
}
