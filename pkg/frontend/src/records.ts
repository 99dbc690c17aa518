/**
 * Transcript records: strict JSONL parsing plus the binary framing the
 * record hashes actually cover. Shares no code with the service; an
 * independent reading of the published wire format is the point.
 */

import { concat, fromHex, sha256, u32, u64, u8, utf8, U64_MAX } from "./bytes.js";
import { parseJson, type JsonValue } from "./json.js";

export const RECORD_TAG = utf8("FAIRDRAW-RECORD-V1");
export const ZERO_HASH = new Uint8Array(32);

export interface CeremonySpec {
  sessionId: string;
  modulus: bigint;
  roster: string[];
  candidates?: string[];
  metadata: string;
  commitDeadline?: bigint;
  revealDeadline?: bigint;
  predecessor?: string;
}

export type CeremonyEvent =
  | { type: "ceremony_created"; spec: CeremonySpec }
  | { type: "commitment_submitted"; stakeholderId: string; digest: Uint8Array; timestamp: bigint }
  | { type: "reveal_submitted"; stakeholderId: string; value: bigint; mask: Uint8Array; timestamp: bigint }
  | { type: "opening_rejected"; stakeholderId: string; reason: string; timestamp: bigint }
  | { type: "completed"; outcome: bigint }
  | { type: "aborted"; reason: string; successorHint?: string };

export interface TranscriptRecord {
  seq: bigint;
  prevHash: Uint8Array;
  event: CeremonyEvent;
  recordHash: Uint8Array;
}

// ---------------------------------------------------------------------------
// Strict JSON -> record

type JsonObj = { [key: string]: JsonValue };

function isObj(v: JsonValue | undefined): v is JsonObj {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function checkKeys(what: string, obj: JsonObj, required: string[], optional: string[] = []): void {
  const present = Object.keys(obj);
  for (const key of required) {
    if (!(key in obj)) throw new Error(`${what} is missing key ${JSON.stringify(key)}`);
  }
  for (const key of present) {
    if (!required.includes(key) && !optional.includes(key)) {
      throw new Error(`${what} has unexpected key ${JSON.stringify(key)}`);
    }
  }
}

function str(what: string, v: JsonValue | undefined): string {
  if (typeof v !== "string") throw new Error(`${what} must be a string`);
  return v;
}

function uint(what: string, v: JsonValue | undefined): bigint {
  if (typeof v !== "bigint" || v < 0n || v > U64_MAX) {
    throw new Error(`${what} must be an unsigned 64-bit integer`);
  }
  return v;
}

function hash(what: string, v: JsonValue | undefined): Uint8Array {
  if (typeof v !== "string" || !/^[0-9a-f]{64}$/.test(v)) {
    throw new Error(`${what} must be 64 lowercase hex digits`);
  }
  return fromHex(v);
}

function strArray(what: string, v: JsonValue | undefined): string[] {
  if (!Array.isArray(v)) throw new Error(`${what} must be an array`);
  return v.map((item, i) => str(`${what}[${i}]`, item));
}

function parseEvent(v: JsonValue | undefined): CeremonyEvent {
  if (!isObj(v)) throw new Error("event must be an object");
  const type = str("event.type", v["type"]);
  if (type === "ceremony_created") {
    checkKeys("ceremony_created", v, ["type", "spec"]);
    const s = v["spec"];
    if (!isObj(s)) throw new Error("spec must be an object");
    checkKeys("spec", s, ["session_id", "modulus", "roster", "metadata"], [
      "candidates",
      "commit_deadline",
      "reveal_deadline",
      "predecessor",
    ]);
    const spec: CeremonySpec = {
      sessionId: str("session_id", s["session_id"]),
      modulus: uint("modulus", s["modulus"]),
      roster: strArray("roster", s["roster"]),
      metadata: str("metadata", s["metadata"]),
    };
    if ("candidates" in s) spec.candidates = strArray("candidates", s["candidates"]);
    if ("commit_deadline" in s) spec.commitDeadline = uint("commit_deadline", s["commit_deadline"]);
    if ("reveal_deadline" in s) spec.revealDeadline = uint("reveal_deadline", s["reveal_deadline"]);
    if ("predecessor" in s) spec.predecessor = str("predecessor", s["predecessor"]);
    return { type, spec };
  }
  if (type === "commitment_submitted") {
    checkKeys(type, v, ["type", "stakeholder_id", "digest", "timestamp"]);
    return {
      type,
      stakeholderId: str("stakeholder_id", v["stakeholder_id"]),
      digest: hash("digest", v["digest"]),
      timestamp: uint("timestamp", v["timestamp"]),
    };
  }
  if (type === "reveal_submitted") {
    checkKeys(type, v, ["type", "stakeholder_id", "value", "mask", "timestamp"]);
    return {
      type,
      stakeholderId: str("stakeholder_id", v["stakeholder_id"]),
      value: uint("value", v["value"]),
      mask: hash("mask", v["mask"]),
      timestamp: uint("timestamp", v["timestamp"]),
    };
  }
  if (type === "opening_rejected") {
    checkKeys(type, v, ["type", "stakeholder_id", "reason", "timestamp"]);
    return {
      type,
      stakeholderId: str("stakeholder_id", v["stakeholder_id"]),
      reason: str("reason", v["reason"]),
      timestamp: uint("timestamp", v["timestamp"]),
    };
  }
  if (type === "completed") {
    checkKeys(type, v, ["type", "outcome"]);
    return { type, outcome: uint("outcome", v["outcome"]) };
  }
  if (type === "aborted") {
    checkKeys(type, v, ["type", "reason"], ["successor_hint"]);
    const event: CeremonyEvent = { type, reason: str("reason", v["reason"]) };
    if ("successor_hint" in v) event.successorHint = str("successor_hint", v["successor_hint"]);
    return event;
  }
  throw new Error(`unknown event type ${JSON.stringify(type)}`);
}

/** Parse one transcript line with the full strictness an auditor needs. */
export function parseRecordLine(line: string): TranscriptRecord {
  const v = parseJson(line);
  if (!isObj(v)) throw new Error("record must be an object");
  checkKeys("record", v, ["seq", "prev_hash", "event", "record_hash"]);
  return {
    seq: uint("seq", v["seq"]),
    prevHash: hash("prev_hash", v["prev_hash"]),
    event: parseEvent(v["event"]),
    recordHash: hash("record_hash", v["record_hash"]),
  };
}

// ---------------------------------------------------------------------------
// Binary framing (what the hashes cover)

function lstr(s: string): Uint8Array {
  const encoded = utf8(s);
  return concat(u32(encoded.length), encoded);
}

function opt(value: Uint8Array | undefined): Uint8Array {
  return value === undefined ? u8(0) : concat(u8(1), value);
}

export function encodeEvent(event: CeremonyEvent): Uint8Array {
  switch (event.type) {
    case "ceremony_created": {
      const s = event.spec;
      return concat(
        u8(0x01),
        lstr(s.sessionId),
        u64(s.modulus),
        u32(s.roster.length),
        ...s.roster.map(lstr),
        opt(
          s.candidates === undefined
            ? undefined
            : concat(u64(BigInt(s.candidates.length)), ...s.candidates.map(lstr)),
        ),
        lstr(s.metadata),
        opt(s.commitDeadline === undefined ? undefined : u64(s.commitDeadline)),
        opt(s.revealDeadline === undefined ? undefined : u64(s.revealDeadline)),
        opt(s.predecessor === undefined ? undefined : lstr(s.predecessor)),
      );
    }
    case "commitment_submitted":
      return concat(u8(0x02), lstr(event.stakeholderId), event.digest, u64(event.timestamp));
    case "reveal_submitted":
      return concat(
        u8(0x03),
        lstr(event.stakeholderId),
        u64(event.value),
        event.mask,
        u64(event.timestamp),
      );
    case "opening_rejected":
      return concat(u8(0x04), lstr(event.stakeholderId), lstr(event.reason), u64(event.timestamp));
    case "completed":
      return concat(u8(0x05), u64(event.outcome));
    case "aborted":
      return concat(
        u8(0x06),
        lstr(event.reason),
        opt(event.successorHint === undefined ? undefined : lstr(event.successorHint)),
      );
  }
}

export function recordFrame(seq: bigint, prevHash: Uint8Array, event: CeremonyEvent): Uint8Array {
  return concat(RECORD_TAG, u64(seq), prevHash, encodeEvent(event));
}

export async function recordHash(
  seq: bigint,
  prevHash: Uint8Array,
  event: CeremonyEvent,
): Promise<Uint8Array> {
  return sha256(recordFrame(seq, prevHash, event));
}
