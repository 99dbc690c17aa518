/**
 * In-browser transcript verification: recompute every record hash and
 * chain link, replay the phase rules, re-check every opening, recompute
 * the outcome. Independent of the service implementation on purpose;
 * two codebases agreeing is what makes the green verdict worth
 * something.
 *
 * Hostile input yields findings, never exceptions.
 */

import { bytesEqual } from "./bytes.js";
import { commitDigest, MAX_MODULUS } from "./encoding.js";
import {
  parseRecordLine,
  recordHash,
  ZERO_HASH,
  type CeremonyEvent,
  type CeremonySpec,
  type TranscriptRecord,
} from "./records.js";

export interface Finding {
  seq: number;
  detail: string;
}

export interface VerificationReport {
  chainOk: boolean;
  phaseOrderOk: boolean;
  openingsOk: boolean;
  outcomeOk: boolean;
  recomputedOutcome: bigint | null;
  findings: Finding[];
}

export function allOk(report: VerificationReport): boolean {
  return report.chainOk && report.phaseOrderOk && report.openingsOk && report.outcomeOk;
}

// ---------------------------------------------------------------------------
// Replay state machine (mirror of the published ceremony rules)

type Phase = "commit" | "reveal" | "complete" | "aborted";

interface ReplayState {
  spec: CeremonySpec;
  phase: Phase;
  commitments: Map<string, Uint8Array>;
  reveals: Map<string, bigint>;
  outcome: bigint | null;
}

/** Phase-order violation (also covers malformed specs found in replay). */
class PhaseError extends Error {}
/** A reveal that does not open its commitment. */
class OpeningError extends Error {}
/** A completed record disagreeing with the recomputed sum. */
class OutcomeError extends Error {}

function createState(spec: CeremonySpec): ReplayState {
  if (spec.modulus < 2n || spec.modulus > MAX_MODULUS) {
    throw new PhaseError(`modulus ${spec.modulus} outside [2, 2^63 - 1]`);
  }
  if (spec.roster.length < 1) {
    throw new PhaseError("roster must name at least one stakeholder");
  }
  for (const sid of [spec.sessionId, ...spec.roster]) {
    if (sid.length === 0) throw new PhaseError("identifiers must be non-empty");
    if (new TextEncoder().encode(sid).length > 255) {
      throw new PhaseError("identifier longer than 255 octets after UTF-8 encoding");
    }
  }
  if (new Set(spec.roster).size !== spec.roster.length) {
    throw new PhaseError("roster ids must be unique");
  }
  if (spec.candidates !== undefined && BigInt(spec.candidates.length) !== spec.modulus) {
    throw new PhaseError(
      `candidate pool size ${spec.candidates.length} != modulus ${spec.modulus}`,
    );
  }
  return { spec, phase: "commit", commitments: new Map(), reveals: new Map(), outcome: null };
}

async function applyEvent(
  state: ReplayState | null,
  completedRecorded: boolean,
  event: CeremonyEvent,
): Promise<[ReplayState, boolean]> {
  if (completedRecorded) {
    throw new PhaseError("transcript continues after its completed record");
  }
  if (event.type === "ceremony_created") {
    if (state !== null) throw new PhaseError("duplicate ceremony_created record");
    return [createState(event.spec), false];
  }
  if (state === null) throw new PhaseError("first record must be ceremony_created");
  const spec = state.spec;

  if (event.type === "commitment_submitted") {
    if (state.phase !== "commit") throw new PhaseError(`cannot commit in phase ${state.phase}`);
    if (!spec.roster.includes(event.stakeholderId)) {
      throw new PhaseError(`${JSON.stringify(event.stakeholderId)} is not on the roster`);
    }
    if (state.commitments.has(event.stakeholderId)) {
      throw new PhaseError(`${JSON.stringify(event.stakeholderId)} has already committed`);
    }
    if (spec.commitDeadline !== undefined && event.timestamp > spec.commitDeadline) {
      throw new PhaseError("commit deadline has passed");
    }
    state.commitments.set(event.stakeholderId, event.digest);
    if (state.commitments.size === spec.roster.length) state.phase = "reveal";
    return [state, false];
  }

  if (event.type === "reveal_submitted") {
    if (state.reveals.has(event.stakeholderId)) {
      throw new PhaseError(`duplicate reveal record for ${JSON.stringify(event.stakeholderId)}`);
    }
    if (event.value >= spec.modulus) {
      throw new PhaseError(`value ${event.value} is outside [0, ${spec.modulus})`);
    }
    if (state.phase !== "reveal") throw new PhaseError(`cannot reveal in phase ${state.phase}`);
    if (!spec.roster.includes(event.stakeholderId)) {
      throw new PhaseError(`${JSON.stringify(event.stakeholderId)} is not on the roster`);
    }
    if (spec.revealDeadline !== undefined && event.timestamp > spec.revealDeadline) {
      throw new PhaseError("reveal deadline has passed");
    }
    const digest = state.commitments.get(event.stakeholderId)!;
    const recomputed = await commitDigest(
      spec.sessionId,
      event.stakeholderId,
      event.value,
      spec.modulus,
      event.mask,
    );
    if (!bytesEqual(recomputed, digest)) {
      throw new OpeningError(
        `opening by ${JSON.stringify(event.stakeholderId)} does not match the committed digest`,
      );
    }
    state.reveals.set(event.stakeholderId, event.value);
    if (state.reveals.size === spec.roster.length) {
      let sum = 0n;
      for (const sid of spec.roster) sum = (sum + state.reveals.get(sid)!) % spec.modulus;
      state.outcome = sum;
      state.phase = "complete";
    }
    return [state, false];
  }

  if (event.type === "opening_rejected") {
    if (state.phase !== "reveal") {
      throw new PhaseError(`opening_rejected outside reveal phase (${state.phase})`);
    }
    if (!spec.roster.includes(event.stakeholderId)) {
      throw new PhaseError(
        `opening_rejected for unknown ${JSON.stringify(event.stakeholderId)}`,
      );
    }
    return [state, false];
  }

  if (event.type === "completed") {
    if (state.phase !== "complete" || state.outcome === null) {
      throw new PhaseError("completed record before all reveals");
    }
    if (event.outcome !== state.outcome) {
      throw new OutcomeError(
        `recorded outcome ${event.outcome} != recomputed ${state.outcome}`,
      );
    }
    return [state, true];
  }

  // aborted
  if (state.phase !== "commit" && state.phase !== "reveal") {
    throw new PhaseError(`cannot abort in phase ${state.phase}`);
  }
  if (event.reason.length === 0) throw new PhaseError("abort reason must be a non-empty string");
  state.phase = "aborted";
  return [state, false];
}

// ---------------------------------------------------------------------------
// The verifier

function splitLines(data: Uint8Array): Uint8Array[] {
  const lines: Uint8Array[] = [];
  let start = 0;
  for (let i = 0; i < data.length; i++) {
    if (data[i] === 0x0a) {
      lines.push(data.subarray(start, i));
      start = i + 1;
    }
  }
  if (start < data.length) lines.push(data.subarray(start));
  return lines;
}

export async function verifyTranscript(data: Uint8Array): Promise<VerificationReport> {
  const chain: Finding[] = [];
  const phase: Finding[] = [];
  const openings: Finding[] = [];
  const outcome: Finding[] = [];
  const parsed: (TranscriptRecord | null)[] = [];
  const decoder = new TextDecoder("utf-8", { fatal: true });

  const lines = splitLines(data);
  for (let i = 0; i < lines.length; i++) {
    let record: TranscriptRecord;
    try {
      record = parseRecordLine(decoder.decode(lines[i]!));
    } catch (exc) {
      chain.push({ seq: i, detail: `malformed record: ${(exc as Error).message}` });
      parsed.push(null);
      continue;
    }
    parsed.push(record);

    if (record.seq !== BigInt(i)) {
      chain.push({ seq: i, detail: `sequence number ${record.seq}, expected ${i}` });
    }
    if (i === 0) {
      if (!bytesEqual(record.prevHash, ZERO_HASH)) {
        chain.push({ seq: i, detail: "first record must have all-zero prev_hash" });
      }
    } else {
      const prev = parsed[i - 1];
      if (prev != null && !bytesEqual(record.prevHash, prev.recordHash)) {
        chain.push({ seq: i, detail: "prev_hash does not match preceding record" });
      }
    }
    let expected: Uint8Array;
    try {
      expected = await recordHash(record.seq, record.prevHash, record.event);
    } catch (exc) {
      chain.push({ seq: i, detail: `unencodable record: ${(exc as Error).message}` });
      continue;
    }
    if (!bytesEqual(expected, record.recordHash)) {
      chain.push({ seq: i, detail: "record_hash does not match record contents" });
    }
  }

  let state: ReplayState | null = null;
  let completedRecorded = false;
  for (let i = 0; i < parsed.length; i++) {
    const record = parsed[i];
    if (record == null) break; // state beyond an unreadable record is unknowable
    try {
      [state, completedRecorded] = await applyEvent(state, completedRecorded, record.event);
    } catch (exc) {
      const detail = (exc as Error).message;
      if (exc instanceof OpeningError) openings.push({ seq: i, detail });
      else if (exc instanceof OutcomeError) outcome.push({ seq: i, detail });
      else phase.push({ seq: i, detail });
      break;
    }
  }

  const recomputed = state !== null && state.phase === "complete" ? state.outcome : null;
  const findings = [...chain, ...phase, ...openings, ...outcome].sort(
    (a, b) => a.seq - b.seq || (a.detail < b.detail ? -1 : a.detail > b.detail ? 1 : 0),
  );
  return {
    chainOk: chain.length === 0,
    phaseOrderOk: phase.length === 0,
    openingsOk: openings.length === 0,
    outcomeOk: outcome.length === 0,
    recomputedOutcome: recomputed,
    findings,
  };
}

/** One-line human verdict used by the UI badge. */
export function verdictText(report: VerificationReport): string {
  if (allOk(report)) {
    return report.recomputedOutcome === null
      ? "OK (ceremony not complete)"
      : `OK, recomputed outcome ${report.recomputedOutcome}`;
  }
  const first = report.findings[0];
  return first === undefined
    ? "TAMPERED OR MALFORMED"
    : `TAMPERED OR MALFORMED: first bad record seq ${first.seq} (${first.detail})`;
}
