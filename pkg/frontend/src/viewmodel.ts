/**
 * Pure view model: the dashboard state is a fold over transcript
 * records, so a live stream and a replayed transcript render
 * identically by construction. No IO in this module.
 */

import { toHex } from "./bytes.js";
import type { CeremonyEvent, TranscriptRecord } from "./records.js";

export type Badge = "waiting" | "committed" | "revealed" | "rejected";

export interface StakeholderView {
  id: string;
  badge: Badge;
  digestHex: string | null;
  value: bigint | null;
  rejections: number;
}

export interface CeremonyView {
  sessionId: string;
  phase: "commit" | "reveal" | "complete" | "aborted";
  modulus: bigint;
  metadata: string;
  roster: StakeholderView[];
  candidates: string[] | null;
  /** running sum of revealed values mod m; null before any reveal */
  partialSum: bigint | null;
  revealedCount: number;
  outcome: bigint | null;
  selectedCandidate: string | null;
  abortReason: string | null;
  successorHint: string | null;
  log: string[];
  lastSeq: number;
}

export function describeEvent(seq: number | bigint, event: CeremonyEvent): string {
  switch (event.type) {
    case "ceremony_created":
      return `[${seq}] ceremony created, modulus ${event.spec.modulus}, ${event.spec.roster.length} stakeholders`;
    case "commitment_submitted":
      return `[${seq}] ${event.stakeholderId} committed (${toHex(event.digest).slice(0, 16)}...)`;
    case "reveal_submitted":
      return `[${seq}] ${event.stakeholderId} revealed ${event.value}`;
    case "opening_rejected":
      return `[${seq}] opening by ${event.stakeholderId} rejected: ${event.reason}`;
    case "completed":
      return `[${seq}] completed, outcome ${event.outcome}`;
    case "aborted":
      return `[${seq}] aborted: ${event.reason}${event.successorHint ? ` (successor ${event.successorHint})` : ""}`;
  }
}

const LOG_TAIL = 50;

/** Fold one record into the view. Returns a new view; never mutates. */
export function reduce(view: CeremonyView | null, record: TranscriptRecord): CeremonyView {
  const event = record.event;
  if (event.type === "ceremony_created") {
    const spec = event.spec;
    return {
      sessionId: spec.sessionId,
      phase: "commit",
      modulus: spec.modulus,
      metadata: spec.metadata,
      roster: spec.roster.map((id) => ({
        id,
        badge: "waiting",
        digestHex: null,
        value: null,
        rejections: 0,
      })),
      candidates: spec.candidates ?? null,
      partialSum: null,
      revealedCount: 0,
      outcome: null,
      selectedCandidate: null,
      abortReason: null,
      successorHint: null,
      log: [describeEvent(record.seq, event)],
      lastSeq: Number(record.seq),
    };
  }
  if (view === null) {
    throw new Error("stream did not start with ceremony_created");
  }
  const next: CeremonyView = {
    ...view,
    roster: view.roster.map((s) => ({ ...s })),
    log: [...view.log, describeEvent(record.seq, event)].slice(-LOG_TAIL),
    lastSeq: Number(record.seq),
  };
  const member = (id: string) => next.roster.find((s) => s.id === id);

  switch (event.type) {
    case "commitment_submitted": {
      const s = member(event.stakeholderId);
      if (s !== undefined) {
        s.badge = "committed";
        s.digestHex = toHex(event.digest);
      }
      if (next.roster.every((r) => r.digestHex !== null)) next.phase = "reveal";
      break;
    }
    case "reveal_submitted": {
      const s = member(event.stakeholderId);
      if (s !== undefined) {
        s.badge = "revealed";
        s.value = event.value;
      }
      next.revealedCount += 1;
      next.partialSum = ((next.partialSum ?? 0n) + event.value) % next.modulus;
      if (next.roster.every((r) => r.value !== null)) {
        next.phase = "complete";
        next.outcome = next.partialSum;
        if (next.candidates !== null && next.outcome !== null) {
          next.selectedCandidate = next.candidates[Number(next.outcome)] ?? null;
        }
      }
      break;
    }
    case "opening_rejected": {
      const s = member(event.stakeholderId);
      if (s !== undefined && s.badge !== "revealed") {
        s.badge = "rejected";
        s.rejections += 1;
      }
      break;
    }
    case "completed":
      next.phase = "complete";
      next.outcome = event.outcome;
      break;
    case "aborted":
      next.phase = "aborted";
      next.abortReason = event.reason;
      next.successorHint = event.successorHint ?? null;
      break;
  }
  return next;
}

export function reduceAll(records: Iterable<TranscriptRecord>): CeremonyView | null {
  let view: CeremonyView | null = null;
  for (const record of records) view = reduce(view, record);
  return view;
}

/**
 * Seq-ordered ingestion for the live stream: records may arrive out of
 * order (reconnects, replays); anything ahead of the next expected seq
 * is buffered, duplicates are dropped.
 */
export class Ingest {
  private view: CeremonyView | null = null;
  private nextSeq = 0;
  private pending = new Map<number, TranscriptRecord>();

  constructor(private readonly onChange: (view: CeremonyView) => void) {}

  feed(record: TranscriptRecord): void {
    const seq = Number(record.seq);
    if (seq < this.nextSeq || this.pending.has(seq)) return;
    this.pending.set(seq, record);
    while (this.pending.has(this.nextSeq)) {
      const ready = this.pending.get(this.nextSeq)!;
      this.pending.delete(this.nextSeq);
      this.view = reduce(this.view, ready);
      this.nextSeq += 1;
      this.onChange(this.view);
    }
  }

  get current(): CeremonyView | null {
    return this.view;
  }

  get expectedSeq(): number {
    return this.nextSeq;
  }
}
