import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { utf8 } from "../src/bytes.js";
import { allOk, verdictText, verifyTranscript } from "../src/verify.js";

function fixtureBytes(name: string): Uint8Array {
  return new Uint8Array(
    readFileSync(fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url))),
  );
}

describe("clean transcripts", () => {
  it("verifies the complete five-party transcript and recomputes its outcome", async () => {
    const report = await verifyTranscript(fixtureBytes("transcript-complete.jsonl"));
    expect(report.findings).toEqual([]);
    expect(allOk(report)).toBe(true);
    expect(report.recomputedOutcome).toBe(6932980n);
    expect(verdictText(report)).toBe("OK, recomputed outcome 6932980");
  });

  it("verifies an aborted transcript with no recomputed outcome", async () => {
    const report = await verifyTranscript(fixtureBytes("transcript-aborted.jsonl"));
    expect(allOk(report)).toBe(true);
    expect(report.recomputedOutcome).toBe(null);
    expect(verdictText(report)).toBe("OK (ceremony not complete)");
  });

  it("verifies a transcript using every optional field and a rejected opening", async () => {
    const report = await verifyTranscript(fixtureBytes("transcript-variants.jsonl"));
    expect(report.findings).toEqual([]);
    expect(allOk(report)).toBe(true);
    expect(report.recomputedOutcome).toBe(3n);
  });

  it("treats empty input as vacuously consistent", async () => {
    const report = await verifyTranscript(new Uint8Array(0));
    expect(allOk(report)).toBe(true);
    expect(report.recomputedOutcome).toBe(null);
  });
});

describe("semantic forgeries with intact hash chains", () => {
  it("flags a forged outcome without blaming the chain", async () => {
    const report = await verifyTranscript(
      fixtureBytes("transcript-forged-outcome.jsonl"),
    );
    expect(report.chainOk).toBe(true);
    expect(report.phaseOrderOk).toBe(true);
    expect(report.openingsOk).toBe(true);
    expect(report.outcomeOk).toBe(false);
    expect(report.findings).toEqual([
      { seq: 11, detail: "recorded outcome 1234567 != recomputed 6932980" },
    ]);
    // replay still recovers the true outcome from the ten honest reveals
    expect(report.recomputedOutcome).toBe(6932980n);
    expect(verdictText(report)).toContain("first bad record seq 11");
  });

  it("flags a reveal replayed into the commit phase as a phase violation", async () => {
    const report = await verifyTranscript(
      fixtureBytes("transcript-early-reveal.jsonl"),
    );
    expect(report.chainOk).toBe(true);
    expect(report.phaseOrderOk).toBe(false);
    expect(report.openingsOk).toBe(true);
    expect(report.outcomeOk).toBe(true);
    expect(report.findings).toEqual([
      { seq: 2, detail: "cannot reveal in phase commit" },
    ]);
  });
});

describe("bytewise tamper detection", () => {
  it("detects a single flipped bit at sampled positions at or before the line it lands on", async () => {
    const clean = fixtureBytes("transcript-complete.jsonl");
    const lineOf: number[] = [];
    let line = 0;
    for (const byte of clean) {
      lineOf.push(line);
      if (byte === 0x0a) line += 1;
    }
    expect(await verifyTranscript(clean).then(allOk)).toBe(true);

    for (let pos = 0; pos < clean.length; pos += 13) {
      const mutated = clean.slice();
      mutated[pos] = mutated[pos]! ^ 0x01;
      const report = await verifyTranscript(mutated);
      expect(allOk(report), `undetected mutation at byte ${pos}`).toBe(false);
      const firstBad = report.findings[0]!;
      expect(
        firstBad.seq,
        `mutation at byte ${pos} (line ${lineOf[pos]}) detected too late`,
      ).toBeLessThanOrEqual(lineOf[pos]!);
    }
  });

  it("detects heavier corruption too", async () => {
    const clean = fixtureBytes("transcript-complete.jsonl");
    for (const xor of [0x80, 0xff, 0x20]) {
      const mutated = clean.slice();
      const mid = clean.length >> 1;
      mutated[mid] = mutated[mid]! ^ xor;
      expect(allOk(await verifyTranscript(mutated))).toBe(false);
    }
  });

  it("detects truncation that drops the tail of a line", async () => {
    const clean = fixtureBytes("transcript-complete.jsonl");
    const report = await verifyTranscript(clean.subarray(0, clean.length - 30));
    expect(allOk(report)).toBe(false);
    expect(report.chainOk).toBe(false);
  });

  it("reports findings for garbage without throwing", async () => {
    const inputs = [
      utf8("not json\n"),
      utf8("[]\n{}\nnull\n"),
      utf8('{"seq":true}\n'),
      new Uint8Array([0xff, 0xfe, 0x00, 0x0a]),
      utf8('{"seq":0,"prev_hash":"00","event":{},"record_hash":"00"}\n'),
    ];
    for (const data of inputs) {
      const report = await verifyTranscript(data);
      expect(report.chainOk).toBe(false);
      expect(report.findings.length).toBeGreaterThan(0);
      for (const finding of report.findings) {
        expect(finding.detail).toMatch(/malformed|sequence|prev_hash|record_hash/);
      }
    }
  });

  it("stops replay at the first unreadable record instead of guessing", async () => {
    const clean = fixtureBytes("transcript-complete.jsonl");
    const lines = Buffer.from(clean).toString("utf-8").split("\n");
    lines[1] = "garbage";
    const report = await verifyTranscript(utf8(lines.join("\n")));
    expect(report.chainOk).toBe(false);
    // replay halted before the completed record, so no outcome is vouched for
    expect(report.recomputedOutcome).toBe(null);
  });
});
