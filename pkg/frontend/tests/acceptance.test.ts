/**
 * Cross-checks against the primary pipeline on a recorded session:
 * the summary card must carry exactly the numbers the CLI computes on
 * the same saved log, and the HUD ribbon color must equal the frame's
 * motor_active flag for every streamed frame.
 */

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";

import { RibbonModel } from "../src/hud.js";
import { RIBBON_ACTIVE, RIBBON_INACTIVE, parseMessage } from "../src/protocol.js";
import type { MetricReport } from "../src/protocol.js";
import { summaryCard } from "../src/summary.js";
import { recordedFrames } from "./protocol.test.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "..", "fixtures");

function readJson(name: string): unknown {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8"));
}

describe("sandbox cross-checks against the primary pipeline", () => {
  it("summary card numbers equal the CLI metrics on the same saved log", () => {
    const serviceMsg = readJson("session_metrics.json") as { report: MetricReport };
    const cli = readJson("cli_metrics.json") as Record<string, number | boolean | null>;
    const card = summaryCard(serviceMsg.report);
    expect(card.empty).toBe(false);

    const status = card.rows.find((r) => r.key === "completed")!;
    expect(status.value).toBe(cli.completed);
    expect(status.formatted).toBe("completed");

    let compared = 0;
    for (const row of card.rows) {
      if (row.key === "completed") continue;
      expect(row.value).toBe(cli[row.key]); // exact float match, no rounding
      compared += 1;
    }
    expect(compared).toBeGreaterThanOrEqual(6); // time, precision, sparc, roms, totals
  });

  it("HUD ribbon color equals motor_active for every streamed frame", () => {
    const frames = recordedFrames();
    const ribbon = new RibbonModel(10_000);
    for (const frame of frames) {
      const segment = ribbon.push(frame);
      expect(segment.color).toBe(frame.motor_active ? RIBBON_ACTIVE : RIBBON_INACTIVE);
      expect(segment.active).toBe(frame.motor_active);
    }
    expect(ribbon.segments.length).toBe(frames.length);
    // the recorded trial actually exercises both ribbon states
    expect(frames.some((f) => f.motor_active)).toBe(true);
    expect(frames.some((f) => !f.motor_active)).toBe(true);
  });

  it("empty session renders a no-data card", () => {
    const card = summaryCard(null);
    expect(card.empty).toBe(true);
    expect(card.rows[0]!.formatted).toBe("no data");
  });

  it("back-to-back CEAC and CCC cards stay independent", () => {
    const report = (readJson("session_metrics.json") as { report: MetricReport }).report;
    const ceac = summaryCard(report, "CEAC trial");
    const ccc = summaryCard(null, "CCC trial");
    expect(ceac.title).toBe("CEAC trial");
    expect(ccc.title).toBe("CCC trial");
    expect(ceac.empty).toBe(false);
    expect(ccc.empty).toBe(true);
  });

  it("frame messages parse to the documented shape", () => {
    const first = parseMessage(
      readFileSync(join(FIXTURES, "session_frames.ndjson"), "utf-8").split("\n")[0]!,
    );
    expect(first.type).toBe("frame");
  });
});
