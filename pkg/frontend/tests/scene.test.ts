import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";

import { TraceBuffer, Viewport, lineOverlay, linkagePoints, sceneConfigFromWelcome } from "../src/scene.js";
import type { Welcome } from "../src/protocol.js";
import { recordedFrames } from "./protocol.test.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "..", "fixtures");

function welcome(): Welcome {
  return JSON.parse(readFileSync(join(FIXTURES, "session_welcome.json"), "utf-8")) as Welcome;
}

describe("scene geometry", () => {
  it("linkage pen position equals the streamed pen for every recorded frame", () => {
    const scene = sceneConfigFromWelcome(welcome());
    const vp = new Viewport(640, 640);
    // within pixel rounding: half a pixel in world units
    const tolerance = 0.5 / vp.scale;
    for (const frame of recordedFrames()) {
      const [, , , pen] = linkagePoints(frame, scene);
      expect(Math.abs(pen[0] - frame.pen_y)).toBeLessThan(tolerance);
      expect(Math.abs(pen[1] - frame.pen_z)).toBeLessThan(tolerance);
      // the chain itself is exact to floating point
      expect(pen[0]).toBeCloseTo(frame.pen_y, 9);
      expect(pen[1]).toBeCloseTo(frame.pen_z, 9);
    }
  });

  it("link lengths are preserved at every frame", () => {
    const scene = sceneConfigFromWelcome(welcome());
    const [lt, lu, lf] = scene.segmentLengths;
    for (const frame of recordedFrames().filter((_, i) => i % 20 === 0)) {
      const [hip, shoulder, elbow, pen] = linkagePoints(frame, scene);
      expect(Math.hypot(shoulder[0] - hip[0], shoulder[1] - hip[1])).toBeCloseTo(lt, 12);
      expect(Math.hypot(elbow[0] - shoulder[0], elbow[1] - shoulder[1])).toBeCloseTo(lu, 12);
      expect(Math.hypot(pen[0] - elbow[0], pen[1] - elbow[1])).toBeCloseTo(lf, 12);
    }
  });

  it("trace buffer keeps only contact points, bounded", () => {
    const frames = recordedFrames();
    const buffer = new TraceBuffer(50);
    for (const frame of frames) buffer.push(frame);
    const contacts = frames.filter((f) => f.in_contact).length;
    expect(buffer.points.length).toBe(Math.min(50, contacts));
  });

  it("line overlay spans the configured segment", () => {
    const scene = sceneConfigFromWelcome(welcome());
    const overlay = lineOverlay(scene);
    expect(overlay.b[0] - overlay.a[0]).toBeCloseTo(scene.lineLength, 12);
    expect(overlay.a[1]).toBe(scene.tableZ);
    expect(overlay.bPrime[0]).toBeGreaterThan(overlay.b[0]);
  });

  it("viewport maps world to pixels with z up", () => {
    const vp = new Viewport(640, 640);
    const low = vp.toPx([0.2, 0.0]);
    const high = vp.toPx([0.2, 1.0]);
    expect(high[1]).toBeLessThan(low[1]); // larger z is higher on screen
  });
});
