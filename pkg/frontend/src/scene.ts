/**
 * Scene geometry: the stick-figure linkage recomputed from each frame.
 *
 * The forward kinematics here mirror the simulator's convention exactly
 * (a link at cumulative angle a, degrees from vertical and forward
 * positive, points along (sin a, cos a)), so the rendered joints agree
 * with the streamed pen position to numerical precision — verified by
 * the tests against recorded frames.
 */

import type { SessionFrame, Welcome } from "./protocol.js";

export type Point = [number, number];

export interface SceneConfig {
  segmentLengths: [number, number, number];
  elbowMountOffset: number;
  hip: Point;
  tableZ: number;
  lineStartY: number;
  lineLength: number;
}

export function sceneConfigFromWelcome(welcome: Welcome): SceneConfig {
  return {
    segmentLengths: welcome.segment_lengths,
    elbowMountOffset: welcome.elbow_mount_offset,
    hip: welcome.hip,
    tableZ: welcome.table_z,
    lineStartY: welcome.line_start_y,
    lineLength: welcome.line_length,
  };
}

const D2R = Math.PI / 180;

function unit(angleDeg: number): Point {
  return [Math.sin(angleDeg * D2R), Math.cos(angleDeg * D2R)];
}

/** Hip, shoulder, elbow, pen positions (m) for one frame. */
export function linkagePoints(frame: SessionFrame, scene: SceneConfig): [Point, Point, Point, Point] {
  const [lt, lu, lf] = scene.segmentLengths;
  const a1 = frame.phi;
  const a2 = a1 + frame.theta;
  const a3 = a2 + frame.beta + scene.elbowMountOffset;
  const hip: Point = [scene.hip[0], scene.hip[1]];
  const u1 = unit(a1);
  const u2 = unit(a2);
  const u3 = unit(a3);
  const shoulder: Point = [hip[0] + lt * u1[0], hip[1] + lt * u1[1]];
  const elbow: Point = [shoulder[0] + lu * u2[0], shoulder[1] + lu * u2[1]];
  const pen: Point = [elbow[0] + lf * u3[0], elbow[1] + lf * u3[1]];
  return [hip, shoulder, elbow, pen];
}

/** World (y forward, z up, meters) to canvas pixels. */
export class Viewport {
  constructor(
    readonly widthPx: number,
    readonly heightPx: number,
    readonly worldMin: Point = [-0.35, -0.1],
    readonly worldMax: Point = [0.75, 1.25],
  ) {}

  get scale(): number {
    return Math.min(
      this.widthPx / (this.worldMax[0] - this.worldMin[0]),
      this.heightPx / (this.worldMax[1] - this.worldMin[1]),
    );
  }

  toPx(p: Point): Point {
    return [
      (p[0] - this.worldMin[0]) * this.scale,
      this.heightPx - (p[1] - this.worldMin[1]) * this.scale,
    ];
  }
}

/** Pen-contact trace with a bounded number of retained points. */
export class TraceBuffer {
  readonly points: Point[] = [];

  constructor(readonly capacity = 5000) {}

  push(frame: SessionFrame): void {
    if (!frame.in_contact) return;
    this.points.push([frame.pen_y, frame.pen_z]);
    if (this.points.length > this.capacity) {
      this.points.splice(0, this.points.length - this.capacity);
    }
  }

  clear(): void {
    this.points.length = 0;
  }
}

/** Line-task overlay: endpoints A, B, the optional extended target B'. */
export function lineOverlay(scene: SceneConfig): { a: Point; b: Point; bPrime: Point; tolerance: number } {
  const a: Point = [scene.lineStartY, scene.tableZ];
  const b: Point = [scene.lineStartY + scene.lineLength, scene.tableZ];
  // cosmetic marker for the extended-target idea: 15% past B
  const bPrime: Point = [scene.lineStartY + 1.15 * scene.lineLength, scene.tableZ];
  return { a, b, bPrime, tolerance: 0.01 };
}
