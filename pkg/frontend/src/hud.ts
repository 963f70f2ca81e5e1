/**
 * Control HUD models: dials, deadzone band, motor ribbon, freeze badge.
 *
 * Pure view models so the convention checks are testable: the ribbon
 * color is exactly the frame's motor_active flag, the deadzone band is
 * +-zeta around the reference, and the freeze badge mirrors the frozen
 * flag.
 */

import { ribbonColor } from "./protocol.js";
import type { SessionFrame } from "./protocol.js";

export interface RibbonSegment {
  t: number;
  color: string;
  active: boolean;
}

export class RibbonModel {
  readonly segments: RibbonSegment[] = [];

  constructor(readonly capacity = 3600) {}

  push(frame: SessionFrame): RibbonSegment {
    const segment = {
      t: frame.t,
      color: ribbonColor(frame),
      active: frame.motor_active,
    };
    this.segments.push(segment);
    if (this.segments.length > this.capacity) {
      this.segments.splice(0, this.segments.length - this.capacity);
    }
    return segment;
  }

  clear(): void {
    this.segments.length = 0;
  }
}

export interface HudState {
  phi: number;
  phiRef: number;
  eps: number;
  bandLow: number; // reference - zeta
  bandHigh: number; // reference + zeta
  insideDeadzone: boolean;
  motorActive: boolean;
  frozen: boolean;
  paused: boolean;
  inTolerance: boolean;
  taskDone: boolean;
}

export function hudState(frame: SessionFrame, zeta: number, paused = false): HudState {
  return {
    phi: frame.phi,
    phiRef: frame.phi_ref,
    eps: frame.eps,
    bandLow: frame.phi_ref - zeta,
    bandHigh: frame.phi_ref + zeta,
    insideDeadzone: Math.abs(frame.eps) <= zeta,
    motorActive: frame.motor_active,
    frozen: frame.frozen,
    paused,
    inTolerance: frame.in_tolerance,
    taskDone: frame.task_done,
  };
}
