/**
 * Trunk input capture: vertical drag and arrow keys to trunk flexion.
 *
 * Pure state machine (no DOM) so the mapping is unit-testable: the UI
 * layer feeds pointer deltas and key state, and `tick` emits `{t, phi}`
 * samples with monotone timestamps at the configured rate.  Dragging
 * down leans forward (positive flexion).
 */

export interface TrunkInputOptions {
  sensitivity: number; // deg per pixel of vertical drag
  keyRate: number; // deg/s while an arrow key is held
  emitHz: number; // input sample rate (>= 30 per the session contract)
  minAngle: number;
  maxAngle: number;
}

export const DEFAULT_INPUT_OPTIONS: TrunkInputOptions = {
  sensitivity: 0.1,
  keyRate: 10.0,
  emitHz: 60.0,
  minAngle: -20.0,
  maxAngle: 40.0,
};

export interface TrunkSample {
  t: number;
  phi: number;
}

export class TrunkInput {
  private phi: number;
  private keyDirection = 0;
  private lastEmit: number | null = null;
  private lastKeyIntegration: number | null = null;

  constructor(
    initialAngle: number,
    readonly options: TrunkInputOptions = DEFAULT_INPUT_OPTIONS,
  ) {
    this.phi = initialAngle;
  }

  get angle(): number {
    return this.phi;
  }

  /** Vertical drag: positive dyPixels (downward) leans forward. */
  onDrag(dyPixels: number): void {
    this.set(this.phi + dyPixels * this.options.sensitivity);
  }

  /** Arrow keys: +1 leans forward, -1 back, 0 released. */
  setKeyDirection(direction: -1 | 0 | 1): void {
    this.keyDirection = direction;
  }

  set(angle: number): void {
    this.phi = Math.min(this.options.maxAngle, Math.max(this.options.minAngle, angle));
  }

  /**
   * Advance to wall time tMs; returns a sample when the emit period has
   * elapsed (always emits, even without input, so the stream is a
   * constant-rate ZOH of the trunk angle).  Timestamps are strictly
   * monotone.
   */
  tick(tMs: number): TrunkSample | null {
    if (this.lastKeyIntegration === null) {
      this.lastKeyIntegration = tMs;
    }
    const dtKey = (tMs - this.lastKeyIntegration) / 1000;
    if (dtKey > 0) {
      if (this.keyDirection !== 0) {
        this.set(this.phi + this.keyDirection * this.options.keyRate * dtKey);
      }
      this.lastKeyIntegration = tMs;
    }
    const period = 1000 / this.options.emitHz;
    if (this.lastEmit !== null && tMs - this.lastEmit < period) {
      return null;
    }
    if (this.lastEmit !== null && tMs <= this.lastEmit) {
      return null; // enforce monotone timestamps
    }
    this.lastEmit = tMs;
    return { t: tMs / 1000, phi: this.phi };
  }
}
