/**
 * Wire protocol mirror: one JSON object per line / WebSocket text frame.
 *
 * Message catalogue and field semantics are documented in
 * ../docs/formats.md; this module parses, validates, and types them for
 * the sandbox.
 */

export interface SessionFrame {
  t: number;
  phi: number;
  phi_ref: number;
  eps: number;
  theta: number;
  beta: number;
  pen_y: number;
  pen_z: number;
  in_contact: boolean;
  motor_active: boolean;
  frozen: boolean;
  target_index: number;
  task_started: boolean;
  task_done: boolean;
  in_tolerance: boolean;
}

export interface Welcome {
  type: "welcome";
  mode: "ceac" | "ccc";
  task: string;
  sample_rate: number;
  stance_lean: number;
  calibration_angle: number;
  deadzone_zeta: number;
  cutoff_fc: number;
  gain_lambda: number;
  table_z: number;
  line_start_y: number;
  line_length: number;
  segment_lengths: [number, number, number];
  elbow_mount_offset: number;
  hip: [number, number];
}

export interface MetricReport {
  task_kind: string;
  completed: boolean;
  completion_time: number | null;
  precision_mm: number | null;
  plr: number | null;
  sparc: number | null;
  rom_trunk: number | null;
  rom_shoulder: number | null;
  rom_elbow: number | null;
  total_trunk: number | null;
  total_shoulder: number | null;
  total_elbow: number | null;
  sjvi: number | null;
}

export type ServerMessage =
  | Welcome
  | ({ type: "frame" } & SessionFrame)
  | { type: "paused" }
  | { type: "resumed" }
  | { type: "metrics"; report: MetricReport }
  | { type: "ended"; log_path: string }
  | { type: "error"; message: string };

const FRAME_FLOATS = [
  "t",
  "phi",
  "phi_ref",
  "eps",
  "theta",
  "beta",
  "pen_y",
  "pen_z",
] as const;
const FRAME_BOOLS = [
  "in_contact",
  "motor_active",
  "frozen",
  "task_started",
  "task_done",
  "in_tolerance",
] as const;

export function parseMessage(line: string): ServerMessage {
  const trimmed = line.trim();
  if (trimmed.length === 0) throw new Error("empty message");
  let payload: unknown;
  try {
    payload = JSON.parse(trimmed);
  } catch (err) {
    throw new Error(`malformed message: ${err}`);
  }
  if (typeof payload !== "object" || payload === null || !("type" in payload)) {
    throw new Error("message must be an object with a type");
  }
  const msg = payload as Record<string, unknown>;
  if (msg.type === "frame") {
    for (const name of FRAME_FLOATS) {
      const value = msg[name];
      if (typeof value !== "number" || !Number.isFinite(value)) {
        throw new Error(`frame field ${name} must be a finite number`);
      }
    }
    for (const name of FRAME_BOOLS) {
      msg[name] = Boolean(msg[name]);
    }
    msg.target_index = Math.trunc(Number(msg.target_index ?? 0));
  }
  return msg as unknown as ServerMessage;
}

export function encodeMessage(payload: Record<string, unknown>): string {
  return JSON.stringify(payload) + "\n";
}

export function inputMessage(t: number, phi: number): string {
  return encodeMessage({ type: "input", t, phi });
}

/** Ribbon convention: green while the elbow motor is active, red otherwise. */
export const RIBBON_ACTIVE = "#2e9e4f";
export const RIBBON_INACTIVE = "#c24038";

export function ribbonColor(frame: Pick<SessionFrame, "motor_active">): string {
  return frame.motor_active ? RIBBON_ACTIVE : RIBBON_INACTIVE;
}
