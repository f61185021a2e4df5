/**
 * Wire protocol with the simulation server: JSON text frames over WebSocket.
 * Everything the UI shows derives from these frames and nothing else.
 */

export const PROTOCOL_SCHEMA = 1;

export interface StateFrame {
  t: "state";
  k: number;
  x1x: number; x1y: number;
  x2x: number; x2y: number;
  sx: number; sy: number;
  shx: number; shy: number;
  u1x: number; u1y: number;
  u2x: number; u2y: number;
  d12: number; d1s: number; d2s: number;
  hx: number; hy: number;
  ehat: number; es: number;
  impulse: number;
  sat1: number; sat2: number;
  cooldown: number;
  paused: boolean;
  manual: boolean;
}

export interface GateCheck {
  verdict: "pass" | "fail" | "warn";
  value: number;
  condition: string;
}

export interface HelloFrame {
  t: "hello";
  schema: number;
  config: unknown;
  seed: number;
  tick_hz: number;
  max_manual_speed: number;
  gap_min: number;
  radius: number;
  gates: Record<string, GateCheck>;
  steering: boolean;
  history: StateFrame[];
}

export interface WarningFrame { t: "warning"; message: string; }
export interface PausedFrame { t: "paused"; paused: boolean; }
export interface ResetFrame { t: "reset"; }
export interface LockFrame { t: "lock"; steering: boolean; }

export type ServerFrame =
  | StateFrame | HelloFrame | WarningFrame | PausedFrame | ResetFrame | LockFrame;

const STATE_NUMBER_FIELDS: (keyof StateFrame)[] = [
  "k", "x1x", "x1y", "x2x", "x2y", "sx", "sy", "shx", "shy",
  "u1x", "u1y", "u2x", "u2y", "d12", "d1s", "d2s", "hx", "hy",
  "ehat", "es", "impulse", "sat1", "sat2", "cooldown",
];

function isStateShaped(obj: Record<string, unknown>): boolean {
  return STATE_NUMBER_FIELDS.every((f) => typeof obj[f] === "number" && isFinite(obj[f] as number));
}

/** Parse one incoming frame; null means "skip it" (malformed or unknown). */
export function parseFrame(raw: string): ServerFrame | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const rec = obj as Record<string, unknown>;
  switch (rec.t) {
    case "state":
      return isStateShaped(rec) ? (rec as unknown as StateFrame) : null;
    case "hello":
      if (typeof rec.schema !== "number" || !Array.isArray(rec.history)) return null;
      return rec as unknown as HelloFrame;
    case "warning":
      return typeof rec.message === "string" ? (rec as unknown as WarningFrame) : null;
    case "paused":
      return typeof rec.paused === "boolean" ? (rec as unknown as PausedFrame) : null;
    case "reset":
      return { t: "reset" };
    case "lock":
      return typeof rec.steering === "boolean" ? (rec as unknown as LockFrame) : null;
    default:
      return null;
  }
}

export interface SteerMessage { t: "steer"; vx: number | null; vy: number | null; }

export function steerMessage(vx: number | null, vy: number | null): string {
  return JSON.stringify({ t: "steer", vx, vy });
}

export const BOOST_MESSAGE = JSON.stringify({ t: "boost" });
export const PAUSE_MESSAGE = JSON.stringify({ t: "pause" });
export const RESET_MESSAGE = JSON.stringify({ t: "reset" });
