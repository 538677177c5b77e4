// Message shapes for the simulator bridge (see bridge-schema.json; the
// version in the hello frame must match SCHEMA_VERSION or the console
// drops to read-only mode).

export const SCHEMA_VERSION = 1;

export interface BridgeFrame {
  type: string;
  seq: number;
  payload: Record<string, unknown>;
  drops?: number;
}

export interface StateRecord {
  t: number;
  truth: {
    p: [number, number, number];
    q: [number, number, number, number];
    v: [number, number, number];
    w: [number, number, number];
    rpy: [number, number, number];
    depth: number;
  };
  est: {
    rpy: [number, number, number];
    depth: number | null;
    odom_p: [number, number, number];
    odom_yaw: number;
  } | null;
  cmd: { thrust: number; pitch: number; yaw: number; source: string };
  thr: [number, number, number];
  power: { v: [number, number]; charge: [number, number]; alarm: boolean };
  hri: {
    owner: string;
    follow_mode: string;
    menu_node: string;
    menu_phase: string;
    bbox: [number, number, number, number] | null;
  };
  events: Array<Record<string, unknown>>;
}

export interface HelloPayload {
  schema_version: number;
  scenario: string;
  seed: number;
}

export interface MenuFramePayload {
  lines: string[];
  t: number;
}

export type Axes = { thrust: number; pitch: number; yaw: number };

export interface LogEntry {
  t: number;
  kind: string;
  text: string;
}
