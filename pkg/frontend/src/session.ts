// SessionModel: everything the console knows, fed only by bridge frames.
// No client-side physics; closing the console can never change a run.

import {
  Axes,
  BridgeFrame,
  HelloPayload,
  LogEntry,
  MenuFramePayload,
  SCHEMA_VERSION,
  StateRecord,
} from "./types.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;
export type Scheduler = (fn: () => void, ms: number) => void;

export type Status = "connecting" | "connected" | "read_only" | "reconnecting" | "refused";

const EVENT_LOG_LIMIT = 200;
const TRACK_LIMIT = 3000; // points per trajectory track
export const BACKOFF_INITIAL_MS = 500;
export const BACKOFF_CAP_MS = 10_000;

const clamp = (v: number) => Math.min(1, Math.max(-1, v));

export class SessionModel {
  status: Status = "connecting";
  schemaVersion: number | null = null;
  scenario = "";
  latest: StateRecord | null = null;
  menuLines: string[] = [];
  eventLog: LogEntry[] = [];
  drops = 0;
  stateFrames = 0;
  backoffMs = BACKOFF_INITIAL_MS;
  truthTrack: Array<[number, number]> = [];
  odomTrack: Array<[number, number]> = [];
  depthTrace: Array<[number, number]> = [];
  pitchTrace: Array<[number, number]> = [];
  banner = "";

  private socket: SocketLike | null = null;
  private outSeq = 0;
  private closed = false;

  constructor(
    readonly url: string,
    private readonly factory: SocketFactory,
    private readonly schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
  ) {}

  connect(): void {
    this.status = this.stateFrames > 0 ? "reconnecting" : "connecting";
    const ws = this.factory(this.url);
    this.socket = ws;
    ws.onopen = () => {
      this.backoffMs = BACKOFF_INITIAL_MS;
    };
    ws.onmessage = (ev) => this.handleRaw(String(ev.data));
    ws.onerror = () => {};
    ws.onclose = () => {
      this.socket = null;
      if (this.closed || this.status === "refused") return;
      this.status = "reconnecting";
      const wait = this.backoffMs;
      this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_CAP_MS);
      this.schedule(() => {
        if (!this.closed) this.connect();
      }, wait);
    };
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }

  get connected(): boolean {
    return this.status === "connected" || this.status === "read_only";
  }

  get readOnly(): boolean {
    return this.status !== "connected";
  }

  // ------------------------------------------------------------- inbound

  handleRaw(data: string): void {
    let frame: BridgeFrame;
    try {
      frame = JSON.parse(data) as BridgeFrame;
    } catch {
      this.logEvent(0, "error", "unparseable frame from bridge");
      return;
    }
    this.handleFrame(frame);
  }

  handleFrame(frame: BridgeFrame): void {
    switch (frame.type) {
      case "hello": {
        const hello = frame.payload as unknown as HelloPayload;
        this.schemaVersion = hello.schema_version;
        this.scenario = hello.scenario ?? "";
        if (hello.schema_version !== SCHEMA_VERSION) {
          this.status = "read_only";
          this.banner = `schema v${hello.schema_version} != console v${SCHEMA_VERSION}: read-only`;
        } else {
          this.status = "connected";
          this.banner = "";
        }
        this.logEvent(0, "hello", `scenario ${this.scenario}, schema v${hello.schema_version}`);
        break;
      }
      case "state": {
        const rec = frame.payload as unknown as StateRecord;
        this.latest = rec;
        this.stateFrames += 1;
        this.drops = frame.drops ?? this.drops;
        this.pushTrack(this.truthTrack, rec.truth.p[0], rec.truth.p[1]);
        if (rec.est) this.pushTrack(this.odomTrack, rec.est.odom_p[0], rec.est.odom_p[1]);
        this.pushTrace(this.depthTrace, rec.t, rec.truth.depth);
        this.pushTrace(this.pitchTrace, rec.t, (rec.truth.rpy[1] * 180) / Math.PI);
        for (const e of rec.events) {
          const kind = String(e.type ?? "event");
          if (kind === "menu_frame") continue; // rendered separately
          this.logEvent(rec.t, kind, summarizeEvent(e));
        }
        break;
      }
      case "menu_frame": {
        const mf = frame.payload as unknown as MenuFramePayload;
        this.menuLines = mf.lines;
        break;
      }
      case "event_ack": {
        this.logEvent(this.latest?.t ?? 0, "ack", `input #${frame.payload.ack_seq} accepted`);
        break;
      }
      case "error": {
        const reason = String(frame.payload.reason ?? "unknown");
        if (reason.includes("another operator")) {
          this.status = "refused";
          this.banner = "bridge refused: another operator is connected";
        }
        this.logEvent(this.latest?.t ?? 0, "error", reason);
        break;
      }
      default:
        this.logEvent(this.latest?.t ?? 0, "warn", `unknown frame type ${frame.type}`);
    }
  }

  // ------------------------------------------------------------ outbound

  private sendFrame(type: string, payload: Record<string, unknown>): boolean {
    if (!this.socket || this.readOnly) return false;
    this.outSeq += 1;
    this.socket.send(JSON.stringify({ type, seq: this.outSeq, payload }));
    return true;
  }

  sendCommand(axes: Axes): boolean {
    return this.sendFrame("command", {
      thrust: clamp(axes.thrust),
      pitch: clamp(axes.pitch),
      yaw: clamp(axes.yaw),
    });
  }

  sendTag(id: number): boolean {
    if (!Number.isInteger(id) || id < 0 || id > 9) return false;
    return this.sendFrame("menu_input", { kind: "tag", id });
  }

  sendGesture(token: string): boolean {
    const tokens = ["ok", "zero", "one", "two", "three", "four", "five"];
    if (!tokens.includes(token)) return false;
    return this.sendFrame("menu_input", { kind: "gesture", token });
  }

  sendCancel(): boolean {
    return this.sendFrame("menu_input", { kind: "cancel" });
  }

  sendPrimitive(kind: string, params: Record<string, unknown>): boolean {
    return this.sendFrame("primitive", { kind, ...params });
  }

  sendControl(action: string, params: Record<string, unknown> = {}): boolean {
    return this.sendFrame("scenario_control", { action, ...params });
  }

  // ------------------------------------------------------------- helpers

  private pushTrack(track: Array<[number, number]>, x: number, y: number): void {
    track.push([x, y]);
    if (track.length > TRACK_LIMIT) track.shift();
  }

  private pushTrace(trace: Array<[number, number]>, t: number, v: number): void {
    trace.push([t, v]);
    if (trace.length > TRACK_LIMIT) trace.shift();
  }

  logEvent(t: number, kind: string, text: string): void {
    this.eventLog.push({ t, kind, text });
    if (this.eventLog.length > EVENT_LOG_LIMIT) this.eventLog.shift();
  }
}

function summarizeEvent(e: Record<string, unknown>): string {
  switch (e.type) {
    case "ownership":
      return `command channel ${e.from} -> ${e.to}`;
    case "menu_action":
      return `menu "${e.label}" -> ${e.target}`;
    case "primitive":
      return `${e.kind ?? "primitive"} ${e.status}`;
    case "rcvm":
      return `motion message ${e.name ?? ""} ${e.status}`;
    case "power":
      return `power ${e.status}`;
    case "event":
      return `${e.kind} (${e.source})`;
    default:
      return JSON.stringify(e);
  }
}
