// End-to-end against a live simulator: spawns the Python CLI with a bridge
// port and drives the real SessionModel over a real WebSocket.

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterEach, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { SessionModel, SocketLike } from "../src/session.js";
import { StateRecord } from "../src/types.js";

const REPO = resolve(__dirname, "..", "..");
let PORT = 19200 + Math.floor(Math.random() * 200);

const procs: ChildProcess[] = [];
afterEach(() => {
  for (const p of procs.splice(0)) p.kill("SIGKILL");
});

function startSim(scenario: string, port: number, extra: string[] = []): Promise<ChildProcess> {
  const log = join(mkdtempSync(join(tmpdir(), "loco-e2e-")), "run.jsonl");
  const proc = spawn(
    "python3",
    ["-m", "locosim.harness.cli", "run", scenario, "--bridge-port", String(port), "--realtime", "--log", log, ...extra],
    { cwd: REPO, stdio: ["ignore", "pipe", "pipe"], env: { ...process.env, PYTHONUNBUFFERED: "1" } },
  );
  procs.push(proc);
  return new Promise((resolvePromise, reject) => {
    const timer = setTimeout(() => reject(new Error("sim did not start")), 15000);
    proc.stdout!.on("data", (chunk: Buffer) => {
      if (chunk.toString().includes("bridge listening")) {
        clearTimeout(timer);
        resolvePromise(proc);
      }
    });
    proc.stderr!.on("data", () => {});
    proc.on("exit", (code) => reject(new Error(`sim exited early (${code})`)));
  });
}

function nodeSocketFactory(url: string): SocketLike {
  return new WebSocket(url) as unknown as SocketLike;
}

function connectSession(port: number): SessionModel {
  const session = new SessionModel(`ws://127.0.0.1:${port}`, nodeSocketFactory);
  session.connect();
  return session;
}

async function waitFor(cond: () => boolean, ms: number, what: string): Promise<void> {
  const t0 = Date.now();
  while (Date.now() - t0 < ms) {
    if (cond()) return;
    await new Promise((r) => setTimeout(r, 25));
  }
  throw new Error(`timeout waiting for ${what}`);
}

function menuActions(session: SessionModel): string[] {
  return session.eventLog.filter((e) => e.kind === "menu_action").map((e) => e.text);
}

describe("console against a live simulator", () => {
  it(
    "connects, renders >=5 Hz, fires item 2 by tag and by Ok+digit, teleops forward",
    async () => {
      const port = PORT++;
      await startSim(join(REPO, "scenarios", "neutral_hold.yaml"), port, ["--duration", "60"]);
      const session = connectSession(port);

      await waitFor(() => session.status === "connected", 8000, "hello");
      expect(session.schemaVersion).toBe(1);

      // state frames at >= 5 Hz while the sim runs in realtime
      const before = session.stateFrames;
      await new Promise((r) => setTimeout(r, 2000));
      const rate = (session.stateFrames - before) / 2.0;
      expect(rate).toBeGreaterThanOrEqual(5);
      expect(session.menuLines.length).toBeGreaterThan(0); // OLED mirror live

      // item 2 via flashcard
      session.sendTag(2);
      await waitFor(() => menuActions(session).length >= 1, 5000, "tag action");
      expect(menuActions(session)[0]).toContain("pilot.square");
      await waitFor(() => session.eventLog.some((e) => e.kind === "ack"), 2000, "ack rendered");

      // cancel the running action, then the same item via Ok + digit
      session.sendCancel();
      await waitFor(() => session.latest?.hri.menu_phase === "idle", 5000, "menu idle");
      session.sendGesture("ok");
      await waitFor(() => session.latest?.hri.menu_phase === "armed", 5000, "armed");
      session.sendGesture("two");
      await waitFor(() => menuActions(session).length >= 2, 5000, "gesture action");
      expect(menuActions(session)[1]).toContain("pilot.square");
      session.sendCancel();

      // teleop: stream W at 10 Hz; forward motion within 1 s of sim time
      const t0 = session.latest!.t;
      const x0 = session.latest!.truth.p[0];
      const ticker = setInterval(() => session.sendCommand({ thrust: 1, pitch: 0, yaw: 0 }), 100);
      try {
        await waitFor(
          () => session.latest !== null && session.latest.t >= t0 + 1.0,
          6000,
          "one second of sim time",
        );
      } finally {
        clearInterval(ticker);
      }
      const moved = session.latest!.truth.p[0] - x0;
      expect(moved).toBeGreaterThan(0.05);
      expect(session.truthTrack.length).toBeGreaterThan(10); // trajectory panel has the track

      session.sendControl("stop");
      session.close();
    },
    40000,
  );

  it(
    "shows the battery alarm when a tube crosses 9.6 V in an accelerated drain",
    async () => {
      const port = PORT++;
      await startSim(join(REPO, "scenarios", "drain_alarm.yaml"), port);
      const session = connectSession(port);
      await waitFor(() => session.status === "connected", 8000, "hello");

      await waitFor(() => session.latest?.power.alarm === true, 20000, "alarm frame");
      const rec = session.latest as StateRecord;
      expect(Math.min(...rec.power.v)).toBeLessThanOrEqual(9.6 + 1e-9);
      session.close();
    },
    40000,
  );
});
