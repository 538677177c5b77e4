// Console bootstrap: wires the session model, teleop loop, input palettes,
// and render ticks. Bridge URL comes from ?bridge=ws://host:port (default
// ws://127.0.0.1:8765).

import { SessionModel, SocketLike } from "./session.js";
import { TeleopAxes } from "./teleop.js";
import { Panels, renderAll } from "./views.js";

const TELEOP_SEND_HZ = 10;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function bridgeUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("bridge") ?? "ws://127.0.0.1:8765";
}

function main(): void {
  const session = new SessionModel(bridgeUrl(), (url) => new WebSocket(url) as unknown as SocketLike);
  session.connect();

  const panels: Panels = {
    status: el("status"),
    banner: el("banner"),
    oled: el("oled"),
    hriBadge: el("hri-badge"),
    battery: el("battery"),
    batteryFill: el("battery-fill"),
    trajectory: el<HTMLCanvasElement>("trajectory"),
    depthChart: el<HTMLCanvasElement>("depth-chart"),
    pitchChart: el<HTMLCanvasElement>("pitch-chart"),
    camera: el<HTMLCanvasElement>("camera"),
    eventLog: el("event-log"),
    telemetry: el("telemetry"),
  };

  // teleop keyboard loop at 10 Hz
  const teleop = new TeleopAxes();
  window.addEventListener("keydown", (e) => {
    if ((e.target as HTMLElement | null)?.tagName === "INPUT") return;
    teleop.keyDown(e.key);
  });
  window.addEventListener("keyup", (e) => teleop.keyUp(e.key));
  setInterval(() => {
    const axes = teleop.commandToSend(1 / TELEOP_SEND_HZ);
    if (axes) session.sendCommand(axes);
  }, 1000 / TELEOP_SEND_HZ);

  // flashcard buttons 0-9
  const tags = el("tags");
  for (let i = 0; i <= 9; i++) {
    const b = document.createElement("button");
    b.textContent = `Tag ${i}`;
    b.addEventListener("click", () => session.sendTag(i));
    tags.appendChild(b);
  }

  // gesture palette: the two-step Ok + digit protocol
  const gestures = el("gestures");
  for (const token of ["ok", "zero", "one", "two", "three", "four", "five"]) {
    const b = document.createElement("button");
    b.textContent = token;
    b.addEventListener("click", () => session.sendGesture(token));
    gestures.appendChild(b);
  }
  el("cancel").addEventListener("click", () => session.sendCancel());
  el("stop").addEventListener("click", () => session.sendControl("stop"));
  el("follower").addEventListener("click", () => session.sendControl("start_follower"));

  const render = () => {
    renderAll(session, panels);
    requestAnimationFrame(render);
  };
  requestAnimationFrame(render);
}

main();
