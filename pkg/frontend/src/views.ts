// Rendering: pure functions of (SessionModel, DOM targets). Missing data
// renders as blanks, never throws.

import { SessionModel } from "./session.js";

export interface Panels {
  status: HTMLElement;
  banner: HTMLElement;
  oled: HTMLElement;
  hriBadge: HTMLElement;
  battery: HTMLElement;
  batteryFill: HTMLElement;
  trajectory: HTMLCanvasElement;
  depthChart: HTMLCanvasElement;
  pitchChart: HTMLCanvasElement;
  camera: HTMLCanvasElement;
  eventLog: HTMLElement;
  telemetry: HTMLElement;
}

export function renderAll(session: SessionModel, p: Panels): void {
  renderStatus(session, p);
  renderOled(session, p.oled);
  renderBattery(session, p);
  renderHriBadge(session, p.hriBadge);
  renderTrajectory(session, p.trajectory);
  renderStrip(p.depthChart, session.depthTrace, "depth m", true);
  renderStrip(p.pitchChart, session.pitchTrace, "pitch deg", false);
  renderCamera(session, p.camera);
  renderEventLog(session, p.eventLog);
  renderTelemetry(session, p.telemetry);
}

function renderStatus(session: SessionModel, p: Panels): void {
  const v = session.schemaVersion === null ? "" : ` (schema v${session.schemaVersion})`;
  p.status.textContent = `${session.status}${v} ${session.scenario}`;
  p.status.className = `status status-${session.status}`;
  p.banner.textContent = session.banner;
  p.banner.style.display = session.banner ? "block" : "none";
}

function renderOled(session: SessionModel, el: HTMLElement): void {
  el.textContent = session.menuLines.join("\n");
}

function renderBattery(session: SessionModel, p: Panels): void {
  const rec = session.latest;
  if (!rec) {
    p.battery.textContent = "battery: -";
    return;
  }
  const [vl, vr] = rec.power.v;
  const frac = (rec.power.charge[0] + rec.power.charge[1]) / 32.0;
  p.battery.textContent = `L ${vl.toFixed(2)} V  R ${vr.toFixed(2)} V${rec.power.alarm ? "  LOW VOLTAGE" : ""}`;
  p.battery.classList.toggle("alarm", rec.power.alarm);
  p.batteryFill.style.width = `${Math.max(0, Math.min(100, frac * 100))}%`;
  p.batteryFill.classList.toggle("alarm", rec.power.alarm);
}

function renderHriBadge(session: SessionModel, el: HTMLElement): void {
  const rec = session.latest;
  if (!rec) {
    el.textContent = "-";
    return;
  }
  el.textContent = `${rec.hri.owner} / ${rec.hri.follow_mode}`;
}

function renderTrajectory(session: SessionModel, canvas: HTMLCanvasElement): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.fillStyle = "#0b1420";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const all = session.truthTrack.concat(session.odomTrack);
  if (all.length < 2) return;

  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const [x, y] of all) {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  }
  const span = Math.max(maxX - minX, maxY - minY, 2.0);
  const cx = (minX + maxX) / 2, cy = (minY + maxY) / 2;
  const scale = (Math.min(canvas.width, canvas.height) - 30) / span;
  // top-down: world x (north) up the screen, world y (west) to the left
  const toPx = (x: number, y: number): [number, number] => [
    canvas.width / 2 - (y - cy) * scale,
    canvas.height / 2 - (x - cx) * scale,
  ];

  const drawTrack = (track: Array<[number, number]>, color: string) => {
    if (track.length < 2) return;
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    track.forEach(([x, y], i) => {
      const [px, py] = toPx(x, y);
      if (i === 0) ctx.moveTo(px, py); else ctx.lineTo(px, py);
    });
    ctx.stroke();
  };
  drawTrack(session.truthTrack, "#6fd3ff");
  drawTrack(session.odomTrack, "#ffb347");

  const last = session.truthTrack[session.truthTrack.length - 1];
  const rec = session.latest;
  if (last && rec) {
    const [px, py] = toPx(last[0], last[1]);
    const yaw = rec.truth.rpy[2];
    ctx.strokeStyle = "#ffffff";
    ctx.beginPath();
    ctx.arc(px, py, 4, 0, 2 * Math.PI);
    // heading tick: body x in screen coords
    ctx.moveTo(px, py);
    ctx.lineTo(px - Math.sin(yaw) * 12, py - Math.cos(yaw) * 12);
    ctx.stroke();
  }
}

function renderStrip(canvas: HTMLCanvasElement, trace: Array<[number, number]>, label: string, invert: boolean): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.fillStyle = "#0b1420";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#8aa";
  ctx.font = "10px monospace";
  ctx.fillText(label, 4, 12);
  if (trace.length < 2) return;
  const t0 = trace[0][0], t1 = trace[trace.length - 1][0];
  let lo = Infinity, hi = -Infinity;
  for (const [, v] of trace) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  if (hi - lo < 1e-6) { lo -= 0.5; hi += 0.5; }
  ctx.strokeStyle = "#6fd3ff";
  ctx.beginPath();
  trace.forEach(([t, v], i) => {
    const px = ((t - t0) / Math.max(t1 - t0, 1e-9)) * (canvas.width - 8) + 4;
    let frac = (v - lo) / (hi - lo);
    if (!invert) frac = 1 - frac;
    const py = frac * (canvas.height - 18) + 14;
    if (i === 0) ctx.moveTo(px, py); else ctx.lineTo(px, py);
  });
  ctx.stroke();
}

function renderCamera(session: SessionModel, canvas: HTMLCanvasElement): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.fillStyle = "#09111c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#26384a";
  ctx.strokeRect(0.5, 0.5, canvas.width - 1, canvas.height - 1);
  const rec = session.latest;
  const bbox = rec?.hri.bbox;
  if (!bbox) {
    ctx.fillStyle = "#44586c";
    ctx.font = "11px monospace";
    ctx.fillText("no detection", 8, canvas.height / 2);
    return;
  }
  const sx = canvas.width / 800, sy = canvas.height / 600;
  const [cx, cy, w, h] = bbox;
  ctx.strokeStyle = "#5bd75b";
  ctx.lineWidth = 2;
  ctx.strokeRect((cx - w / 2) * sx, (cy - h / 2) * sy, w * sx, h * sy);
}

function renderEventLog(session: SessionModel, el: HTMLElement): void {
  const tail = session.eventLog.slice(-14);
  el.textContent = tail.map((e) => `${e.t.toFixed(1).padStart(7)}  ${e.kind.padEnd(12)} ${e.text}`).join("\n");
}

function renderTelemetry(session: SessionModel, el: HTMLElement): void {
  const rec = session.latest;
  if (!rec) {
    el.textContent = "waiting for state...";
    return;
  }
  const deg = (r: number) => ((r * 180) / Math.PI).toFixed(1);
  el.textContent = [
    `t ${rec.t.toFixed(1)} s   drops ${session.drops}`,
    `depth ${rec.truth.depth.toFixed(2)} m   speed ${rec.truth.v[0].toFixed(2)} m/s`,
    `rpy ${deg(rec.truth.rpy[0])} ${deg(rec.truth.rpy[1])} ${deg(rec.truth.rpy[2])} deg`,
    `cmd ${rec.cmd.thrust.toFixed(2)}/${rec.cmd.pitch.toFixed(2)}/${rec.cmd.yaw.toFixed(2)} (${rec.cmd.source})`,
    `thrusters ${rec.thr.map((v) => v.toFixed(2)).join(" ")}`,
  ].join("\n");
}
