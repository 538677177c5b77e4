// Keyboard teleoperation: W/S thrust, A/D yaw, R/F pitch. Axes ramp toward
// the held direction (full scale in 0.5 s) and snap to zero on release;
// releasing everything sends one explicit zero command, then nothing (the
// simulator's watchdog takes over from there).

import { Axes } from "./types.js";

export const RAMP_PER_SECOND = 2.0; // 0 -> 1 in 0.5 s

const KEY_AXES: Record<string, { axis: keyof Axes; sign: number }> = {
  w: { axis: "thrust", sign: +1 },
  s: { axis: "thrust", sign: -1 },
  a: { axis: "yaw", sign: +1 }, // A turns the nose left; positive yaw is nose-left
  d: { axis: "yaw", sign: -1 },
  r: { axis: "pitch", sign: +1 },
  f: { axis: "pitch", sign: -1 },
};

export class TeleopAxes {
  private held = new Set<string>();
  axes: Axes = { thrust: 0, pitch: 0, yaw: 0 };
  private zeroPending = false;

  keyDown(key: string): void {
    const k = key.toLowerCase();
    if (k in KEY_AXES) this.held.add(k);
  }

  keyUp(key: string): void {
    const k = key.toLowerCase();
    if (this.held.delete(k) && this.held.size === 0) this.zeroPending = true;
  }

  get engaged(): boolean {
    return this.held.size > 0;
  }

  private target(axis: keyof Axes): number {
    let t = 0;
    for (const k of this.held) {
      const m = KEY_AXES[k];
      if (m.axis === axis) t += m.sign;
    }
    return Math.min(1, Math.max(-1, t));
  }

  // advance the ramp; returns the current axes
  tick(dt: number): Axes {
    for (const axis of ["thrust", "pitch", "yaw"] as const) {
      const target = this.target(axis);
      if (target === 0) {
        this.axes[axis] = 0; // releasing snaps to neutral
        continue;
      }
      const step = RAMP_PER_SECOND * dt;
      const delta = target - this.axes[axis];
      this.axes[axis] += Math.abs(delta) <= step ? delta : Math.sign(delta) * step;
    }
    return { ...this.axes };
  }

  // what to transmit this tick: axes while engaged, one zero after release
  commandToSend(dt: number): Axes | null {
    if (this.engaged) {
      this.zeroPending = true; // a release must be followed by a zero
      return this.tick(dt);
    }
    if (this.zeroPending) {
      this.zeroPending = false;
      this.axes = { thrust: 0, pitch: 0, yaw: 0 };
      return { ...this.axes };
    }
    return null;
  }
}
