import { describe, expect, it } from "vitest";

import { TeleopAxes } from "../src/teleop.js";

const DT = 0.1; // the 10 Hz send cadence

describe("teleop axes", () => {
  it("W ramps thrust to +1 over 0.5 s then holds", () => {
    const t = new TeleopAxes();
    t.keyDown("w");
    const values: number[] = [];
    for (let i = 0; i < 8; i++) values.push(t.commandToSend(DT)!.thrust);
    expect(values[0]).toBeCloseTo(0.2);
    expect(values[4]).toBeCloseTo(1.0); // 5 ticks x 0.1 s = 0.5 s
    expect(values[7]).toBeCloseTo(1.0); // steady
  });

  it("A+W maps to combined thrust and positive (nose-left) yaw", () => {
    const t = new TeleopAxes();
    t.keyDown("a");
    t.keyDown("w");
    for (let i = 0; i < 10; i++) t.commandToSend(DT);
    const axes = t.commandToSend(DT)!;
    expect(axes.thrust).toBe(1);
    expect(axes.yaw).toBe(1);
    expect(axes.pitch).toBe(0);
  });

  it("S and D pull negative; R/F drive pitch", () => {
    const t = new TeleopAxes();
    t.keyDown("s");
    t.keyDown("d");
    t.keyDown("f");
    for (let i = 0; i < 10; i++) t.commandToSend(DT);
    const axes = t.commandToSend(DT)!;
    expect(axes).toEqual({ thrust: -1, yaw: -1, pitch: -1 });
  });

  it("release sends exactly one zero command then goes silent", () => {
    const t = new TeleopAxes();
    t.keyDown("w");
    for (let i = 0; i < 5; i++) t.commandToSend(DT);
    t.keyUp("w");
    const zero = t.commandToSend(DT);
    expect(zero).toEqual({ thrust: 0, pitch: 0, yaw: 0 });
    expect(t.commandToSend(DT)).toBeNull();
    expect(t.commandToSend(DT)).toBeNull();
  });

  it("opposing keys cancel to zero target", () => {
    const t = new TeleopAxes();
    t.keyDown("w");
    t.keyDown("s");
    for (let i = 0; i < 5; i++) t.commandToSend(DT);
    expect(t.commandToSend(DT)!.thrust).toBe(0);
  });
});
