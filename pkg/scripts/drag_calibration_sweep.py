#!/usr/bin/env python3
"""Reproduce the drag-calibration experiment in simulation.

Drives the vehicle to steady state at several thrust settings, then
back-solves the quadratic drag coefficient from thrust balance. With a
perfect quadratic model every row recovers the configured coefficient;
on the real robot the spread across rows is the model error.
"""

import argparse

from locosim.dynamics import (
    RigidBodyState,
    ThrusterSet,
    VehicleParams,
    advance,
    calibrate_drag,
    thrust_from_pwm,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=float, nargs="+", default=[0.3, 0.5, 0.7, 0.9, 1.0])
    ap.add_argument("--settle", type=float, default=60.0, help="seconds to steady state")
    ap.add_argument("--dt", type=float, default=0.01)
    args = ap.parse_args()

    params = VehicleParams()
    print(f"configured surge drag: {params.drag.surge:.4f} N s^2/m^2")
    print(f"{'pwm':>5} {'thrust N':>9} {'steady m/s':>11} {'recovered c':>12} {'err %':>7}")
    for pwm in args.levels:
        thrusters = ThrusterSet(pwm, pwm, 0.0)
        state = advance(RigidBodyState(), params, thrusters, args.dt, int(args.settle / args.dt))
        speed = float(state.linear_velocity[0])
        thrust = 2.0 * thrust_from_pwm(params.thrust_curve, pwm)
        if speed <= 0 or thrust <= 0:
            print(f"{pwm:>5.2f} {'-':>9} {'-':>11} {'in dead-band':>12}")
            continue
        coeff = calibrate_drag(thrust, speed)
        err = 100.0 * (coeff - params.drag.surge) / params.drag.surge
        print(f"{pwm:>5.2f} {thrust:>9.3f} {speed:>11.4f} {coeff:>12.4f} {err:>7.3f}")


if __name__ == "__main__":
    main()
