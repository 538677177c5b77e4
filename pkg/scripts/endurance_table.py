#!/usr/bin/env python3
"""Print the battery endurance table from the fast-forward power model."""

from locosim.power import PROFILE_THRUSTERS, endurance_run


def hms(seconds: float) -> str:
    h = int(seconds // 3600)
    m = int(round((seconds - 3600 * h) / 60))
    return f"{h} h {m:02d} min"


def main():
    print(f"{'profile':>8} {'draw A':>8} {'endurance':>12} {'alarm at':>12}")
    for profile in PROFILE_THRUSTERS:
        out = endurance_run(profile)
        print(f"{profile:>8} {out['draw']:>8.3f} {hms(out['seconds']):>12} {hms(out['alarm_at']):>12}")


if __name__ == "__main__":
    main()
