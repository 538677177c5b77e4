"""Versioned bridge message schema, shared with the operator console.

The JSON artifact written by `write_schema` is the only coupling between
this package and any client: clients validate against it and check the
version in the hello frame. Bump SCHEMA_VERSION on breaking changes.
"""

from __future__ import annotations

import json
from pathlib import Path

SCHEMA_VERSION = 1

BRIDGE_SCHEMA = {
    "schema_version": SCHEMA_VERSION,
    "transport": "websocket text frames, one JSON message per frame",
    "framing": {
        "seq": "integer, strictly increasing per direction",
        "type": "one of the message types below",
        "payload": "object, structure depends on type",
    },
    "outbound": {
        "hello": {
            "payload": {
                "schema_version": "integer",
                "scenario": "string",
                "seed": "integer",
            },
            "note": "first frame after connect; clients must check schema_version",
        },
        "state": {
            "payload": "one log record: {t, truth{p,q,v,w,rpy,depth}, est, cmd, thr, power{v,charge,alarm}, hri{owner,follow_mode,menu_node,menu_phase,bbox}, events[]}",
            "drops": "cumulative count of state frames dropped oldest-first",
            "rate_hz": 10,
        },
        "menu_frame": {
            "payload": {"lines": "list of display lines (<= 8 x 21 chars)", "t": "sim time"},
            "note": "sent on change only",
        },
        "event_ack": {
            "payload": {"ack_seq": "seq of the accepted inbound message", "status": "accepted"},
        },
        "error": {
            "payload": {"reason": "string", "ack_seq": "offending inbound seq, when known"},
        },
    },
    "inbound": {
        "command": {
            "payload": {"thrust": "[-1,1]", "pitch": "[-1,1]", "yaw": "[-1,1]"},
            "note": "teleop; goes stale after 1 s (watchdog zeroes thrusters)",
        },
        "menu_input": {
            "payload": {
                "kind": "tag | gesture | cancel",
                "id": "0-9 (tag)",
                "token": "ok|zero|one|two|three|four|five (gesture)",
            },
        },
        "primitive": {
            "payload": {
                "kind": "turn_to | move_timed | square | circle | stop",
                "...": "kind-specific parameters (target_yaw_deg, duration, ...)",
            },
        },
        "scenario_control": {
            "payload": {
                "action": "stop | start_follower | stop_follower | start_rcvm | power_profile | set_battery_charge",
                "...": "action-specific parameters (name, profile, fraction)",
            },
        },
    },
    "rules": [
        "unknown inbound types are answered with an error frame, never dropped silently",
        "malformed JSON is answered with an error frame and the session stays open",
        "a second concurrent connection is refused with an error payload",
    ],
}

INBOUND_TYPES = ("command", "menu_input", "primitive", "scenario_control")
SCENARIO_CONTROL_ACTIONS = (
    "stop",
    "start_follower",
    "stop_follower",
    "start_rcvm",
    "power_profile",
    "set_battery_charge",
)
PRIMITIVE_KINDS = ("turn_to", "move_timed", "square", "circle", "stop")


class ValidationError(ValueError):
    pass


def _require_number(payload: dict, key: str, lo: float, hi: float, default=0.0) -> float:
    v = payload.get(key, default)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ValidationError(f"{key} must be a number")
    if not lo <= float(v) <= hi:
        raise ValidationError(f"{key}={v} outside [{lo}, {hi}]")
    return float(v)


def validate_inbound(msg: dict) -> tuple[str, dict]:
    """Check an inbound message; returns (runner event kind, payload).

    Raises ValidationError with a human-readable reason otherwise.
    """
    if not isinstance(msg, dict):
        raise ValidationError("message must be a JSON object")
    mtype = msg.get("type")
    if mtype not in INBOUND_TYPES:
        raise ValidationError(f"unknown message type {mtype!r}")
    seq = msg.get("seq")
    if not isinstance(seq, int):
        raise ValidationError("seq must be an integer")
    payload = msg.get("payload")
    if not isinstance(payload, dict):
        raise ValidationError("payload must be an object")

    if mtype == "command":
        out = {
            "thrust": _require_number(payload, "thrust", -1, 1),
            "pitch": _require_number(payload, "pitch", -1, 1),
            "yaw": _require_number(payload, "yaw", -1, 1),
        }
        return "teleop_command", out

    if mtype == "menu_input":
        kind = payload.get("kind")
        if kind == "tag":
            tag = payload.get("id")
            if not isinstance(tag, int) or not 0 <= tag <= 9:
                raise ValidationError("tag id must be an integer 0-9")
            return "input", {"input": {"kind": "tag", "id": tag}}
        if kind == "gesture":
            token = payload.get("token")
            if token not in ("ok", "zero", "one", "two", "three", "four", "five"):
                raise ValidationError(f"unknown gesture token {token!r}")
            return "input", {"input": {"kind": "gesture", "token": token}}
        if kind == "cancel":
            return "input", {"input": {"kind": "cancel"}}
        raise ValidationError(f"unknown menu_input kind {kind!r}")

    if mtype == "primitive":
        kind = payload.get("kind")
        if kind not in PRIMITIVE_KINDS:
            raise ValidationError(f"unknown primitive kind {kind!r}")
        out = {k: v for k, v in payload.items() if k != "kind"}
        out["primitive"] = kind
        return "start_primitive", out

    action = payload.get("action")
    if action not in SCENARIO_CONTROL_ACTIONS:
        raise ValidationError(f"unknown scenario_control action {action!r}")
    out = {k: v for k, v in payload.items() if k != "action"}
    if action == "stop":
        return "stop", {}
    if action == "start_follower":
        return "start_follower", {}
    if action == "stop_follower":
        return "stop_follower", {}
    if action == "start_rcvm":
        return "start_rcvm", out
    if action == "power_profile":
        if out.get("profile") not in ("idle", "average", "max"):
            raise ValidationError("power_profile requires profile idle|average|max")
        return "power_profile", out
    _require_number(out, "fraction", 0.0, 1.0, default=out.get("fraction"))
    return "set_battery_charge", out


def write_schema(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(BRIDGE_SCHEMA, indent=2, sort_keys=True) + "\n")
    return path


def packaged_schema_path() -> Path:
    return Path(__file__).resolve().parent.parent / "data" / "bridge-schema.json"
