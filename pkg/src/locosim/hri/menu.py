"""YAML-defined menu tree plus the tag/gesture selection protocol.

Menus are named nodes of up to five items each (the display has five
slots); items bind to actions (service_call, launch, set_param, submenu,
noop) resolved by the harness against a registry of named callables.

Selection protocol:

* a numbered tag selects the corresponding item immediately;
* gestures are two-step: "ok" arms the menu, then a digit gesture selects;
  a digit without a preceding ok within the arming window does nothing;
* cancel disarms, aborts a running action, or pops one submenu level.

Everything here is a pure function of (state, config, event), so replaying
an event sequence reproduces states and emitted actions exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import yaml

logger = logging.getLogger(__name__)

MAX_ITEMS = 5  # the display offers a set of 5 options
ARMED_WINDOW = 5.0  # s to show a digit after the ok gesture
DISPLAY_COLS = 21
DISPLAY_ROWS = 8

ACTION_KINDS = ("service_call", "launch", "set_param", "submenu", "noop")
GESTURE_TOKENS = ("ok", "zero", "one", "two", "three", "four", "five")
GESTURE_DIGITS = {"zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5}


class MenuError(ValueError):
    """Menu document rejected; message carries the offending location."""


@dataclass(frozen=True)
class MenuAction:
    kind: str
    target: str = ""
    args: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MenuItem:
    label: str
    action: MenuAction
    timeout: float | None = None


@dataclass(frozen=True)
class MenuNode:
    label: str
    items: tuple[MenuItem, ...]


@dataclass(frozen=True)
class MenuConfig:
    root: str
    nodes: dict


@dataclass(frozen=True)
class InputEvent:
    kind: str  # "tag" | "gesture" | "cancel"
    value: int | str | None = None
    timestamp: float = 0.0

    def __post_init__(self):
        if self.kind == "tag":
            if not isinstance(self.value, int) or not 0 <= self.value <= 9:
                raise ValueError(f"tag id must be 0-9, got {self.value!r}")
        elif self.kind == "gesture":
            if self.value not in GESTURE_TOKENS:
                raise ValueError(f"unknown gesture token {self.value!r}")
        elif self.kind != "cancel":
            raise ValueError(f"unknown input kind {self.kind!r}")


@dataclass(frozen=True)
class EmittedAction:
    kind: str
    target: str
    args: dict
    node: str
    index: int  # 1-based item number
    label: str
    timeout: float | None
    timestamp: float


@dataclass(frozen=True)
class MenuState:
    path: tuple[str, ...]
    phase: str = "idle"  # idle | armed | executing
    armed_at: float | None = None
    pending: EmittedAction | None = None

    @property
    def node_name(self) -> str:
        return self.path[-1]


def parse_menu(document: str) -> MenuConfig:
    """Validate a YAML menu document; raises MenuError with a location."""
    try:
        raw = yaml.safe_load(document)
    except yaml.YAMLError as e:
        raise MenuError(f"not valid YAML: {e}") from None
    if not isinstance(raw, dict):
        raise MenuError("document root must be a mapping")

    menus = raw.get("menus")
    if not isinstance(menus, dict) or not menus:
        raise MenuError("menus: must be a non-empty mapping of named nodes")
    root = raw.get("root", next(iter(menus)))
    if root not in menus:
        raise MenuError(f"root: menu {root!r} is not defined")

    nodes = {}
    for name, node_raw in menus.items():
        loc = f"menus.{name}"
        if not isinstance(node_raw, dict):
            raise MenuError(f"{loc}: node must be a mapping")
        label = node_raw.get("label")
        if not label or not isinstance(label, str):
            raise MenuError(f"{loc}.label: missing or empty")
        items_raw = node_raw.get("items")
        if not isinstance(items_raw, list) or not items_raw:
            raise MenuError(f"{loc}.items: at least one item required")
        if len(items_raw) > MAX_ITEMS:
            raise MenuError(f"{loc}.items: {len(items_raw)} items exceeds the {MAX_ITEMS}-item limit")
        items = []
        for i, item_raw in enumerate(items_raw, start=1):
            iloc = f"{loc}.items[{i}]"
            if not isinstance(item_raw, dict):
                raise MenuError(f"{iloc}: item must be a mapping")
            ilabel = item_raw.get("label")
            if not ilabel or not isinstance(ilabel, str):
                raise MenuError(f"{iloc}.label: missing or empty")
            action_raw = item_raw.get("action")
            if not isinstance(action_raw, dict):
                raise MenuError(f"{iloc}.action: missing")
            kind = action_raw.get("kind")
            if kind not in ACTION_KINDS:
                raise MenuError(f"{iloc}.action.kind: unknown kind {kind!r}")
            target = action_raw.get("target", "")
            args = action_raw.get("args", {}) or {}
            if not isinstance(args, dict):
                raise MenuError(f"{iloc}.action.args: must be a mapping")
            timeout = item_raw.get("timeout")
            if timeout is not None and (not isinstance(timeout, (int, float)) or timeout <= 0):
                raise MenuError(f"{iloc}.timeout: must be a positive number")
            items.append(MenuItem(ilabel, MenuAction(kind, target, dict(args)), timeout))
        nodes[name] = MenuNode(label, tuple(items))

    for name, node in nodes.items():
        for i, item in enumerate(node.items, start=1):
            if item.action.kind == "submenu" and item.action.target not in nodes:
                raise MenuError(f"menus.{name}.items[{i}]: submenu target {item.action.target!r} not defined")

    _check_acyclic(nodes, root)
    return MenuConfig(root=root, nodes=nodes)


def _check_acyclic(nodes: dict, root: str):
    # DFS over submenu edges; a back edge is a cycle
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {name: 0 for name in nodes}

    def visit(name, trail):
        color[name] = GRAY
        for item in nodes[name].items:
            if item.action.kind != "submenu":
                continue
            target = item.action.target
            if color[target] == GRAY:
                cycle = " -> ".join(trail + [name, target])
                raise MenuError(f"submenu cycle: {cycle}")
            if color[target] == WHITE:
                visit(target, trail + [name])
        color[name] = BLACK

    visit(root, [])


def initial_menu_state(config: MenuConfig) -> MenuState:
    return MenuState(path=(config.root,))


def _select(
    state: MenuState, config: MenuConfig, index: int, t: float
) -> tuple[MenuState, EmittedAction | None]:
    node = config.nodes[state.node_name]
    if not 1 <= index <= len(node.items):
        logger.warning("menu %s: selection %d out of range (1-%d), ignored", state.node_name, index, len(node.items))
        return replace(state, phase="idle", armed_at=None), None
    item = node.items[index - 1]
    if item.action.kind == "submenu":
        return MenuState(path=state.path + (item.action.target,)), None
    emitted = EmittedAction(
        kind=item.action.kind,
        target=item.action.target,
        args=dict(item.action.args),
        node=state.node_name,
        index=index,
        label=item.label,
        timeout=item.timeout,
        timestamp=t,
    )
    return replace(state, phase="executing", armed_at=None, pending=emitted), emitted


def menu_step(
    state: MenuState, config: MenuConfig, event: InputEvent
) -> tuple[MenuState, EmittedAction | None]:
    """Apply one input event; returns the new state and any emitted action."""
    t = event.timestamp

    # armed window expiry is checked against the incoming event's time
    if state.phase == "armed" and state.armed_at is not None and t - state.armed_at > ARMED_WINDOW:
        state = replace(state, phase="idle", armed_at=None)

    if event.kind == "cancel":
        if state.phase == "executing":
            return replace(state, phase="idle", pending=None), None
        if state.phase == "armed":
            return replace(state, phase="idle", armed_at=None), None
        if len(state.path) > 1:
            return MenuState(path=state.path[:-1]), None
        return state, None

    if state.phase == "executing":
        logger.warning("menu: input %s ignored while an action is executing", event.kind)
        return state, None

    if event.kind == "tag":
        # tags select directly, armed or not
        return _select(state, config, event.value, t)

    # gesture protocol
    if event.value == "ok":
        return replace(state, phase="armed", armed_at=t), None
    digit = GESTURE_DIGITS[event.value]
    if state.phase != "armed":
        logger.warning("menu: digit gesture %r without ok, ignored", event.value)
        return state, None
    return _select(state, config, digit, t)


def menu_expire(state: MenuState, config: MenuConfig, now: float) -> MenuState:
    """Time-driven transitions: armed-window and action timeouts."""
    if state.phase == "armed" and state.armed_at is not None and now - state.armed_at > ARMED_WINDOW:
        return replace(state, phase="idle", armed_at=None)
    if state.phase == "executing" and state.pending is not None and state.pending.timeout is not None:
        if now - state.pending.timestamp > state.pending.timeout:
            return replace(state, phase="idle", pending=None)
    return state


def menu_complete(state: MenuState) -> MenuState:
    """The harness reports the pending action finished."""
    if state.phase != "executing":
        return state
    return replace(state, phase="idle", pending=None)


def _fit(line: str) -> str:
    return line[:DISPLAY_COLS]


def render_menu(state: MenuState, config: MenuConfig) -> list[str]:
    """Deterministic text frame mirroring the OLED, <= 8 lines x 21 chars."""
    node = config.nodes[state.node_name]
    lines = [_fit(node.label)]
    for i, item in enumerate(node.items, start=1):
        lines.append(_fit(f"{i}. {item.label}"))
    if state.phase == "armed":
        lines.append(_fit("[OK] show digit"))
    elif state.phase == "executing" and state.pending is not None:
        lines.append(_fit(f"> {state.pending.label}"))
    else:
        lines.append(_fit("tag or Ok+digit"))
    return lines[:DISPLAY_ROWS]


class MenuSession:
    """Stateful wrapper the harness drives once per tick."""

    def __init__(self, config: MenuConfig):
        self.config = config
        self.state = initial_menu_state(config)
        self.emitted: list[EmittedAction] = []

    def handle_event(self, event: InputEvent) -> EmittedAction | None:
        self.state, action = menu_step(self.state, self.config, event)
        if action is not None:
            self.emitted.append(action)
        return action

    def tick(self, now: float):
        self.state = menu_expire(self.state, self.config, now)

    def complete(self):
        self.state = menu_complete(self.state)

    def render(self) -> list[str]:
        return render_menu(self.state, self.config)
