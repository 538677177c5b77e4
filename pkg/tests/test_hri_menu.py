import pytest
from hypothesis import given, settings, strategies as st

from locosim.hri.menu import (
    ARMED_WINDOW,
    InputEvent,
    MenuError,
    MenuSession,
    initial_menu_state,
    menu_complete,
    menu_expire,
    menu_step,
    parse_menu,
    render_menu,
)

MINIMAL = """
menus:
  main:
    label: Main
    items:
      - label: Do nothing
        action: {kind: noop}
"""

THREE_ITEM = """
root: main
menus:
  main:
    label: Main Menu
    items:
      - label: Turn
        action: {kind: service_call, target: pilot.turn_to, args: {target_yaw_deg: 90}}
      - label: Follow
        action: {kind: launch, target: follower.start}
      - label: Tools
        action: {kind: submenu, target: tools}
  tools:
    label: Tools
    items:
      - label: Deeper
        action: {kind: submenu, target: deep}
      - label: Quiet log
        action: {kind: set_param, target: log_level, args: {value: warn}}
  deep:
    label: Deep
    items:
      - label: Nothing
        action: {kind: noop}
"""


def three():
    return parse_menu(THREE_ITEM)


# ------------------------------------------------------------------- parsing


def test_minimal_document_single_node():
    cfg = parse_menu(MINIMAL)
    assert cfg.root == "main"
    assert list(cfg.nodes) == ["main"]
    assert cfg.nodes["main"].items[0].action.kind == "noop"


def test_six_items_rejected_with_limit_in_message():
    doc = """
menus:
  main:
    label: Main
    items:
"""
    for i in range(6):
        doc += f"      - label: Item {i}\n        action: {{kind: noop}}\n"
    with pytest.raises(MenuError, match="5-item limit"):
        parse_menu(doc)


def test_two_level_submenu_is_navigable():
    cfg = three()
    state = initial_menu_state(cfg)
    state, action = menu_step(state, cfg, InputEvent("tag", 3, 1.0))
    assert action is None
    assert state.node_name == "tools"
    state, action = menu_step(state, cfg, InputEvent("tag", 1, 2.0))
    assert state.node_name == "deep"


def test_cycle_detection():
    doc = """
menus:
  a:
    label: A
    items:
      - label: to b
        action: {kind: submenu, target: b}
  b:
    label: B
    items:
      - label: back to a
        action: {kind: submenu, target: a}
"""
    with pytest.raises(MenuError, match="cycle"):
        parse_menu(doc)


@pytest.mark.parametrize(
    "mutation, message",
    [
        ("missing_label", r"items\[1\].label"),
        ("bad_kind", "unknown kind"),
        ("bad_target", "not defined"),
        ("bad_timeout", "timeout"),
    ],
)
def test_located_parse_errors(mutation, message):
    items = {
        "missing_label": "      - action: {kind: noop}\n",
        "bad_kind": "      - label: X\n        action: {kind: frobnicate}\n",
        "bad_target": "      - label: X\n        action: {kind: submenu, target: ghost}\n",
        "bad_timeout": "      - label: X\n        action: {kind: noop}\n        timeout: -3\n",
    }[mutation]
    doc = "menus:\n  main:\n    label: Main\n    items:\n" + items
    with pytest.raises(MenuError, match=message):
        parse_menu(doc)


def test_non_yaml_rejected():
    with pytest.raises(MenuError):
        parse_menu(": not: [valid")
    with pytest.raises(MenuError):
        parse_menu("just a string")


# ------------------------------------------------------------------ protocol


def test_tag_selects_immediately():
    cfg = three()
    state = initial_menu_state(cfg)
    state, action = menu_step(state, cfg, InputEvent("tag", 2, 1.0))
    assert action is not None
    assert action.index == 2
    assert action.target == "follower.start"
    assert state.phase == "executing"


def test_digit_without_ok_does_nothing():
    cfg = three()
    state = initial_menu_state(cfg)
    state, action = menu_step(state, cfg, InputEvent("gesture", "two", 1.0))
    assert action is None
    assert state.phase == "idle"


def test_ok_then_digit_selects():
    cfg = three()
    state = initial_menu_state(cfg)
    state, action = menu_step(state, cfg, InputEvent("gesture", "ok", 1.0))
    assert action is None
    assert state.phase == "armed"
    state, action = menu_step(state, cfg, InputEvent("gesture", "two", 2.0))
    assert action is not None
    assert action.index == 2


def test_armed_window_expires():
    cfg = three()
    state = initial_menu_state(cfg)
    state, _ = menu_step(state, cfg, InputEvent("gesture", "ok", 1.0))
    state, action = menu_step(state, cfg, InputEvent("gesture", "two", 1.0 + ARMED_WINDOW + 0.1))
    assert action is None
    assert state.phase == "idle"


def test_menu_expire_disarms_without_events():
    cfg = three()
    state = initial_menu_state(cfg)
    state, _ = menu_step(state, cfg, InputEvent("gesture", "ok", 1.0))
    state = menu_expire(state, cfg, 2.0)
    assert state.phase == "armed"
    state = menu_expire(state, cfg, 1.0 + ARMED_WINDOW + 0.1)
    assert state.phase == "idle"


def test_out_of_range_tag_ignored_with_warning(caplog):
    cfg = three()
    state = initial_menu_state(cfg)
    with caplog.at_level("WARNING"):
        state, action = menu_step(state, cfg, InputEvent("tag", 9, 1.0))
    assert action is None
    assert state.phase == "idle"
    assert "out of range" in caplog.text


def test_cancel_disarms_pops_and_aborts():
    cfg = three()
    state = initial_menu_state(cfg)
    # disarm
    state, _ = menu_step(state, cfg, InputEvent("gesture", "ok", 1.0))
    state, _ = menu_step(state, cfg, InputEvent("cancel", None, 2.0))
    assert state.phase == "idle"
    # pop submenu
    state, _ = menu_step(state, cfg, InputEvent("tag", 3, 3.0))
    assert state.node_name == "tools"
    state, _ = menu_step(state, cfg, InputEvent("cancel", None, 4.0))
    assert state.node_name == "main"
    # abort executing
    state, action = menu_step(state, cfg, InputEvent("tag", 1, 5.0))
    assert state.phase == "executing"
    state, _ = menu_step(state, cfg, InputEvent("cancel", None, 6.0))
    assert state.phase == "idle" and state.pending is None


def test_inputs_ignored_while_executing():
    cfg = three()
    state = initial_menu_state(cfg)
    state, first = menu_step(state, cfg, InputEvent("tag", 1, 1.0))
    state, second = menu_step(state, cfg, InputEvent("tag", 2, 1.5))
    assert first is not None and second is None
    state = menu_complete(state)
    assert state.phase == "idle"
    state, third = menu_step(state, cfg, InputEvent("tag", 2, 2.0))
    assert third is not None


def test_action_timeout_returns_to_idle():
    doc = """
menus:
  main:
    label: Main
    items:
      - label: Slow thing
        action: {kind: launch, target: slow}
        timeout: 2.0
"""
    cfg = parse_menu(doc)
    state = initial_menu_state(cfg)
    state, action = menu_step(state, cfg, InputEvent("tag", 1, 1.0))
    assert state.phase == "executing"
    state = menu_expire(state, cfg, 2.5)
    assert state.phase == "executing"
    state = menu_expire(state, cfg, 3.5)
    assert state.phase == "idle"


# --------------------------------------------------------------- determinism


events_strategy = st.lists(
    st.one_of(
        st.builds(lambda v, t: InputEvent("tag", v, t), st.integers(0, 9), st.floats(0, 100)),
        st.builds(
            lambda v, t: InputEvent("gesture", v, t),
            st.sampled_from(["ok", "zero", "one", "two", "three", "four", "five"]),
            st.floats(0, 100),
        ),
        st.builds(lambda t: InputEvent("cancel", None, t), st.floats(0, 100)),
    ),
    max_size=30,
)


@settings(max_examples=60)
@given(events_strategy)
def test_digit_never_fires_without_ok_in_armed_window(events):
    # safety invariant: every gesture-digit-emitted action is preceded by an
    # ok gesture no more than the armed window earlier, with no cancel or
    # other action in between
    cfg = three()
    session = MenuSession(cfg)
    armed_at = None
    for e in sorted(events, key=lambda e: e.timestamp):
        session.tick(e.timestamp)
        before_phase = session.state.phase
        action = session.handle_event(e)
        if action is not None and e.kind == "gesture" and e.value != "ok":
            assert before_phase == "armed"
            assert armed_at is not None
            assert e.timestamp - armed_at <= ARMED_WINDOW
        if e.kind == "gesture" and e.value == "ok" and session.state.phase == "armed":
            armed_at = e.timestamp
        if session.state.phase != "armed":
            armed_at = None
        if action is not None and action.kind == "noop":
            session.complete()


@settings(max_examples=50)
@given(events_strategy)
def test_replay_determinism(events):
    cfg = three()

    def run():
        session = MenuSession(cfg)
        states = []
        for e in sorted(events, key=lambda e: e.timestamp):
            session.tick(e.timestamp)
            action = session.handle_event(e)
            if action is not None and action.kind == "noop":
                session.complete()
            states.append(session.state)
        return states, session.emitted

    assert run() == run()


# ------------------------------------------------------------------- render


def test_render_lists_numbered_items():
    cfg = three()
    lines = render_menu(initial_menu_state(cfg), cfg)
    assert lines[0] == "Main Menu"
    assert lines[1] == "1. Turn"
    assert lines[2] == "2. Follow"
    assert lines[3] == "3. Tools"


def test_render_shows_armed_indicator():
    cfg = three()
    state, _ = menu_step(initial_menu_state(cfg), cfg, InputEvent("gesture", "ok", 1.0))
    lines = render_menu(state, cfg)
    assert any("OK" in line for line in lines)


def test_render_truncates_long_labels():
    doc = """
menus:
  main:
    label: An exceedingly long menu label well past the display width
    items:
      - label: Another very long item label that cannot possibly fit
        action: {kind: noop}
"""
    cfg = parse_menu(doc)
    lines = render_menu(initial_menu_state(cfg), cfg)
    assert all(len(line) <= 21 for line in lines)
    assert len(lines) <= 8


def test_render_identical_for_identical_state():
    cfg = three()
    s = initial_menu_state(cfg)
    assert render_menu(s, cfg) == render_menu(s, cfg)


# -------------------------------------------------------------- input events


def test_input_event_validation():
    with pytest.raises(ValueError):
        InputEvent("tag", 12)
    with pytest.raises(ValueError):
        InputEvent("gesture", "six")
    with pytest.raises(ValueError):
        InputEvent("wave", None)
    InputEvent("cancel")
