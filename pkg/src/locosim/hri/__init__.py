"""Human-facing autonomy: menu system, motion messages, diver following."""

from .follower import DiverFollowState, FollowerGains, diver_follow_step
from .menu import (
    EmittedAction,
    InputEvent,
    MenuAction,
    MenuConfig,
    MenuError,
    MenuItem,
    MenuNode,
    MenuSession,
    MenuState,
    menu_step,
    parse_menu,
    render_menu,
)
from .rcvm import BUILTIN_SEQUENCES, RcvmPlayer, RcvmSequence, RcvmStep, load_sequences

__all__ = [
    "BUILTIN_SEQUENCES",
    "DiverFollowState",
    "EmittedAction",
    "FollowerGains",
    "InputEvent",
    "MenuAction",
    "MenuConfig",
    "MenuError",
    "MenuItem",
    "MenuNode",
    "MenuSession",
    "MenuState",
    "RcvmPlayer",
    "RcvmSequence",
    "RcvmStep",
    "diver_follow_step",
    "load_sequences",
    "menu_step",
    "parse_menu",
    "render_menu",
]
