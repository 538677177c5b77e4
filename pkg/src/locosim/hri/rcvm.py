"""Robot communication via motion: timed command sequences ("kinemes").

A sequence is a list of (command, duration) steps repeated loop_count
times, always finishing with a settle step that zeroes every channel. The
built-in vocabulary ships the head-nod "affirmative" (pitch up/down) plus
"negative" (yaw shake) and "attention" (surge pulses) as extensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from ..pilot import Command

MAX_TOTAL_DURATION = 30.0  # s
SETTLE_DURATION = 0.5  # s of explicit zero command at the end


@dataclass(frozen=True)
class RcvmStep:
    command: Command
    duration: float

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("step duration must be positive")


@dataclass(frozen=True)
class RcvmSequence:
    name: str
    steps: tuple[RcvmStep, ...]
    loop_count: int = 1
    settle: float = SETTLE_DURATION

    def __post_init__(self):
        if self.loop_count < 1:
            raise ValueError("loop_count must be >= 1")
        if not self.steps:
            raise ValueError("sequence needs at least one step")
        if self.settle <= 0:
            raise ValueError("settle must be positive")
        if self.total_duration > MAX_TOTAL_DURATION:
            raise ValueError(
                f"sequence {self.name!r} lasts {self.total_duration:.1f}s, limit {MAX_TOTAL_DURATION}s"
            )

    @property
    def total_duration(self) -> float:
        return self.loop_count * sum(s.duration for s in self.steps) + self.settle

    def program(self) -> list[RcvmStep]:
        """Expanded steps; the final one is always all-zero."""
        out = list(self.steps) * self.loop_count
        out.append(RcvmStep(Command(), self.settle))
        return out


def _seq(name, steps, loops):
    return RcvmSequence(name, tuple(RcvmStep(Command(**c), d) for c, d in steps), loops)


BUILTIN_SEQUENCES = {
    "affirmative": _seq("affirmative", [({"pitch": 0.5}, 1.0), ({"pitch": -0.5}, 1.0)], 2),
    # half/full/full/half impulses: the yaw axis has no restoring torque, so
    # this swings left-right-left rather than drifting one way
    "negative": _seq(
        "negative",
        [({"yaw": 0.5}, 0.6), ({"yaw": -0.5}, 1.2), ({"yaw": 0.5}, 1.2), ({"yaw": -0.5}, 0.6)],
        1,
    ),
    "attention": _seq("attention", [({"thrust": 0.4}, 0.5), ({"thrust": -0.4}, 0.5)], 3),
}


def load_sequences(document: str) -> dict:
    """Parse a YAML map of {name: {steps: [...], loop_count: n}}."""
    raw = yaml.safe_load(document)
    if not isinstance(raw, dict):
        raise ValueError("sequence document must be a mapping")
    out = {}
    for name, spec in raw.items():
        steps_raw = spec.get("steps", [])
        steps = []
        for s in steps_raw:
            cmd = Command(
                thrust=float(s.get("thrust", 0.0)),
                pitch=float(s.get("pitch", 0.0)),
                yaw=float(s.get("yaw", 0.0)),
            )
            steps.append(RcvmStep(cmd, float(s["duration"])))
        out[name] = RcvmSequence(
            name,
            tuple(steps),
            int(spec.get("loop_count", 1)),
            float(spec.get("settle", SETTLE_DURATION)),
        )
    return out


@dataclass(frozen=True)
class RcvmResult:
    name: str
    status: str  # success | preempted
    elapsed: float


class RcvmPlayer:
    """Tick-driven sequence playback; exclusive with other motion sources."""

    def __init__(self, sequence: RcvmSequence):
        self.sequence = sequence
        self._program = sequence.program()
        self._t0: float | None = None
        self.result: RcvmResult | None = None

    @property
    def active(self) -> bool:
        return self.result is None

    def begin(self, t: float):
        self._t0 = t

    def cancel(self, t: float) -> Command:
        """Preemption: immediate zero command, aborted status."""
        self.result = RcvmResult(self.sequence.name, "preempted", t - (self._t0 or t))
        return Command(timestamp=t)

    def update(self, t: float) -> Command:
        if self._t0 is None:
            self._t0 = t
        if self.result is not None:
            return Command(timestamp=t)
        elapsed = t - self._t0
        acc = 0.0
        for step in self._program:
            acc += step.duration
            if elapsed < acc:
                c = step.command
                return Command(c.thrust, c.pitch, c.yaw, timestamp=t)
        self.result = RcvmResult(self.sequence.name, "success", elapsed)
        return Command(timestamp=t)
