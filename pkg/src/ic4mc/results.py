"""Run outcomes shared by the engines, the oracle and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .logic import Clause, State


@dataclass(frozen=True)
class Trace:
    """A concrete execution: states s_0..s_n plus the input of each transition.

    ``inputs[j]`` is the input bitmask (LSB = input 0) driving the step from
    ``states[j]`` to ``states[j+1]``.
    """

    states: tuple[State, ...]
    inputs: tuple[int, ...]

    def __post_init__(self):
        if len(self.inputs) != len(self.states) - 1:
            raise ValueError("trace needs exactly one input per transition")

    def __len__(self):
        return len(self.states)


@dataclass
class Verdict:
    """Safe with a certified invariant, Unsafe with a validated trace, or Unknown."""

    kind: str  # "safe" | "unsafe" | "unknown"
    invariant: Optional[list[Clause]] = None  # explicit clause set (includes P clauses)
    frames_used: Optional[int] = None
    trace: Optional[Trace] = None
    reason: Optional[str] = None
    stats: dict = field(default_factory=dict)

    @property
    def is_safe(self):
        return self.kind == "safe"

    @property
    def is_unsafe(self):
        return self.kind == "unsafe"


def safe(invariant, frames_used, stats=None) -> Verdict:
    return Verdict("safe", invariant=invariant, frames_used=frames_used, stats=stats or {})


def unsafe(trace, stats=None) -> Verdict:
    return Verdict("unsafe", trace=trace, stats=stats or {})


def unknown(reason, stats=None) -> Verdict:
    return Verdict("unknown", reason=reason, stats=stats or {})
