"""Depth-annotated store of proven-reachable states with predecessor links.

Every entry is validated on insert: traces are replayed through the circuit
before being linked in, so the store only ever holds genuinely reachable
states.  A re-discovered state keeps its first entry (its depth is an upper
bound on the BFS depth, not necessarily minimal).

The ``generated`` counter excludes the depth-0 initial state; that is the
convention used by the state-count bound assertions and the stats records.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .aiger import TransitionSystem
from .logic import Clause, State, satisfies
from .results import Trace


@dataclass
class ReachEntry:
    state: State
    depth: int
    pred: Optional["ReachEntry"]
    input_bits: Optional[int]  # input on the incoming transition


class ReachStore:
    def __init__(self, ts: TransitionSystem):
        self.ts = ts
        init = ts.init_state
        self.entries: dict[State, ReachEntry] = {
            init: ReachEntry(init, 0, None, None)}
        self.generated = 0  # distinct non-initial states inserted
        self.reuse_hits = 0

    def __len__(self):
        return len(self.entries)

    def covers(self, s: State) -> Optional[ReachEntry]:
        return self.entries.get(s)

    def add_trace(self, trace: Trace) -> int:
        """Record a validated trace; returns the number of new states."""
        ts = self.ts
        circuit = ts.circuit
        if ts.state_to_bits(trace.states[0]) != circuit.reset_bits:
            raise ValueError("trace does not start in the initial state")
        new = 0
        pred = self.entries[trace.states[0]]
        for j, ibits in enumerate(trace.inputs):
            cur_bits = ts.state_to_bits(trace.states[j])
            nxt_bits, _ = circuit.simulate(cur_bits, ibits)
            if nxt_bits != ts.state_to_bits(trace.states[j + 1]):
                raise ValueError(f"trace step {j + 1} does not follow the transition relation")
            s = trace.states[j + 1]
            entry = self.entries.get(s)
            if entry is None:
                entry = ReachEntry(s, pred.depth + 1, pred, ibits)
                self.entries[s] = entry
                self.generated += 1
                new += 1
            pred = entry
        return new

    def trace_to(self, entry: ReachEntry) -> Trace:
        """Reconstruct the stored trace from pred links (no SAT involved)."""
        states = [entry.state]
        inputs = []
        e = entry
        while e.pred is not None:
            inputs.append(e.input_bits)
            e = e.pred
            states.append(e.state)
        return Trace(states=tuple(reversed(states)), inputs=tuple(reversed(inputs)))

    def violates(self, cl: Clause, max_depth: Optional[int] = None) -> Optional[ReachEntry]:
        """An entry (of depth <= max_depth, if given) whose state falsifies cl."""
        for entry in self.entries.values():
            if max_depth is not None and entry.depth > max_depth:
                continue
            if not satisfies(entry.state, cl):
                return entry
        return None

    def all_traces(self) -> list[Trace]:
        """One trace per maximal-depth entry, for test export."""
        return [self.trace_to(e) for e in self.entries.values() if e.depth > 0]
