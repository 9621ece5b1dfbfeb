"""Explicit-state ground truth for desk-scale models.

BFS reachability with exact depths and diameter, an oracle verdict, and the
certificate checkers used by the acceptance gate: invariants get the three
SAT conditions plus an explicit check over every reachable state, traces are
replayed transition by transition through the circuit.

States are bit-packed integers keyed by latch order; inputs are enumerated
in numeric order so depth maps are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .aiger import TransitionSystem
from .logic import Clause, Literal, State, satisfies
from .results import Trace
from .sat import SAT, UNSAT, SolverHandle

DEFAULT_MAX_STATES = 1 << 20


@dataclass
class ReachMap:
    depth: dict[int, int]  # state bits -> minimal BFS depth
    diameter: int
    truncated: bool

    def states(self):
        return self.depth.keys()


def bfs(ts: TransitionSystem, max_states: int = DEFAULT_MAX_STATES) -> ReachMap:
    """Breadth-first reachability over all input assignments per frontier state."""
    circuit = ts.circuit
    n_inputs = circuit.num_inputs
    init = circuit.reset_bits
    depth = {init: 0}
    frontier = [init]
    diameter = 0
    truncated = False
    d = 0
    while frontier and not truncated:
        d += 1
        nxt = []
        for s in frontier:
            for ibits in range(1 << n_inputs):
                t, _ = circuit.simulate(s, ibits)
                if t not in depth:
                    if len(depth) >= max_states:
                        truncated = True
                        break
                    depth[t] = d
                    diameter = d
                    nxt.append(t)
            if truncated:
                break
        frontier = nxt
    return ReachMap(depth=depth, diameter=diameter, truncated=truncated)


def is_bad_state(ts: TransitionSystem, bits: int) -> bool:
    """A state is bad iff some input assignment raises the bad signal there."""
    circuit = ts.circuit
    return any(circuit.bad_at(bits, i) for i in range(1 << circuit.num_inputs))


def oracle_verdict(ts: TransitionSystem, rm: ReachMap) -> tuple[str, Optional[int]]:
    """("safe", None), ("unsafe", shortest bad depth) or ("inconclusive", None)."""
    bad_depth = None
    for bits, d in rm.depth.items():
        if is_bad_state(ts, bits) and (bad_depth is None or d < bad_depth):
            bad_depth = d
    if bad_depth is not None:
        return "unsafe", bad_depth
    if rm.truncated:
        return "inconclusive", None
    return "safe", None


@dataclass
class CheckFailure:
    condition: str  # "reachable-state" | "initiation" | "consecution" | "property"
    witness: Union[State, Clause, None] = None

    def __repr__(self):
        return f"CheckFailure({self.condition}, {self.witness!r})"


def check_invariant(ts: TransitionSystem, inv: list[Clause],
                    rm: Optional[ReachMap] = None) -> Optional[CheckFailure]:
    """Verify an inductive-invariant certificate; None means pass.

    Checks, in order: every reachable state satisfies inv (explicit, if a
    ReachMap is given), I -> inv, inv & T -> inv', inv -> P (all by SAT).
    The clause set must imply P on its own; engines include the property
    clauses in their certificates.
    """
    if rm is not None:
        for bits in rm.states():
            s = ts.state_from_bits(bits)
            for cl in inv:
                if not satisfies(s, cl):
                    return CheckFailure("reachable-state", s)

    # I -> inv
    h = SolverHandle(ts.num_vars)
    for cl in ts.init:
        h.add_clause(cl)
    for cl in inv:
        if h.solve([-l for l in cl]).status == SAT:
            return CheckFailure("initiation", cl)

    # inv & T -> inv'
    h = SolverHandle(ts.num_vars)
    for cl in ts.trans:
        h.add_clause(cl)
    for cl in inv:
        h.add_clause(cl)
    prime = ts.prime
    for cl in inv:
        primed_neg = [Literal(prime[l.var], not l.positive) for l in cl]
        if h.solve(primed_neg).status == SAT:
            return CheckFailure("consecution", cl)

    # inv -> P
    h = SolverHandle(ts.num_vars)
    for cl in inv:
        h.add_clause(cl)
    for cl in ts.prop:
        if h.solve([-l for l in cl]).status == SAT:
            return CheckFailure("property", cl)
    return None


def validate_trace(ts: TransitionSystem, t: Trace) -> Optional[int]:
    """Replay a trace by evaluation; None means pass, else first failing step.

    Step 0 failure means the first state is not the initial state.
    """
    circuit = ts.circuit
    if ts.state_to_bits(t.states[0]) != circuit.reset_bits:
        return 0
    for j, ibits in enumerate(t.inputs):
        cur = ts.state_to_bits(t.states[j])
        nxt, _ = circuit.simulate(cur, ibits)
        if nxt != ts.state_to_bits(t.states[j + 1]):
            return j + 1
    return None


def cnf_successor(ts: TransitionSystem, state_bits: int, input_bits: int) -> int:
    """Successor computed from the transition CNF (for encoder round-trip checks)."""
    h = SolverHandle(ts.num_vars)
    for cl in ts.trans:
        h.add_clause(cl)
    assumptions = [Literal(v, bool(state_bits >> j & 1))
                   for j, v in enumerate(ts.state_vars)]
    assumptions += [Literal(v, bool(input_bits >> j & 1))
                    for j, v in enumerate(ts.input_vars)]
    res = h.solve(assumptions)
    if res.status != SAT:
        raise AssertionError("transition CNF has no successor for a concrete state")
    bits = 0
    for j, v in enumerate(ts.next_vars):
        if res.model[v + 1]:
            bits |= 1 << j
    return bits


def depth_histogram_csv(rm: ReachMap) -> str:
    """CSV of (depth, state count) rows for convergence experiments."""
    counts: dict[int, int] = {}
    for d in rm.depth.values():
        counts[d] = counts.get(d, 0) + 1
    lines = ["depth,states"]
    for d in sorted(counts):
        lines.append(f"{d},{counts[d]}")
    return "\n".join(lines) + "\n"
