"""Baseline IC3: frame management, bad-state blocking, inductive
generalization and the standard (non-fixing) pushing phase.

Frames are delta-encoded: each clause is recorded at the highest frame
containing it, so a clause at level j belongs to every F_i with i <= j and
monotone containment Clauses(F_{i+1}) <= Clauses(F_i) is structural.
F_0 is exactly I; every frame from F_1 up contains the property clauses.

The frame solver keeps one activation literal per delta level plus one for
the initial-state clauses and one for the property clauses; a query against
F_i assumes the property literal and the literals of all levels >= i.
Clauses are never deleted from the solver (stale copies stay active only
where they are implied, which is harmless).
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .aiger import TransitionSystem
from .logic import Clause, Cube, Literal, State, satisfies, satisfies_cube
from .reach import ReachStore
from .results import Trace, Verdict, safe, unknown, unsafe
from .sat import SAT, UNKNOWN, UNSAT, SolverHandle

ACT_INIT = -1
ACT_PROP = 0


class InternalCheckError(AssertionError):
    """A self-certification step failed; indicates an engine bug."""


@dataclass
class EngineOptions:
    seed: int = 0
    max_frames: int = 10_000
    time_limit_ms: Optional[int] = None
    reuse: bool = True
    heur_conflicts: int = 10_000
    heur_unpush_per_frame: int = 3
    pd_iteration_cap: Optional[int] = None


class FrameSeq:
    """Delta-encoded frame sequence F_0..F_top (F_0 = I is implicit)."""

    def __init__(self):
        self.top = 1
        self.levels: dict[int, list[Clause]] = {1: []}

    def delta(self, i: int) -> list[Clause]:
        return self.levels.get(i, [])

    def max_level(self) -> int:
        return max(self.levels)

    def level_of(self, cl: Clause) -> Optional[int]:
        for j, cls in self.levels.items():
            if cl in cls:
                return j
        return None

    def add(self, cl: Clause, level: int) -> bool:
        """Record a clause at a level; returns False if a stronger-or-equal
        clause already lives at that level or above."""
        for j in sorted(self.levels):
            if j >= level and any(d.subsumes(cl) for d in self.levels[j]):
                return False
        for j in sorted(self.levels):
            if j <= level:
                self.levels[j] = [d for d in self.levels[j] if not cl.subsumes(d)]
        self.levels.setdefault(level, []).append(cl)
        return True

    def move_up(self, cl: Clause, i: int) -> None:
        self.levels[i].remove(cl)
        self.levels.setdefault(i + 1, []).append(cl)

    def open_frame(self) -> None:
        self.top += 1
        self.levels.setdefault(self.top, [])

    def fixed_point(self) -> Optional[int]:
        """Smallest i in 1..top with F_i = F_{i+1} (empty delta), if any."""
        for i in range(1, self.top + 1):
            if not self.levels.get(i):
                return i
        return None

    def explicit(self, i: int) -> list[Clause]:
        """Learned clauses of F_i (property clauses not included)."""
        out: list[Clause] = []
        for j in sorted(self.levels):
            if j >= i:
                out.extend(self.levels[j])
        return sorted(out, key=lambda c: c.literals)


@dataclass
class Obligation:
    """Demand to prove no state of `cube` reachable within `level` steps.

    `input_bits`, when set, drives every state of `cube` into `succ.cube`
    (the lifting query guarantees this for the whole cube, which is what
    makes trace reconstruction by replay sound).
    """

    level: int
    depth: int
    seq: int
    cube: Cube = field(compare=False)
    state: State = field(compare=False)
    input_bits: Optional[int] = field(compare=False, default=None)
    succ: Optional["Obligation"] = field(compare=False, default=None)

    def __lt__(self, other):
        return (self.level, self.depth, self.seq) < (other.level, other.depth, other.seq)


class CoreEngine:
    """Shared machinery for IC3 and IC4: solvers, frames, blocking.

    `prop` defaults to the system property; property-decomposition runs pass
    a derived single-clause property plus permanent `constraints` clauses
    that are conjoined on the current-state side of every query.
    """

    def __init__(self, ts: TransitionSystem, opts: Optional[EngineOptions] = None,
                 prop: Optional[list[Clause]] = None,
                 constraints: Optional[list[Clause]] = None,
                 reach: Optional[ReachStore] = None):
        self.ts = ts
        self.opts = opts or EngineOptions()
        self.prop = list(ts.prop) if prop is None else list(prop)
        self.constraints = list(constraints or [])
        self.reach = reach if reach is not None else ReachStore(ts)
        self.frames = FrameSeq()
        self.init_state = ts.init_state
        self._prime = ts.prime
        self._seq = 0
        self._deadline = None

        self.stats = {
            "sat_calls": {"bad": 0, "consecution": 0, "push": 0, "lift": 0, "cert": 0},
            "obligations": 0,
            "clauses_added": 0,
        }

        self.solver = SolverHandle(ts.num_vars, seed=self.opts.seed)
        for cl in ts.trans:
            self.solver.add_clause(cl)
        for cl in self.constraints:
            self.solver.add_clause(cl)
        for cl in ts.init:
            self.solver.add_clause(cl, tag=ACT_INIT)
        for cl in self.prop:
            self.solver.add_clause(cl, tag=ACT_PROP)
        self._bad_sel = self._build_bad_selector()

        self.lifter = SolverHandle(ts.num_vars, seed=self.opts.seed + 1)
        for cl in ts.trans:
            self.lifter.add_clause(cl)

        # clauses inserted by the most recent block() call (maximal IC4 hook)
        self.inserted_log: list[tuple[Clause, int]] = []

    # ---- solver plumbing -----------------------------------------------------

    def _build_bad_selector(self) -> Optional[int]:
        """Selector literal whose assumption forces the next state to break P."""
        if not self.prop:
            return None
        sel = self.solver.fresh_var()
        ys = []
        for cl in self.prop:
            y = self.solver.fresh_var()
            ys.append(y)
            for l in cl:
                self.solver.add_raw([-y, -self._primed_int(l)])
        self.solver.add_raw([-sel] + ys)
        return sel

    def _primed_int(self, l: Literal) -> int:
        v = self._prime[l.var] + 1
        return v if l.positive else -v

    def _int(self, l: Literal) -> int:
        return l.var + 1 if l.positive else -(l.var + 1)

    def ctx(self, i: int) -> list[int]:
        """Activation assumptions selecting frame F_i."""
        if i == 0:
            return [self.solver.activation_lit(ACT_INIT)]
        acts = [self.solver.activation_lit(ACT_PROP)]
        for j in sorted(self.frames.levels):
            if j >= i:
                acts.append(self.solver.activation_lit(j))
        return acts

    def _model_state(self, model, vars_, rename=None) -> State:
        return self.solver.extract_state(model, list(vars_), rename)

    def _model_inputs(self, model) -> int:
        bits = 0
        for j, v in enumerate(self.ts.input_vars):
            if model[v + 1]:
                bits |= 1 << j
        return bits

    # ---- queries ---------------------------------------------------------------

    def query_bad(self):
        """SAT model of F_top & T & ~P', or None.

        Returns (predecessor state, input bits, violated property clause)."""
        if self._bad_sel is None:
            return None
        self.stats["sat_calls"]["bad"] += 1
        res = self.solver.solve_raw(self.ctx(self.frames.top) + [self._bad_sel])
        if res.status == UNSAT:
            return None
        s = self._model_state(res.model, self.ts.state_vars)
        ibits = self._model_inputs(res.model)
        t = self._model_state(res.model, self.ts.next_vars, rename=self.ts.state_vars)
        violated = next(cl for cl in self.prop if not satisfies(t, cl))
        return s, ibits, violated

    def consecution(self, cube: Cube, level: int, budget: Optional[int] = None):
        """F_{level-1} & ~cube & T & cube' query."""
        assert level >= 1
        self.stats["sat_calls"]["consecution"] += 1
        act = self.solver.fresh_var()
        self.solver.add_raw(self.solver.from_clause(cube.negate()) + [-act])
        assumptions = self.ctx(level - 1) + [act] + [self._primed_int(l) for l in cube]
        return self.solver.solve_raw(assumptions, budget)

    def lift_predecessor(self, t: State, ibits: int, succ_cube: Cube) -> Cube:
        """Shrink a predecessor state to a cube all of whose states step into
        succ_cube under the same inputs (UNSAT-core trick on the state assumptions)."""
        self.stats["sat_calls"]["lift"] += 1
        act = self.lifter.fresh_var()
        avoid = [-self._primed_int(l) for l in succ_cube] + [-act]
        self.lifter.solver.add_clause(avoid)
        state_lits = [Literal(v, val) for v, val in zip(t.vars, t.values)]
        input_lits = [Literal(v, bool(ibits >> j & 1))
                      for j, v in enumerate(self.ts.input_vars)]
        assumptions = [act] + [self._int(l) for l in state_lits + input_lits]
        res = self.lifter.solve_raw(assumptions)
        if res.status != UNSAT:
            raise InternalCheckError("lifting query unexpectedly satisfiable")
        kept = [l for l in state_lits if self._int(l) in res.core]
        return Cube(kept)

    def check_push(self, cl: Clause, level: int, budget: Optional[int] = None):
        """Pushing condition F_level & T -> cl'.

        Returns ("holds", None), ("fails", witness next-state) or ("budget", None)."""
        self.stats["sat_calls"]["push"] += 1
        assumptions = self.ctx(level) + [-self._primed_int(l) for l in cl]
        res = self.solver.solve_raw(assumptions, budget)
        if res.status == UNSAT:
            return "holds", None
        if res.status == UNKNOWN:
            return "budget", None
        s = self._model_state(res.model, self.ts.next_vars, rename=self.ts.state_vars)
        return "fails", s

    # ---- clause learning ----------------------------------------------------------

    def _init_in_cube(self, cube: Cube) -> bool:
        return satisfies_cube(self.init_state, cube)

    def _repair_initiation(self, lits: list[Literal], full: Cube) -> list[Literal]:
        """Ensure the cube excludes the initial state by re-adding a literal
        of the full cube on which the initial state differs."""
        cand = Cube(lits)
        if lits and not self._init_in_cube(cand):
            return lits
        for l in full:
            if not self.init_state.agrees(l):
                return sorted(set(lits) | {l})
        raise InternalCheckError("cube cannot be separated from the initial state")

    def _core_shrink(self, cube: Cube, core) -> Cube:
        kept = [l for l in cube if self._primed_int(l) in core]
        if not kept:
            kept = list(cube.literals)
        return Cube(self._repair_initiation(kept, cube))

    def generalize(self, cube: Cube, level: int) -> Clause:
        """Drop literals from ~cube while it stays relatively inductive at
        `level`, satisfied by the initial state, and not falsified by any
        stored reachable state of depth <= level."""
        clause = cube.negate()
        for lit in list(clause.literals):
            if len(clause) == 1:
                break
            cand = clause.without(lit)
            if not satisfies(self.init_state, cand):
                continue
            if self.reach.violates(cand, max_depth=level) is not None:
                continue
            if self.consecution(cand.negate(), level).status == UNSAT:
                clause = cand
        return clause

    def insert_clause(self, cl: Clause, level: int) -> None:
        level = min(level, self.frames.top + 1)
        if self.frames.add(cl, level):
            self.solver.add_clause(cl, tag=level)
            self.stats["clauses_added"] += 1
            self.inserted_log.append((cl, level))

    # ---- blocking -------------------------------------------------------------------

    def block(self, state: State, cube: Cube, level: int,
              budget: Optional[int] = None):
        """Prove every state of `cube` unreachable within `level` steps.

        Returns ("blocked", None), ("reached", Trace ending in `cube`) or
        ("budget", None) when the conflict budget runs out.
        """
        if self._init_in_cube(cube):
            return "reached", Trace((self.init_state,), ())
        spent0 = self.solver.solver.conflicts_total
        self._seq += 1
        root = Obligation(level, 0, self._seq, cube, state)
        heap = [root]
        while heap:
            remaining = None
            if budget is not None:
                remaining = budget - (self.solver.solver.conflicts_total - spent0)
                if remaining <= 0:
                    return "budget", None
            ob = heapq.heappop(heap)
            self.stats["obligations"] += 1
            res = self.consecution(ob.cube, ob.level, remaining)
            if res.status == UNKNOWN:
                return "budget", None
            if res.status == UNSAT:
                seed = self._core_shrink(ob.cube, res.core)
                learned = self.generalize(seed, ob.level)
                self.insert_clause(learned, ob.level)
                continue
            t = self._model_state(res.model, self.ts.state_vars)
            ibits = self._model_inputs(res.model)
            tcube = self.lift_predecessor(t, ibits, ob.cube)
            if self._init_in_cube(tcube):
                return "reached", self._replay(ibits, ob)
            self._seq += 1
            heapq.heappush(heap, Obligation(ob.level - 1, ob.depth + 1, self._seq,
                                            tcube, t, ibits, ob))
            heapq.heappush(heap, ob)
        return "blocked", None

    def _replay(self, first_input: int, ob: Obligation) -> Trace:
        """Rebuild the concrete trace init -> ... -> root cube by simulation."""
        ts = self.ts
        states = [self.init_state]
        inputs: list[int] = []
        bits = ts.circuit.reset_bits
        cur: Optional[Obligation] = ob
        inp = first_input
        while cur is not None:
            inputs.append(inp)
            bits, _ = ts.circuit.simulate(bits, inp)
            states.append(ts.state_from_bits(bits))
            if not satisfies_cube(states[-1], cur.cube):
                raise InternalCheckError("trace replay diverged from obligation chain")
            inp = cur.input_bits
            cur = cur.succ
        return Trace(tuple(states), tuple(inputs))

    # ---- pushing -----------------------------------------------------------------

    def push_standard(self) -> Optional[int]:
        """Move every clause whose pushing condition holds up one level.

        Returns the fixed-point level if some F_i = F_{i+1} afterwards."""
        for i in range(1, self.frames.top + 1):
            for cl in sorted(self.frames.delta(i), key=lambda c: c.literals):
                if cl not in self.frames.delta(i):
                    continue
                verdict, _ = self.check_push(cl, i)
                if verdict == "holds":
                    self.frames.move_up(cl, i)
                    self.solver.add_clause(cl, tag=i + 1)
        return self.frames.fixed_point()

    # ---- certification ----------------------------------------------------------

    def certify_invariant(self, inv: list[Clause]) -> None:
        """SAT-certify I -> inv, (constraints &) inv & T -> inv', inv -> prop."""
        for cl in inv:
            if not satisfies(self.init_state, cl):
                raise InternalCheckError(f"invariant clause {cl!r} fails initiation")
        h = SolverHandle(self.ts.num_vars, seed=self.opts.seed)
        for cl in self.ts.trans:
            h.add_clause(cl)
        for cl in self.constraints:
            h.add_clause(cl)
        for cl in inv:
            h.add_clause(cl)
        for cl in inv:
            self.stats["sat_calls"]["cert"] += 1
            if h.solve([Literal(self._prime[l.var], not l.positive) for l in cl]).status == SAT:
                raise InternalCheckError(f"invariant clause {cl!r} fails consecution")
        hp = SolverHandle(self.ts.num_vars, seed=self.opts.seed)
        for cl in self.constraints + inv:
            hp.add_clause(cl)
        for cl in self.prop:
            self.stats["sat_calls"]["cert"] += 1
            if hp.solve([-l for l in cl]).status == SAT:
                raise InternalCheckError("invariant does not imply the property")

    def validate_unsafe(self, trace: Trace) -> None:
        from . import oracle
        step = oracle.validate_trace(self.ts, trace)
        if step is not None:
            raise InternalCheckError(f"counterexample trace invalid at step {step}")
        final = trace.states[-1]
        if all(satisfies(final, cl) for cl in self.prop):
            raise InternalCheckError("counterexample trace does not end in a bad state")

    # ---- main loop -----------------------------------------------------------------

    def _limits_exceeded(self) -> Optional[str]:
        if self.frames.top > self.opts.max_frames:
            return f"frame limit {self.opts.max_frames} reached"
        if self._deadline is not None and time.monotonic() > self._deadline:
            return "time limit reached"
        return None

    def run(self, push_phase: Callable[[], tuple]) -> Verdict:
        """Generic outer loop; `push_phase` returns ("safe", level),
        ("open",) or ("unknown", reason)."""
        if self.opts.time_limit_ms is not None:
            self._deadline = time.monotonic() + self.opts.time_limit_ms / 1000.0
        if not self.prop:
            return safe([], 0, self._final_stats(0))
        if not all(satisfies(self.init_state, cl) for cl in self.prop):
            trace = Trace((self.init_state,), ())
            return unsafe(trace, self._final_stats(0))
        while True:
            reason = self._limits_exceeded()
            if reason:
                return unknown(reason, self._final_stats(self.frames.top))
            verdict = self._eliminate_bad_predecessors()
            if verdict is not None:
                return verdict
            outcome = push_phase()
            if outcome[0] == "safe":
                level = outcome[1]
                inv = sorted(self.prop, key=lambda c: c.literals) + self.frames.explicit(level)
                self.certify_invariant(inv)
                return safe(inv, self.frames.top, self._final_stats(self.frames.top))
            if outcome[0] == "unknown":
                return unknown(outcome[1], self._final_stats(self.frames.top))
            self.frames.open_frame()

    def _eliminate_bad_predecessors(self) -> Optional[Verdict]:
        while True:
            hit = self.query_bad()
            if hit is None:
                return None
            s, ibits, violated = hit
            succ_cube = Cube(-l for l in violated)
            cube = self.lift_predecessor(s, ibits, succ_cube)
            if self._init_in_cube(cube):
                trace = self._one_step_trace(ibits)
                self.validate_unsafe(trace)
                return unsafe(trace, self._final_stats(self.frames.top))
            status, payload = self.block(s, cube, self.frames.top)
            if status == "reached":
                trace = self._extend_with_bad_step(payload, ibits)
                self.validate_unsafe(trace)
                return unsafe(trace, self._final_stats(self.frames.top))
            assert status == "blocked"
            self.after_block()

    def _one_step_trace(self, ibits: int) -> Trace:
        bits, _ = self.ts.circuit.simulate(self.ts.circuit.reset_bits, ibits)
        return Trace((self.init_state, self.ts.state_from_bits(bits)), (ibits,))

    def _extend_with_bad_step(self, trace: Trace, ibits: int) -> Trace:
        bits = self.ts.state_to_bits(trace.states[-1])
        nxt, _ = self.ts.circuit.simulate(bits, ibits)
        return Trace(trace.states + (self.ts.state_from_bits(nxt),),
                     trace.inputs + (ibits,))

    def after_block(self) -> None:
        """Hook for effort policies reacting to freshly inserted clauses."""
        self.inserted_log.clear()

    def _final_stats(self, frames_opened: int) -> dict:
        st = dict(self.stats)
        st["sat_calls"] = dict(self.stats["sat_calls"])
        st["sat_calls_total"] = self.solver.sat_calls + self.lifter.sat_calls
        st["frames_opened"] = frames_opened
        st["clauses_per_frame"] = {j: len(self.frames.delta(j))
                                   for j in sorted(self.frames.levels)}
        st["reach_states_generated"] = self.reach.generated
        st["reuse_hits"] = self.reach.reuse_hits
        return st


def prove_ic3(ts: TransitionSystem, opts: Optional[EngineOptions] = None,
              reach: Optional[ReachStore] = None) -> Verdict:
    """Baseline IC3: block bad predecessors, push, open a frame on NotYet."""
    eng = CoreEngine(ts, opts, reach=reach)

    def push_phase():
        fp = eng.push_standard()
        if fp is not None:
            return ("safe", fp)
        return ("open",)

    verdict = eng.run(push_phase)
    verdict.stats["engine"] = "ic3"
    return verdict
