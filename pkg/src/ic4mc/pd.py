"""Property decomposition: prove P one bad state at a time.

The outer loop keeps a candidate invariant Inv (the property clauses plus
everything learned so far) and asks a SAT solver for a state s that
satisfies the learned clauses but falsifies P.  If none exists, Inv is an
inductive invariant for P and the run is Safe.  Otherwise the single-clause
property Q — the longest clause falsified by s, i.e. the full negation of s
— is proved by a local IC4 run in which P and Inv are conjoined on the
current-state side of every frame query, so the local proof only explores
traces through P-and-Inv states.  A local counterexample is a genuine
global one (its last state falsifies Q and hence P); a local invariant J is
conjoined into Inv.  When Q turns out inductive as-is, it is widened by
literal dropping before being added, so whole groups of bad states are
excluded at once instead of one per iteration.

The final Inv is re-certified with the three SAT checks before Safe is
reported, which is what justifies conjoining the per-Q invariants.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional

from . import oracle
from .aiger import TransitionSystem
from .ic3 import EngineOptions, InternalCheckError
from .ic4 import EffortMode, Ic4Engine, MINIMAL, run_engine
from .logic import Clause, State, satisfies
from .reach import ReachStore
from .results import Trace, Verdict, safe, unknown, unsafe
from .sat import SolverHandle, UNSAT


@dataclass
class PdState:
    """Accumulated decomposition state: Inv = prop & all learned J clauses."""

    prop: list[Clause]
    learned: list[Clause] = field(default_factory=list)
    proven: list[tuple[Clause, list[Clause]]] = field(default_factory=list)

    @property
    def inv(self) -> list[Clause]:
        dup = set(self.prop)
        return list(self.prop) + [c for c in self.learned if c not in dup]


def form_q(s: State) -> Clause:
    """The longest clause falsified by s: one literal per state variable."""
    return s.to_cube().negate()


def prove_local(q: Clause, ts: TransitionSystem, inv: list[Clause],
                mode: EffortMode, opts: EngineOptions,
                reach: ReachStore) -> Verdict:
    """IC4 for the single-clause property Q under permanent constraints inv."""
    eng = Ic4Engine(ts, mode, opts, prop=[q], constraints=inv, reach=reach)
    return run_engine(eng)


def strengthen_q(q: Clause, ts: TransitionSystem, inv: list[Clause],
                 reach: Optional[ReachStore] = None,
                 seed: int = 0) -> tuple[Clause, int]:
    """Drop literals from an inductive Q while initiation and consecution
    relative to inv survive and no stored reachable state is excluded.

    Returns the (possibly unchanged) clause and the number of literals removed.
    """
    h = SolverHandle(ts.num_vars, seed=seed)
    for cl in ts.trans:
        h.add_clause(cl)
    for cl in inv:
        h.add_clause(cl)
    prime = ts.prime
    init = ts.init_state
    clause = q
    removed = 0
    for lit in list(q.literals):
        if len(clause) == 1:
            break
        cand = clause.without(lit)
        if len(cand) == len(clause):
            continue
        if not satisfies(init, cand):
            continue
        if reach is not None and reach.violates(cand) is not None:
            continue
        act = h.fresh_var()
        h.add_raw(h.from_clause(cand) + [-act])
        negated_primed = [-(prime[l.var] + 1) if l.positive else prime[l.var] + 1
                          for l in cand]
        if h.solve_raw([act] + negated_primed).status == UNSAT:
            clause = cand
            removed += 1
    return clause, removed


def _truncate_at_violation(ts: TransitionSystem, trace: Trace) -> Trace:
    """Cut a trace at its first state falsifying the global property."""
    for idx, st in enumerate(trace.states):
        if not ts.holds_prop(st):
            return Trace(trace.states[:idx + 1], trace.inputs[:idx])
    raise InternalCheckError("local counterexample never falsifies the property")


def _validate_global(ts: TransitionSystem, trace: Trace) -> None:
    step = oracle.validate_trace(ts, trace)
    if step is not None:
        raise InternalCheckError(f"counterexample trace invalid at step {step}")
    if ts.holds_prop(trace.states[-1]):
        raise InternalCheckError("counterexample trace does not end in a bad state")


def prove_pd(ts: TransitionSystem, mode: EffortMode = MINIMAL,
             opts: Optional[EngineOptions] = None,
             reach: Optional[ReachStore] = None) -> Verdict:
    opts = opts or EngineOptions()
    deadline = None
    if opts.time_limit_ms is not None:
        deadline = time.monotonic() + opts.time_limit_ms / 1000.0
    stats = {
        "engine": "ic4-pd",
        "effort_mode": mode.kind,
        "q_properties": 0,
        "q_inductive_as_is": 0,
        "strengthen_literals_removed": 0,
        "sat_calls_total": 0,
    }

    def finish(verdict: Verdict, reach: Optional[ReachStore], frames: int) -> Verdict:
        stats["frames_opened"] = frames
        stats["reach_states_generated"] = reach.generated if reach else 0
        stats["reuse_hits"] = reach.reuse_hits if reach else 0
        verdict.stats = {**verdict.stats, **stats}
        return verdict

    if not ts.prop:
        return finish(safe([], 0), None, 0)
    if not ts.holds_prop(ts.init_state):
        trace = Trace((ts.init_state,), ())
        return finish(unsafe(trace), None, 0)

    state = PdState(prop=sorted(ts.prop, key=lambda c: c.literals))
    reach = reach if reach is not None else ReachStore(ts)
    # the line-3 solver sees only the learned clauses, so dedup against those
    # alone: a Q may coincide with a property clause yet still be new to it
    known: set[Clause] = set()

    # "is there a state satisfying the learned clauses but breaking P?"
    line3 = SolverHandle(ts.num_vars, seed=opts.seed)
    ys = []
    for cl in state.prop:
        y = line3.fresh_var()
        ys.append(y)
        for l in cl:
            line3.add_raw([-y, -line3.to_int(l)])
    line3.add_raw(ys)

    cap = opts.pd_iteration_cap or 2 * (1 << ts.num_latches)
    frames_max = 0
    iters = 0
    while True:
        if deadline is not None and time.monotonic() > deadline:
            return finish(unknown("time limit reached"), reach, frames_max)
        res = line3.solve_raw([])
        stats["sat_calls_total"] += 1
        if res.status == UNSAT:
            inv = state.inv
            failure = oracle.check_invariant(ts, inv)
            if failure is not None:
                raise InternalCheckError(f"conjoined invariant rejected: {failure!r}")
            return finish(safe(inv, frames_max), reach, frames_max)
        iters += 1
        if iters > cap:
            return finish(unknown(f"decomposition iteration cap {cap} reached"),
                          reach, frames_max)
        s = line3.extract_state(res.model, list(ts.state_vars))
        q = form_q(s)
        stats["q_properties"] += 1

        local_opts = opts
        if deadline is not None:
            remaining = max(1, int((deadline - time.monotonic()) * 1000))
            local_opts = replace(opts, time_limit_ms=remaining)
        verdict = prove_local(q, ts, state.inv, mode, local_opts, reach)
        stats["sat_calls_total"] += verdict.stats.get("sat_calls_total", 0)
        if verdict.is_unsafe:
            trace = _truncate_at_violation(ts, verdict.trace)
            _validate_global(ts, trace)
            return finish(unsafe(trace), reach, frames_max)
        if verdict.kind == "unknown":
            return finish(unknown(f"local proof for {q!r}: {verdict.reason}"),
                          reach, frames_max)
        frames_max = max(frames_max, verdict.frames_used or 0)

        j_clauses = list(verdict.invariant)
        extras = [c for c in j_clauses if c != q]
        if not extras:
            widened, removed = strengthen_q(q, ts, state.inv, reach, opts.seed)
            stats["q_inductive_as_is"] += 1
            stats["strengthen_literals_removed"] += removed
            j_clauses = [widened]
        added = [c for c in j_clauses if c not in known]
        if not any(not satisfies(s, c) for c in added):
            raise InternalCheckError("decomposition made no progress on the extracted state")
        for c in added:
            state.learned.append(c)
            known.add(c)
            line3.add_clause(c)
        state.proven.append((q, j_clauses))
