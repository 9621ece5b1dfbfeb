"""IC4: clause pushing with condition fixing and unpushability proofs.

Where standard pushing leaves a clause behind as soon as its pushing
condition fails, IC4 tries to *fix* the condition: the failing witness (a
next-state falsifying the clause) is either blocked one frame up — which
strengthens the frames and gives the clause another chance — or turns out
to be genuinely reachable, which proves the clause can never be pushed.
Reachable states found this way are kept in a ReachStore and reused so that
later clauses falsified by a stored state are recognized as unpushable
without any new proof work.

Three effort policies:
  minimal   - stop fixing after the first unpushable clause; the remaining
              clauses get one plain pushing check before a new frame opens.
  maximal   - fix every clause of the top frame (each one ends up pushed or
              proven unpushable), and also fix freshly inserted clauses at
              lower levels after each blocking episode.
  heuristic - fixing under a conflict budget per attempt and a cap on
              unpushability proofs per frame; on exhaustion the run falls
              back to standard pushing for the remaining clauses.

Runtime-asserted bounds on distinct reachable states generated (the depth-0
initial state is not counted): k(k+1)/2 in minimal mode and k * |unpushable
clauses| otherwise, k being the final frame count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .aiger import TransitionSystem
from .ic3 import CoreEngine, EngineOptions, InternalCheckError
from .logic import Clause, satisfies
from .reach import ReachStore
from .results import Trace, Verdict
from .sat import UNSAT


@dataclass(frozen=True)
class EffortMode:
    kind: str  # "minimal" | "maximal" | "heuristic"
    budget: Optional[int] = None  # conflicts per condition-fixing attempt
    max_unpush_per_frame: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("minimal", "maximal", "heuristic"):
            raise ValueError(f"unknown effort mode {self.kind!r}")
        if self.kind == "heuristic":
            if not self.budget or self.budget <= 0:
                raise ValueError("heuristic mode needs a positive conflict budget")
            if not self.max_unpush_per_frame or self.max_unpush_per_frame <= 0:
                raise ValueError("heuristic mode needs a positive per-frame proof cap")


MINIMAL = EffortMode("minimal")
MAXIMAL = EffortMode("maximal")


def heuristic(budget: int = 10_000, max_unpush_per_frame: int = 3) -> EffortMode:
    return EffortMode("heuristic", budget, max_unpush_per_frame)


@dataclass
class PushOutcome:
    kind: str  # "invariant" | "unpushable" | "exhausted"
    level: Optional[int] = None
    clause: Optional[Clause] = None
    trace: Optional[Trace] = None
    budget: Optional[int] = None


class Ic4Engine(CoreEngine):
    def __init__(self, ts: TransitionSystem, mode: EffortMode,
                 opts: Optional[EngineOptions] = None, **kwargs):
        super().__init__(ts, opts, **kwargs)
        self.mode = mode
        # unpushability is final: clause -> certifying trace, never re-checked
        self.unpushable: dict[Clause, Trace] = {}
        self.stats["unpush_proofs"] = 0

    # ---- condition fixing -------------------------------------------------

    def fix_clause(self, cl: Clause, level: int, witness, budget: Optional[int]):
        """One fixing attempt for a failed pushing condition.

        Returns "blocked" (frames strengthened, condition worth re-checking),
        "unpushable" (witness reachable; clause marked, trace recorded) or
        "exhausted" (conflict budget ran out).
        """
        if self.opts.reuse:
            entry = self.reach.covers(witness)
            if entry is not None:
                self.reach.reuse_hits += 1
                self._mark_unpushable(cl, self.reach.trace_to(entry))
                return "unpushable"
        status, payload = self.block(witness, witness.to_cube(), level + 1, budget)
        if status == "budget":
            return "exhausted"
        if status == "reached":
            self.reach.add_trace(payload)
            self.stats["unpush_proofs"] += 1
            self._mark_unpushable(cl, payload)
            return "unpushable"
        return "blocked"

    def _mark_unpushable(self, cl: Clause, trace: Trace) -> None:
        final = trace.states[-1]
        if satisfies(final, cl):
            raise InternalCheckError("unpushability trace does not falsify the clause")
        self.unpushable[cl] = trace

    # ---- NewPush -----------------------------------------------------------

    def new_push(self) -> PushOutcome:
        """Scan the top frame, pushing clauses and fixing failed conditions.

        Outer loop restarts the scan whenever fixing added new clauses; the
        inner loop visits the top frame's own clauses in canonical order.
        """
        k = self.frames.top
        mode = self.mode
        plain = False  # no more fixing; plain pushing checks only
        proofs_before = self.stats["unpush_proofs"]
        first_unpush: Optional[Clause] = None
        budget_hit = False
        new_clauses = True
        while new_clauses:
            new_clauses = False
            for cl in sorted(self.frames.delta(k), key=lambda c: c.literals):
                if cl not in self.frames.delta(k) or cl in self.unpushable:
                    continue
                budget = mode.budget if mode.kind == "heuristic" and not plain else None
                verdict, witness = self.check_push(cl, k, budget)
                if verdict == "holds":
                    self.frames.move_up(cl, k)
                    self.solver.add_clause(cl, tag=k + 1)
                    continue
                if verdict == "budget":
                    budget_hit = True
                    continue
                if plain:
                    continue
                fixed = self.fix_clause(cl, k, witness, budget)
                if fixed == "blocked":
                    new_clauses = True
                elif fixed == "exhausted":
                    budget_hit = True
                else:
                    if first_unpush is None:
                        first_unpush = cl
                    if mode.kind == "minimal":
                        plain = True
                    elif mode.kind == "heuristic":
                        done = self.stats["unpush_proofs"] - proofs_before
                        if done >= mode.max_unpush_per_frame:
                            plain = True
        if mode.kind == "maximal":
            self.after_block()  # fix clauses inserted below the top frame
        self._assert_store_soundness()
        fp = self.frames.fixed_point()
        if fp is not None:
            return PushOutcome("invariant", level=fp)
        if first_unpush is not None:
            return PushOutcome("unpushable", clause=first_unpush,
                               trace=self.unpushable[first_unpush])
        if budget_hit:
            return PushOutcome("exhausted", budget=mode.budget)
        raise InternalCheckError("NewPush finished without progress or fixed point")

    # ---- maximal-mode fixing of freshly inserted clauses ---------------------

    def after_block(self) -> None:
        if self.mode.kind != "maximal":
            self.inserted_log.clear()
            return
        work = [cl for cl, _ in self.inserted_log]
        self.inserted_log.clear()
        while work:
            cl = work.pop(0)
            i = self.frames.level_of(cl)
            if i is None or i >= self.frames.top or cl in self.unpushable:
                continue
            verdict, witness = self.check_push(cl, i)
            if verdict == "holds":
                self.frames.move_up(cl, i)
                self.solver.add_clause(cl, tag=i + 1)
                work.append(cl)  # may be pushable further
                continue
            fixed = self.fix_clause(cl, i, witness, None)
            if fixed == "blocked":
                work.extend(c for c, _ in self.inserted_log)
                self.inserted_log.clear()
                work.append(cl)

    # ---- debug invariant ---------------------------------------------------

    def _assert_store_soundness(self) -> None:
        """Every stored reachable state of depth d satisfies every clause
        recorded at a level >= d (frame soundness extended to the store).

        Only meaningful for unconstrained runs: under current-state
        constraints the frames over-approximate constrained reachability,
        which stored (globally reachable) states need not respect.
        """
        if self.constraints:
            return
        for j in sorted(self.frames.levels):
            for cl in self.frames.delta(j):
                bad = self.reach.violates(cl, max_depth=j)
                if bad is not None:
                    raise InternalCheckError(
                        f"frame {j} clause {cl!r} falsified by stored "
                        f"reachable state {bad.state!r} of depth {bad.depth}")


def count_reachable_generated(stats: dict) -> int:
    """Distinct non-initial states inserted into the ReachStore during a run."""
    return stats["reach_states_generated"]


def assert_state_count_bounds(mode: EffortMode, k: int, generated: int,
                              unpush_count: int) -> None:
    """Per-mode bounds on generated reachable states, enforced on every run."""
    if mode.kind == "minimal":
        bound = k * (k + 1) // 2
        label = "k(k+1)/2"
    else:
        bound = k * unpush_count
        label = "k*|Unpush|"
    if generated > bound:
        raise InternalCheckError(
            f"{mode.kind} mode generated {generated} reachable states, "
            f"exceeding the {label} bound of {bound} at k={k}")


def run_engine(eng: Ic4Engine) -> Verdict:
    """Drive one Ic4Engine to a verdict (shared with the PD engine's local runs)."""

    def push_phase():
        outcome = eng.new_push()
        if outcome.kind == "invariant":
            return ("safe", outcome.level)
        if outcome.kind == "exhausted":
            fp = eng.push_standard()
            if fp is not None:
                return ("safe", fp)
        return ("open",)

    return eng.run(push_phase)


def prove_ic4(ts: TransitionSystem, mode: EffortMode = MINIMAL,
              opts: Optional[EngineOptions] = None,
              reach: Optional[ReachStore] = None) -> Verdict:
    """IC3 with NewPush: bad-state blocking, then push-with-fixing per frame."""
    eng = Ic4Engine(ts, mode, opts, reach=reach)
    verdict = run_engine(eng)
    assert_state_count_bounds(mode, eng.frames.top, eng.reach.generated,
                              len(eng.unpushable))
    verdict.stats["engine"] = {"minimal": "ic4-min", "maximal": "ic4-max",
                               "heuristic": "ic4-heur"}[mode.kind]
    verdict.stats["effort_mode"] = mode.kind
    verdict.stats["unpushable_clauses"] = len(eng.unpushable)
    return verdict
