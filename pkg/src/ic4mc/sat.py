"""Incremental SAT service used by all engines.

The bundled solver is a conflict-driven clause-learning solver with two
watched literals, first-UIP learning, phase saving, Luby restarts and
assumption-based solving with failed-assumption cores.  Clauses are never
removed; frame clauses are deactivated through activation literals instead.

Solver variables are positive integers, literals are signed integers
(DIMACS convention).  ``SolverHandle`` bridges between the engines'
``logic.Clause``/``logic.Literal`` vocabulary and the raw solver.

An external incremental solver can be plugged in by implementing the same
``new_var`` / ``add_clause`` / ``solve`` surface as ``CdclSolver`` (the
IPASIR-style add/assume/solve/value/failed operation set).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .logic import Clause, Literal, Role, State

TRUE, FALSE, UNDEF = 1, -1, 0

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"  # conflict budget exceeded


@dataclass
class SatResult:
    status: str
    model: Optional[dict[int, bool]] = None  # solver var -> value, total
    core: Optional[frozenset[int]] = None  # subset of the passed assumptions

    def __bool__(self):
        return self.status == SAT


def luby(i: int) -> int:
    """i-th term (1-based) of the Luby restart sequence."""
    x = i - 1
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x %= size
    return 1 << seq


class CdclSolver:
    """Minimal CDCL solver, deterministic for a fixed seed and call history."""

    RESTART_BASE = 128
    VAR_DECAY = 0.95

    def __init__(self, seed: int = 0):
        self._rng = random.Random(seed)
        self.nvars = 0
        self.ok = True
        self.assign: list[int] = [UNDEF]  # 1-based
        self.level: list[int] = [0]
        self.reason: list[Optional[list[int]]] = [None]
        self.phase: list[bool] = [False]
        self.activity: list[float] = [0.0]
        self.var_inc = 1.0
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.watches: dict[int, list[list[int]]] = {}
        self.clauses: list[list[int]] = []
        self.conflicts_total = 0

    # ---- variable / clause management -------------------------------------

    def new_var(self) -> int:
        self.nvars += 1
        self.assign.append(UNDEF)
        self.level.append(0)
        self.reason.append(None)
        self.phase.append(self._rng.random() < 0.5)
        self.activity.append(self._rng.random() * 1e-6)
        return self.nvars

    def _ensure_var(self, v: int):
        while self.nvars < v:
            self.new_var()

    def value(self, lit: int) -> int:
        v = self.assign[abs(lit)]
        return v if lit > 0 else -v

    def add_clause(self, lits: list[int]) -> None:
        """Add a clause permanently.  Must be called with no assumptions active."""
        assert not self.trail_lim, "add_clause only at decision level 0"
        if not self.ok:
            return
        for l in lits:
            self._ensure_var(abs(l))
        seen: dict[int, int] = {}
        out: list[int] = []
        for l in sorted(set(lits), key=abs):
            if self.value(l) == TRUE:
                return  # satisfied at root
            if self.value(l) == FALSE:
                continue
            if -l in seen:
                return  # tautology
            seen[l] = 1
            out.append(l)
        if not out:
            self.ok = False
            return
        if len(out) == 1:
            self._enqueue(out[0], None)
            if self._propagate() is not None:
                self.ok = False
            return
        self.clauses.append(out)
        self.watches.setdefault(out[0], []).append(out)
        self.watches.setdefault(out[1], []).append(out)

    # ---- search ------------------------------------------------------------

    def _enqueue(self, lit: int, reason: Optional[list[int]]):
        v = abs(lit)
        self.assign[v] = TRUE if lit > 0 else FALSE
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> Optional[list[int]]:
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            falsified = -p
            ws = self.watches.get(falsified)
            if not ws:
                continue
            keep: list[list[int]] = []
            i = 0
            while i < len(ws):
                c = ws[i]
                i += 1
                if c[0] == falsified:
                    c[0], c[1] = c[1], c[0]
                if self.value(c[0]) == TRUE:
                    keep.append(c)
                    continue
                moved = False
                for k in range(2, len(c)):
                    if self.value(c[k]) != FALSE:
                        c[1], c[k] = c[k], c[1]
                        self.watches.setdefault(c[1], []).append(c)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(c)
                if self.value(c[0]) == FALSE:
                    keep.extend(ws[i:])
                    self.watches[falsified] = keep
                    return c
                self._enqueue(c[0], c)
            self.watches[falsified] = keep
        return None

    def _bump(self, v: int):
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.nvars + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        learnt: list[int] = [0]
        seen = [False] * (self.nvars + 1)
        counter = 0
        p = 0
        idx = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        c: Optional[list[int]] = confl
        while True:
            assert c is not None
            for q in c:
                if q == p:
                    continue
                v = abs(q)
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            v = abs(p)
            idx -= 1
            seen[v] = False
            counter -= 1
            if counter == 0:
                break
            c = self.reason[v]
        learnt[0] = -p
        if len(learnt) == 1:
            bt = 0
        else:
            # move the highest-level tail literal into watch position 1
            mi = max(range(1, len(learnt)), key=lambda j: self.level[abs(learnt[j])])
            learnt[1], learnt[mi] = learnt[mi], learnt[1]
            bt = self.level[abs(learnt[1])]
        return learnt, bt

    def _analyze_final(self, failed: int, assumed: set[int]) -> frozenset[int]:
        """Failed-assumption core for an assumption found false."""
        core = {failed}
        seen = [False] * (self.nvars + 1)
        seen[abs(failed)] = True
        for lit in reversed(self.trail):
            v = abs(lit)
            if not seen[v] or self.level[v] == 0:
                continue
            r = self.reason[v]
            if r is None:
                if lit in assumed:
                    core.add(lit)
            else:
                for q in r:
                    if abs(q) != v and self.level[abs(q)] > 0:
                        seen[abs(q)] = True
        return frozenset(core)

    def _backtrack(self, lvl: int):
        while len(self.trail_lim) > lvl:
            lim = self.trail_lim.pop()
            while len(self.trail) > lim:
                lit = self.trail.pop()
                v = abs(lit)
                self.phase[v] = lit > 0
                self.assign[v] = UNDEF
                self.reason[v] = None
        self.qhead = min(self.qhead, len(self.trail))

    def _decide(self) -> int:
        best = 0
        best_act = -1.0
        for v in range(1, self.nvars + 1):
            if self.assign[v] == UNDEF and self.activity[v] > best_act:
                best, best_act = v, self.activity[v]
        if best == 0:
            return 0
        return best if self.phase[best] else -best

    def solve(self, assumptions: list[int] = (), conflict_budget: Optional[int] = None) -> SatResult:
        self._backtrack(0)
        for a in assumptions:
            self._ensure_var(abs(a))
        if not self.ok:
            return SatResult(UNSAT, core=frozenset())
        if self._propagate() is not None:
            self.ok = False
            return SatResult(UNSAT, core=frozenset())
        assumed = set(assumptions)
        conflicts = 0
        restarts = 0
        limit = self.RESTART_BASE * luby(1)
        since_restart = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                conflicts += 1
                self.conflicts_total += 1
                since_restart += 1
                if len(self.trail_lim) == 0:
                    self.ok = False
                    return SatResult(UNSAT, core=frozenset())
                learnt, bt = self._analyze(confl)
                self._backtrack(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                    # keep as a root fact; record for monotone DB semantics
                else:
                    self.clauses.append(learnt)
                    self.watches.setdefault(learnt[0], []).append(learnt)
                    self.watches.setdefault(learnt[1], []).append(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc /= self.VAR_DECAY
                if conflict_budget is not None and conflicts >= conflict_budget:
                    self._backtrack(0)
                    return SatResult(UNKNOWN)
                continue
            if since_restart >= limit:
                restarts += 1
                since_restart = 0
                limit = self.RESTART_BASE * luby(restarts + 1)
                self._backtrack(0)
                continue
            next_lit = 0
            while len(self.trail_lim) < len(assumptions):
                a = assumptions[len(self.trail_lim)]
                v = self.value(a)
                if v == TRUE:
                    self.trail_lim.append(len(self.trail))  # pseudo-level
                elif v == FALSE:
                    core = self._analyze_final(a, assumed)
                    self._backtrack(0)
                    return SatResult(UNSAT, core=core)
                else:
                    next_lit = a
                    break
            if next_lit == 0 and len(self.trail_lim) >= len(assumptions):
                next_lit = self._decide()
                if next_lit == 0:
                    model = {v: self.assign[v] == TRUE for v in range(1, self.nvars + 1)}
                    self._backtrack(0)
                    return SatResult(SAT, model=model)
            self.trail_lim.append(len(self.trail))
            self._enqueue(next_lit, None)

    # ---- debugging ----------------------------------------------------------

    def dump_dimacs(self) -> str:
        lines = [f"p cnf {self.nvars} {len(self.clauses)}"]
        for c in self.clauses:
            lines.append(" ".join(map(str, c)) + " 0")
        return "\n".join(lines) + "\n"


class SolverHandle:
    """Clause-level facade over a CdclSolver with frame activation literals.

    Tagged clauses are active only when their frame's activation literal is
    assumed; untagged clauses are always active.  Solver variables 1..n map
    to logic variables 0..n-1; activation variables live above that range.
    """

    def __init__(self, num_vars: int, seed: int = 0):
        self.solver = CdclSolver(seed=seed)
        self.num_vars = num_vars
        for _ in range(num_vars):
            self.solver.new_var()
        self.activation: dict[int, int] = {}  # frame index -> solver var
        self.sat_calls = 0

    # -- raw int helpers (engines use these heavily) --------------------------

    def to_int(self, lit: Literal) -> int:
        s = lit.var + 1
        return s if lit.positive else -s

    def from_clause(self, cl: Clause) -> list[int]:
        return [self.to_int(l) for l in cl]

    def activation_lit(self, tag: int) -> int:
        if tag not in self.activation:
            self.activation[tag] = self.solver.new_var()
        return self.activation[tag]

    def fresh_var(self) -> int:
        return self.solver.new_var()

    def add_raw(self, lits: list[int], tag: Optional[int] = None) -> None:
        if tag is not None:
            lits = lits + [-self.activation_lit(tag)]
        self.solver.add_clause(lits)

    def solve_raw(self, assumptions: list[int], conflict_budget: Optional[int] = None) -> SatResult:
        self.sat_calls += 1
        return self.solver.solve(list(assumptions), conflict_budget)

    # -- spec-level surface ----------------------------------------------------

    def add_clause(self, cl: Clause, tag: Optional[int] = None) -> None:
        self.add_raw(self.from_clause(cl), tag)

    def solve(self, assumptions: list[Literal] = (), conflict_budget: Optional[int] = None) -> SatResult:
        return self.solve_raw([self.to_int(l) for l in assumptions], conflict_budget)

    def extract_state(self, model: dict[int, bool], var_indices: list[int],
                      rename_to: Optional[list[int]] = None) -> State:
        """Project a model onto one variable copy, renamed to state-current vars.

        ``var_indices`` are the logic variable indices of the requested copy;
        ``rename_to`` gives the state-current indices (defaults to identity).
        """
        target = rename_to if rename_to is not None else var_indices
        order = sorted(range(len(target)), key=lambda i: target[i])
        return State(
            vars=tuple(target[i] for i in order),
            values=tuple(model[var_indices[i] + 1] for i in order),
        )

    def dump_dimacs(self) -> str:
        return self.solver.dump_dimacs()
