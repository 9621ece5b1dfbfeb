"""Variable / literal / clause / cube / state vocabulary shared by all engines.

Everything here is immutable and hashable.  Literals are kept in canonical
variable-index order inside clauses and cubes, so structural equality decides
semantic equality of literal sets and subsumption is a linear merge.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional


class Role(enum.Enum):
    CURRENT = "state-current"
    NEXT = "state-next"
    INPUT = "input"
    AUX = "auxiliary"


@dataclass(frozen=True)
class Var:
    """A variable in a transition system's table.  Index is table-unique."""

    index: int
    role: Role

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("variable index must be non-negative")


@dataclass(frozen=True, order=True)
class Literal:
    """A variable index with a polarity."""

    var: int
    positive: bool

    def __neg__(self) -> "Literal":
        return Literal(self.var, not self.positive)

    def __repr__(self):
        return f"{'' if self.positive else '~'}v{self.var}"


class DomainError(ValueError):
    """A clause or cube mentions a variable outside a state's domain."""


def _canonical(literals: Iterable[Literal], kind: str) -> tuple[Literal, ...]:
    by_var: dict[int, Literal] = {}
    for lit in literals:
        prev = by_var.get(lit.var)
        if prev is None:
            by_var[lit.var] = lit
        elif prev.positive != lit.positive:
            raise ValueError(f"{kind} contains opposite literals on v{lit.var}")
    return tuple(by_var[v] for v in sorted(by_var))


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals, duplicate-free, sorted by variable index.

    Tautologies (a variable in both polarities) are rejected at construction.
    The empty clause is allowed and is unsatisfiable.
    """

    literals: tuple[Literal, ...]

    def __init__(self, literals: Iterable[Literal] = ()):
        object.__setattr__(self, "literals", _canonical(literals, "clause"))

    def __len__(self):
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def variables(self) -> tuple[int, ...]:
        return tuple(l.var for l in self.literals)

    def subsumes(self, other: "Clause") -> bool:
        """True iff self's literal set is a subset of other's (self implies other)."""
        return set(self.literals) <= set(other.literals)

    def negate(self) -> "Cube":
        return Cube(-l for l in self.literals)

    def without(self, lit: Literal) -> "Clause":
        return Clause(l for l in self.literals if l != lit)

    def __repr__(self):
        return "(" + " | ".join(map(repr, self.literals)) + ")"


@dataclass(frozen=True)
class Cube:
    """Conjunction of literals, duplicate-free, sorted by variable index."""

    literals: tuple[Literal, ...]

    def __init__(self, literals: Iterable[Literal] = ()):
        object.__setattr__(self, "literals", _canonical(literals, "cube"))

    def __len__(self):
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def negate(self) -> Clause:
        return Clause(-l for l in self.literals)

    def __repr__(self):
        return "(" + " & ".join(map(repr, self.literals)) + ")"


def negate_cube(c: Cube) -> Clause:
    """Clause satisfied exactly by the assignments falsifying cube c."""
    return c.negate()


@dataclass(frozen=True)
class State:
    """Total assignment to the state-current variables of one system.

    ``vars`` lists the variable indices in ascending order; ``values`` gives
    the assigned booleans in the same order.
    """

    vars: tuple[int, ...]
    values: tuple[bool, ...]

    def __post_init__(self):
        if len(self.vars) != len(self.values):
            raise ValueError("vars/values length mismatch")

    def value(self, var: int) -> bool:
        try:
            return self.values[self.vars.index(var)]
        except ValueError:
            raise DomainError(f"v{var} is not a state variable of this state")

    def agrees(self, lit: Literal) -> bool:
        return self.value(lit.var) == lit.positive

    def to_cube(self) -> Cube:
        """The cube satisfied only by this state."""
        return Cube(Literal(v, val) for v, val in zip(self.vars, self.values))

    def __repr__(self):
        bits = "".join("1" if v else "0" for v in self.values)
        return f"State({bits})"


def state_to_cube(s: State) -> Cube:
    return s.to_cube()


def satisfies(s: State, cl: Clause) -> bool:
    """True iff some literal of cl is assigned true by s.

    Raises DomainError if cl mentions a variable outside s's domain.
    """
    dom = set(s.vars)
    for lit in cl:
        if lit.var not in dom:
            raise DomainError(f"clause variable v{lit.var} outside state domain")
    return any(s.agrees(lit) for lit in cl)


def satisfies_cube(s: State, c: Cube) -> bool:
    return all(s.agrees(lit) for lit in c)


def subsumes(a: Clause, b: Clause) -> bool:
    return a.subsumes(b)


def remap_clause(cl: Clause, mapping: dict[int, int]) -> Clause:
    """Rename clause variables through a bijection (e.g. current -> next)."""
    return Clause(Literal(mapping[l.var], l.positive) for l in cl)
