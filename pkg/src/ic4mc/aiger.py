"""AIGER ASCII frontend: parse "aag" circuits and encode them as CNF.

Supported subset: aag version 1 with exactly one output (interpreted as the
bad signal), or version 1.9 with exactly one "b" line and no constraint /
justice / fairness sections.  Binary "aig" files are rejected with a pointer
to the standard aigtoaig conversion tool.

Encoding produces a TransitionSystem with
  * init: unit clauses over current-state variables (one initial state),
  * trans: Tseitin clauses for the next-state cones plus binding clauses
    equating each next-state variable with its next-function literal,
  * prop: an explicit CNF over current-state variables, obtained by
    enumerating the bad cone over its latch support (a state is bad iff some
    input assignment raises the bad signal there).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .logic import Clause, Literal, Role, State, Var


class AigerError(ValueError):
    """Malformed AIGER input; message carries the offending line number."""


class EncodeError(ValueError):
    """Circuit cannot be encoded under the supported subset."""


@dataclass
class AigCircuit:
    """An and-inverter circuit in AIGER literal numbering.

    Literals are even for positive variable references, odd for negated
    ones; 0 is constant false and 1 constant true.
    """

    maxvar: int
    inputs: list[int]
    latches: list[tuple[int, int, int]]  # (state literal, next literal, reset bit)
    ands: list[tuple[int, int, int]]  # (lhs, rhs0, rhs1), lhs > rhs0, rhs1
    bad: int
    symbols: dict[str, str] = field(default_factory=dict)
    comment: str = ""

    @property
    def num_inputs(self) -> int:
        return len(self.inputs)

    @property
    def num_latches(self) -> int:
        return len(self.latches)

    @property
    def num_ands(self) -> int:
        return len(self.ands)

    def simulate(self, state_bits: int, input_bits: int) -> tuple[int, bool]:
        """One-step simulation.  Bit j of state_bits is latch j, LSB first."""
        env = self._eval_env(state_bits, input_bits)
        nxt = 0
        for j, (_, nf, _) in enumerate(self.latches):
            if _eval_lit(nf, env):
                nxt |= 1 << j
        return nxt, _eval_lit(self.bad, env)

    def bad_at(self, state_bits: int, input_bits: int) -> bool:
        return _eval_lit(self.bad, self._eval_env(state_bits, input_bits))

    def _eval_env(self, state_bits: int, input_bits: int) -> dict[int, bool]:
        env: dict[int, bool] = {}
        for j, lit in enumerate(self.inputs):
            env[lit >> 1] = bool(input_bits >> j & 1)
        for j, (lit, _, _) in enumerate(self.latches):
            env[lit >> 1] = bool(state_bits >> j & 1)
        for lhs, r0, r1 in sorted(self.ands):
            env[lhs >> 1] = _eval_lit(r0, env) and _eval_lit(r1, env)
        return env

    @property
    def reset_bits(self) -> int:
        bits = 0
        for j, (_, _, r) in enumerate(self.latches):
            bits |= r << j
        return bits


def _eval_lit(lit: int, env: dict[int, bool]) -> bool:
    if lit < 2:
        return lit == 1
    v = env[lit >> 1]
    return v if lit % 2 == 0 else not v


def parse_aag(text: Union[str, bytes]) -> AigCircuit:
    """Parse AIGER ASCII.  Raises AigerError with a line number on bad input."""
    if isinstance(text, bytes):
        if text.startswith(b"aig "):
            raise AigerError(
                "line 1: binary 'aig' format is not supported; convert with "
                "'aigtoaig input.aig output.aag' first")
        text = text.decode("ascii", errors="replace")
    lines = text.splitlines()

    def fail(lineno: int, msg: str):
        raise AigerError(f"line {lineno}: {msg}")

    if not lines:
        fail(1, "empty input")
    header = lines[0].split()
    if not header or header[0] != "aag":
        if header and header[0] == "aig":
            fail(1, "binary 'aig' format is not supported; convert with "
                    "'aigtoaig input.aig output.aag' first")
        fail(1, "expected 'aag' header")
    if not 6 <= len(header) <= 10 or not all(t.isdigit() for t in header[1:]):
        fail(1, "malformed header, expected 'aag M I L O A [B C J F]'")
    m, i, l, o, a = (int(t) for t in header[1:6])
    extra = [int(t) for t in header[6:]]
    b = extra[0] if extra else 0
    if any(extra[1:]):
        fail(1, "constraint/justice/fairness sections are not supported")
    if o + b != 1:
        if o + b == 0:
            fail(1, "no output or bad-state property; nothing to check")
        fail(1, f"expected exactly one output or bad-state property, got {o + b}; "
                "split the file into one property per model")

    lineno = 1

    def next_line(what: str) -> str:
        nonlocal lineno
        lineno += 1
        if lineno > len(lines):
            fail(lineno, f"unexpected end of file, expected {what}")
        return lines[lineno - 1]

    def check_lit(lit: int, what: str):
        if lit > 2 * m + 1:
            fail(lineno, f"{what} literal {lit} out of range (maxvar {m})")

    inputs = []
    for j in range(i):
        tok = next_line(f"input {j}").split()
        if len(tok) != 1 or not tok[0].isdigit():
            fail(lineno, "malformed input definition")
        lit = int(tok[0])
        check_lit(lit, "input")
        if lit < 2 or lit % 2:
            fail(lineno, f"input literal {lit} must be an even non-constant literal")
        inputs.append(lit)

    latches = []
    for j in range(l):
        tok = next_line(f"latch {j}").split()
        if len(tok) not in (2, 3) or not all(t.isdigit() for t in tok):
            fail(lineno, "malformed latch definition")
        lit, nf = int(tok[0]), int(tok[1])
        check_lit(lit, "latch")
        check_lit(nf, "latch next-state")
        if lit < 2 or lit % 2:
            fail(lineno, f"latch literal {lit} must be an even non-constant literal")
        reset = int(tok[2]) if len(tok) == 3 else 0
        if reset == lit:
            fail(lineno, "nondeterministic latch reset values are not supported")
        if reset not in (0, 1):
            fail(lineno, f"unsupported latch reset value {reset}")
        latches.append((lit, nf, reset))

    bad = None
    for j in range(o + b):
        tok = next_line("output/bad").split()
        if len(tok) != 1 or not tok[0].isdigit():
            fail(lineno, "malformed output/bad definition")
        bad = int(tok[0])
        check_lit(bad, "output/bad")

    defined = {lit >> 1 for lit in inputs} | {lit >> 1 for lit, _, _ in latches}
    ands = []
    for j in range(a):
        tok = next_line(f"and gate {j}").split()
        if len(tok) != 3 or not all(t.isdigit() for t in tok):
            fail(lineno, "malformed and-gate definition")
        lhs, r0, r1 = (int(t) for t in tok)
        for lit, what in ((lhs, "and lhs"), (r0, "and rhs0"), (r1, "and rhs1")):
            check_lit(lit, what)
        if lhs % 2 or lhs < 2:
            fail(lineno, f"and lhs {lhs} must be an even non-constant literal")
        if lhs <= r0 or lhs <= r1:
            fail(lineno, f"and lhs {lhs} violates topological order "
                         f"(must exceed operands {r0}, {r1})")
        if lhs >> 1 in defined:
            fail(lineno, f"literal {lhs} defined twice")
        defined.add(lhs >> 1)
        ands.append((lhs, r0, r1))

    symbols: dict[str, str] = {}
    comment_lines: list[str] = []
    in_comment = False
    for off, raw in enumerate(lines[lineno:], start=lineno + 1):
        if in_comment:
            comment_lines.append(raw)
        elif raw == "c":
            in_comment = True
        elif raw and raw[0] in "ilob" and " " in raw:
            name, val = raw.split(" ", 1)
            symbols[name] = val
        elif raw.strip():
            fail(off, f"unsupported section {raw.split()[0]!r}")

    # references must be defined (inputs, latches, gates or constants)
    def check_ref(lit: int, what: str):
        if lit >= 2 and (lit >> 1) not in defined:
            raise AigerError(f"{what} references undefined literal {lit}")

    check_ref(bad, "output/bad")
    for lit, nf, _ in latches:
        check_ref(nf, f"latch {lit} next-state")
    for lhs, r0, r1 in ands:
        check_ref(r0, f"and {lhs}")
        check_ref(r1, f"and {lhs}")

    return AigCircuit(maxvar=m, inputs=inputs, latches=latches, ands=ands,
                      bad=bad, symbols=symbols, comment="\n".join(comment_lines))


@dataclass
class TransitionSystem:
    """CNF-level model: I over current vars, T over all copies, P over current vars."""

    name: str
    circuit: AigCircuit
    vars: list[Var]
    state_vars: list[int]
    input_vars: list[int]
    next_vars: list[int]
    init: list[Clause]
    trans: list[Clause]
    prop: list[Clause]

    @property
    def num_vars(self) -> int:
        return len(self.vars)

    @property
    def num_latches(self) -> int:
        return len(self.state_vars)

    @property
    def prime(self) -> dict[int, int]:
        return dict(zip(self.state_vars, self.next_vars))

    @property
    def init_state(self) -> State:
        bits = self.circuit.reset_bits
        return self.state_from_bits(bits)

    def state_from_bits(self, bits: int) -> State:
        return State(vars=tuple(self.state_vars),
                     values=tuple(bool(bits >> j & 1) for j in range(self.num_latches)))

    def state_to_bits(self, s: State) -> int:
        pos = {v: j for j, v in enumerate(self.state_vars)}
        bits = 0
        for v, val in zip(s.vars, s.values):
            if val:
                bits |= 1 << pos[v]
        return bits

    def holds_prop(self, s: State) -> bool:
        from .logic import satisfies
        return all(satisfies(s, cl) for cl in self.prop)


_PROP_SUPPORT_CAP = 16


def encode(circuit: AigCircuit, name: str = "model") -> TransitionSystem:
    """Tseitin-encode a circuit into a TransitionSystem."""
    L, NI = circuit.num_latches, circuit.num_inputs
    vars: list[Var] = []
    state_vars = [_new_var(vars, Role.CURRENT) for _ in range(L)]
    input_vars = [_new_var(vars, Role.INPUT) for _ in range(NI)]
    next_vars = [_new_var(vars, Role.NEXT) for _ in range(L)]

    base: dict[int, Literal] = {}  # AIGER var -> literal over current/input vars
    for j, lit in enumerate(circuit.inputs):
        base[lit >> 1] = Literal(input_vars[j], True)
    for j, (lit, _, _) in enumerate(circuit.latches):
        base[lit >> 1] = Literal(state_vars[j], True)

    gates = {lhs >> 1: (r0, r1) for lhs, r0, r1 in circuit.ands}
    trans: list[Clause] = []
    cache: dict[int, Union[bool, Literal]] = {}

    def resolve(lit: int) -> Union[bool, Literal]:
        """Literal (or constant) over current/input/aux vars for an AIGER literal."""
        if lit < 2:
            return lit == 1
        val = _resolve_var(lit >> 1)
        if isinstance(val, bool):
            return val if lit % 2 == 0 else not val
        return val if lit % 2 == 0 else -val

    def _resolve_var(av: int) -> Union[bool, Literal]:
        if av in cache:
            return cache[av]
        if av in base:
            cache[av] = base[av]
            return cache[av]
        r0, r1 = gates[av]
        a, b = resolve(r0), resolve(r1)
        if a is False or b is False:
            out: Union[bool, Literal] = False
        elif a is True:
            out = b
        elif b is True:
            out = a
        elif a == b:
            out = a
        elif a == -b:
            out = False
        else:
            g = Literal(_new_var(vars, Role.AUX), True)
            trans.append(Clause([-g, a]))
            trans.append(Clause([-g, b]))
            trans.append(Clause([g, -a, -b]))
            out = g
        cache[av] = out
        return out

    for j, (_, nf, _) in enumerate(circuit.latches):
        n = Literal(next_vars[j], True)
        r = resolve(nf)
        if isinstance(r, bool):
            trans.append(Clause([n if r else -n]))
        else:
            trans.append(Clause([-n, r]))
            trans.append(Clause([n, -r]))

    init = [Clause([Literal(state_vars[j], reset == 1)])
            for j, (_, _, reset) in enumerate(circuit.latches)]

    prop = _encode_prop(circuit, state_vars)

    return TransitionSystem(name=name, circuit=circuit, vars=vars,
                            state_vars=state_vars, input_vars=input_vars,
                            next_vars=next_vars, init=init, trans=trans, prop=prop)


def _new_var(table: list[Var], role: Role) -> int:
    table.append(Var(len(table), role))
    return table[-1].index


def _cone_support(circuit: AigCircuit, lit: int) -> tuple[list[int], list[int]]:
    """(latch positions, input positions) in the support of an AIGER literal."""
    inputs = {l >> 1: j for j, l in enumerate(circuit.inputs)}
    latchpos = {l >> 1: j for j, (l, _, _) in enumerate(circuit.latches)}
    gates = {lhs >> 1: (r0, r1) for lhs, r0, r1 in circuit.ands}
    lsup: set[int] = set()
    isup: set[int] = set()
    seen: set[int] = set()
    stack = [lit >> 1]
    while stack:
        v = stack.pop()
        if v in seen or v == 0:
            continue
        seen.add(v)
        if v in latchpos:
            lsup.add(latchpos[v])
        elif v in inputs:
            isup.add(inputs[v])
        else:
            r0, r1 = gates[v]
            stack.extend((r0 >> 1, r1 >> 1))
    return sorted(lsup), sorted(isup)


def _encode_prop(circuit: AigCircuit, state_vars: list[int]) -> list[Clause]:
    """P as CNF over state-current variables.

    A state is bad iff some input assignment raises the bad signal there;
    one clause per bad support-assignment, projected onto the latch support.
    """
    bad = circuit.bad
    if bad == 0:
        return []
    if bad == 1:
        return [Clause()]
    lsup, isup = _cone_support(circuit, bad)
    if len(lsup) + len(isup) > _PROP_SUPPORT_CAP:
        raise EncodeError(
            f"bad-signal cone support of {len(lsup) + len(isup)} variables exceeds "
            f"the desk-scale enumeration cap of {_PROP_SUPPORT_CAP}")
    clauses: list[Clause] = []
    for assignment in range(1 << len(lsup)):
        sbits = 0
        for p, j in enumerate(lsup):
            if assignment >> p & 1:
                sbits |= 1 << j
        bad_here = False
        for ibits_small in range(1 << len(isup)):
            ibits = 0
            for p, j in enumerate(isup):
                if ibits_small >> p & 1:
                    ibits |= 1 << j
            if circuit.bad_at(sbits, ibits):
                bad_here = True
                break
        if bad_here:
            clauses.append(Clause(
                Literal(state_vars[j], not bool(assignment >> p & 1))
                for p, j in enumerate(lsup)))
    return clauses


def to_dimacs(ts: TransitionSystem, which: Iterable[str] = ("init", "trans", "prop")) -> str:
    """DIMACS dump of the system CNF with variable-role comment lines."""
    role_note = {Role.CURRENT: "latch {} current", Role.NEXT: "latch {} next",
                 Role.INPUT: "input {}", Role.AUX: "aux {}"}
    lines = [f"c model {ts.name}"]
    counters = {r: 0 for r in Role}
    for v in ts.vars:
        counters[v.role] += 1
        lines.append(f"c var {v.index + 1} = " + role_note[v.role].format(counters[v.role]))
    clauses: list[Clause] = []
    for part in which:
        clauses.extend(getattr(ts, part))
    lines.append(f"p cnf {ts.num_vars} {len(clauses)}")
    for cl in clauses:
        lines.append(" ".join(str(l.var + 1 if l.positive else -(l.var + 1)) for l in cl) + " 0")
    return "\n".join(lines) + "\n"


def to_aag(circuit: AigCircuit) -> str:
    """Serialize a circuit back to AIGER ASCII (aag, one output)."""
    lines = [f"aag {circuit.maxvar} {circuit.num_inputs} {circuit.num_latches} 1 "
             f"{circuit.num_ands}"]
    lines.extend(str(lit) for lit in circuit.inputs)
    for lit, nf, reset in circuit.latches:
        lines.append(f"{lit} {nf}" if reset == 0 else f"{lit} {nf} {reset}")
    lines.append(str(circuit.bad))
    for lhs, r0, r1 in circuit.ands:
        lines.append(f"{lhs} {r0} {r1}")
    for name, val in circuit.symbols.items():
        lines.append(f"{name} {val}")
    if circuit.comment:
        lines.append("c")
        lines.append(circuit.comment)
    return "\n".join(lines) + "\n"


def load_file(path: str) -> TransitionSystem:
    with open(path, "rb") as fh:
        data = fh.read()
    import os
    return encode(parse_aag(data), name=os.path.basename(path))
