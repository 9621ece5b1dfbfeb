"""Command-line driver: parse a model, run an engine, emit verdict and
certificates, plus a fuzzing harness that cross-checks every engine against
the explicit-state oracle.

Exit codes follow model-checking tool conventions: 20 unsafe, 10 safe,
0 unknown (limits hit), 1 usage or input error, 2 internal assertion.
The first line of standard output is always SAFE, UNSAFE or UNKNOWN.
"""

from __future__ import annotations

import argparse
import json
import random
import statistics
import sys
from dataclasses import replace
from typing import Optional

from . import oracle
from .aiger import (AigCircuit, AigerError, EncodeError, TransitionSystem,
                    encode, load_file, to_aag)
from .ic3 import EngineOptions, InternalCheckError, prove_ic3
from .ic4 import MAXIMAL, MINIMAL, heuristic, prove_ic4
from .pd import prove_pd
from .reach import ReachStore
from .results import Trace, Verdict

ENGINES = ("ic3", "ic4-min", "ic4-max", "ic4-heur", "ic4-pd")
IC4_ENGINES = ("ic4-min", "ic4-max", "ic4-heur")

EXIT_UNKNOWN = 0
EXIT_USAGE = 1
EXIT_INTERNAL = 2
EXIT_SAFE = 10
EXIT_UNSAFE = 20


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ic4mc",
                description="SAT-based safety model checker for AIGER circuits "
                            "(IC3 / IC4 / property decomposition)")
    p.add_argument("model", nargs="?", help="AIGER ASCII (.aag) model file")
    p.add_argument("--engine", choices=ENGINES, default="ic4-min",
                   help="proof engine (default: ic4-min)")
    p.add_argument("--seed", type=int, default=0, help="solver / fuzz RNG seed")
    p.add_argument("--max-frames", type=int, default=10_000)
    p.add_argument("--time-limit-ms", type=int, default=None)
    p.add_argument("--heur-conflicts", type=int, default=10_000,
                   help="ic4-heur: conflict budget per condition-fixing attempt")
    p.add_argument("--heur-unpush-per-frame", type=int, default=3,
                   help="ic4-heur: unpushability proofs per frame before plain pushing")
    p.add_argument("--oracle-check", action="store_true",
                   help="cross-validate verdict and certificate by explicit BFS")
    p.add_argument("--certificate", metavar="PATH",
                   help="on SAFE, write the invariant as DIMACS over latch variables")
    p.add_argument("--witness", metavar="PATH",
                   help="on UNSAFE, write an HWMCC-style stimulus witness")
    p.add_argument("--dump-traces", metavar="PATH",
                   help="write all reachable-state traces in stimulus format")
    p.add_argument("--stats", metavar="PATH",
                   help="write run stats (JSON line) or fuzz CSV to this file")
    p.add_argument("--fuzz", type=int, metavar="N",
                   help="generate and check N random models instead of a run")
    p.add_argument("--fuzz-latches", type=int, default=8, metavar="L")
    p.add_argument("--fuzz-ands", type=int, default=32, metavar="A")
    return p


def _options(args) -> EngineOptions:
    return EngineOptions(seed=args.seed, max_frames=args.max_frames,
                         time_limit_ms=args.time_limit_ms,
                         heur_conflicts=args.heur_conflicts,
                         heur_unpush_per_frame=args.heur_unpush_per_frame)


def dispatch(ts: TransitionSystem, engine: str, opts: EngineOptions,
             reach: Optional[ReachStore] = None) -> Verdict:
    if engine == "ic3":
        return prove_ic3(ts, opts, reach=reach)
    if engine == "ic4-min":
        return prove_ic4(ts, MINIMAL, opts, reach=reach)
    if engine == "ic4-max":
        return prove_ic4(ts, MAXIMAL, opts, reach=reach)
    if engine == "ic4-heur":
        mode = heuristic(opts.heur_conflicts, opts.heur_unpush_per_frame)
        return prove_ic4(ts, mode, opts, reach=reach)
    if engine == "ic4-pd":
        return prove_pd(ts, MINIMAL, opts, reach=reach)
    raise ValueError(f"unknown engine {engine!r}")


# ---- output emission -----------------------------------------------------------


def _state_line(s) -> str:
    return "".join("1" if v else "0" for v in s.values)


def _input_line(n_inputs: int, bits: int) -> str:
    return "".join(str(bits >> j & 1) for j in range(n_inputs))


def emit_certificate(path: str, ts: TransitionSystem, engine: str,
                     verdict: Verdict) -> None:
    pos = {v: j + 1 for j, v in enumerate(ts.state_vars)}
    lines = [f"c inductive invariant for model {ts.name} (engine {engine})"]
    for j in range(ts.num_latches):
        lines.append(f"c var {j + 1} = latch {j}")
    lines.append(f"p cnf {ts.num_latches} {len(verdict.invariant)}")
    for cl in verdict.invariant:
        lines.append(" ".join(str(pos[l.var] if l.positive else -pos[l.var])
                              for l in cl) + " 0")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_witness(path: str, ts: TransitionSystem, trace: Trace) -> None:
    lines = ["1", "b0", _state_line(trace.states[0])]
    n = ts.circuit.num_inputs
    lines.extend(_input_line(n, b) for b in trace.inputs)
    lines.append(".")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_traces(path: str, ts: TransitionSystem, reach: ReachStore) -> None:
    n = ts.circuit.num_inputs
    chunks = []
    for trace in reach.all_traces():
        lines = [_state_line(trace.states[0])]
        lines.extend(_input_line(n, b) for b in trace.inputs)
        lines.append(".")
        chunks.append("\n".join(lines))
    with open(path, "w") as fh:
        fh.write("\n".join(chunks) + ("\n" if chunks else ""))


def _stats_record(ts: TransitionSystem, engine: str, seed: int,
                  verdict: Verdict) -> str:
    record = {"model": ts.name, "engine": engine, "seed": seed,
              "verdict": verdict.kind, "frames_used": verdict.frames_used,
              "reason": verdict.reason}
    record.update(verdict.stats)
    return json.dumps(record, sort_keys=True, default=str)


# ---- oracle cross-validation ---------------------------------------------------


def oracle_check(ts: TransitionSystem, verdict: Verdict,
                 rm: Optional[oracle.ReachMap] = None) -> None:
    """Raise InternalCheckError if the verdict or certificate disagrees with BFS."""
    rm = rm if rm is not None else oracle.bfs(ts)
    kind, depth = oracle.oracle_verdict(ts, rm)
    if kind == "inconclusive" or verdict.kind == "unknown":
        return
    if verdict.kind != kind:
        raise InternalCheckError(
            f"verdict {verdict.kind} disagrees with oracle {kind} on {ts.name}")
    if verdict.is_safe:
        failure = oracle.check_invariant(ts, verdict.invariant, rm)
        if failure is not None:
            raise InternalCheckError(f"certificate rejected on {ts.name}: {failure!r}")
    else:
        step = oracle.validate_trace(ts, verdict.trace)
        if step is not None:
            raise InternalCheckError(f"witness invalid at step {step} on {ts.name}")
        if ts.holds_prop(verdict.trace.states[-1]):
            raise InternalCheckError(f"witness does not end in a bad state on {ts.name}")
        if len(verdict.trace.states) - 1 < depth:
            raise InternalCheckError(
                f"witness shorter than the oracle's minimum depth on {ts.name}")


# ---- single-model run ----------------------------------------------------------


def run_model(args) -> int:
    ts = load_file(args.model)
    opts = _options(args)
    reach = ReachStore(ts)
    verdict = dispatch(ts, args.engine, opts, reach)
    if args.oracle_check:
        oracle_check(ts, verdict)
    print({"safe": "SAFE", "unsafe": "UNSAFE", "unknown": "UNKNOWN"}[verdict.kind])
    if args.certificate and verdict.is_safe:
        emit_certificate(args.certificate, ts, args.engine, verdict)
    if args.witness and verdict.is_unsafe:
        emit_witness(args.witness, ts, verdict.trace)
    if args.dump_traces:
        emit_traces(args.dump_traces, ts, reach)
    line = _stats_record(ts, args.engine, args.seed, verdict)
    if args.stats:
        with open(args.stats, "w") as fh:
            fh.write(line + "\n")
    else:
        print(line, file=sys.stderr)
    return {"safe": EXIT_SAFE, "unsafe": EXIT_UNSAFE, "unknown": EXIT_UNKNOWN}[verdict.kind]


# ---- fuzz harness --------------------------------------------------------------


def generate_circuit(rng: random.Random, max_latches: int, max_ands: int,
                     max_inputs: int = 2) -> AigCircuit:
    """A random well-formed AIG with one bad signal."""
    n_inputs = rng.randint(0, max_inputs)
    n_latches = rng.randint(1, max_latches)
    n_ands = rng.randint(0, max_ands)
    input_lits = [2 * (k + 1) for k in range(n_inputs)]
    latch_lits = [2 * (n_inputs + j + 1) for j in range(n_latches)]
    pool = input_lits + latch_lits

    def pick() -> int:
        return rng.choice(pool) ^ rng.randint(0, 1)

    ands = []
    for g in range(n_ands):
        lhs = 2 * (n_inputs + n_latches + g + 1)
        r0, r1 = pick(), pick()
        ands.append((lhs, max(r0, r1), min(r0, r1)))
        pool.append(lhs)
    latches = [(latch_lits[j], pick(), rng.randint(0, 1))
               for j in range(n_latches)]
    bad = pick()
    return AigCircuit(maxvar=n_inputs + n_latches + n_ands, inputs=input_lits,
                      latches=latches, ands=ands, bad=bad)


def _sample_model(rng, args, target: str, name: str):
    """Rejection-sample a model whose oracle verdict matches `target`."""
    last = None
    for _ in range(50):
        circuit = generate_circuit(rng, args.fuzz_latches, args.fuzz_ands)
        ts = encode(circuit, name=name)
        rm = oracle.bfs(ts)
        kind, depth = oracle.oracle_verdict(ts, rm)
        last = (circuit, ts, rm, kind, depth)
        if kind == target:
            return last
    return last


def fuzz(args) -> int:
    rng = random.Random(args.seed)
    opts = _options(args)
    rows = ["model,engine,verdict,frames,diameter,reach_generated"]
    gen_with: list[int] = []
    gen_without: list[int] = []

    def fail(name: str, circuit: AigCircuit, message: str) -> int:
        path = f"{name}.aag"
        with open(path, "w") as fh:
            fh.write(to_aag(circuit))
        print(f"fuzz failure on {name} (dumped to {path}): {message}", file=sys.stderr)
        return EXIT_INTERNAL

    for n in range(args.fuzz):
        name = f"fuzz-{n:04d}"
        target = "safe" if n % 2 == 0 else "unsafe"
        circuit, ts, rm, kind, depth = _sample_model(rng, args, target, name)
        rows.append(f"{name},oracle,{kind},,{rm.diameter},")
        for engine in ENGINES:
            reach = ReachStore(ts)
            try:
                verdict = dispatch(ts, engine, opts, reach)
                oracle_check(ts, verdict, rm)
                if verdict.kind == "unknown":
                    raise InternalCheckError(f"{engine} gave up: {verdict.reason}")
                if (engine in IC4_ENGINES and verdict.is_safe
                        and verdict.frames_used > rm.diameter + 1):
                    raise InternalCheckError(
                        f"{engine} used {verdict.frames_used} frames on a "
                        f"diameter-{rm.diameter} model")
            except (InternalCheckError, AssertionError) as exc:
                return fail(name, circuit, str(exc))
            gen = verdict.stats.get("reach_states_generated", 0)
            frames = "" if verdict.frames_used is None else verdict.frames_used
            rows.append(f"{name},{engine},{verdict.kind},{frames},{rm.diameter},{gen}")
            if engine == "ic4-max":
                gen_with.append(gen)
        try:
            verdict = dispatch(ts, "ic4-max", replace(opts, reuse=False))
            oracle_check(ts, verdict, rm)
        except (InternalCheckError, AssertionError) as exc:
            return fail(name, circuit, f"reuse-disabled run: {exc}")
        gen = verdict.stats.get("reach_states_generated", 0)
        frames = "" if verdict.frames_used is None else verdict.frames_used
        rows.append(f"{name},ic4-max-noreuse,{verdict.kind},{frames},{rm.diameter},{gen}")
        gen_without.append(gen)

    csv = "\n".join(rows) + "\n"
    if args.stats:
        with open(args.stats, "w") as fh:
            fh.write(csv)
    else:
        sys.stdout.write(csv)
    mean_with = statistics.mean(gen_with) if gen_with else 0.0
    mean_without = statistics.mean(gen_without) if gen_without else 0.0
    print(f"fuzz: {args.fuzz} models checked, all engine verdicts agree with the "
          f"oracle; mean reach states generated {mean_with:.3f} with reuse vs "
          f"{mean_without:.3f} without")
    return 0


# ---- entry point ----------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.fuzz is not None:
            if args.fuzz <= 0:
                parser.error("--fuzz needs a positive count")
            return fuzz(args)
        if not args.model:
            parser.error("a model file is required unless --fuzz is given")
        return run_model(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (AigerError, EncodeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InternalCheckError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
