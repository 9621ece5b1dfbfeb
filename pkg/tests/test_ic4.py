import dataclasses
import random

import pytest

from ic4mc.aiger import encode, parse_aag
from ic4mc.cli import generate_circuit
from ic4mc.fixtures import FIXTURE_NAMES, fixture_system, fixture_text
from ic4mc.ic3 import EngineOptions, InternalCheckError
from ic4mc.ic4 import (MAXIMAL, MINIMAL, EffortMode, Ic4Engine,
                       assert_state_count_bounds, heuristic, prove_ic4)
from ic4mc.logic import Clause, Literal
from ic4mc.oracle import bfs, check_invariant, oracle_verdict, validate_trace

MODES = [MINIMAL, MAXIMAL, heuristic()]
ORACLE_VERDICTS = {"ts-stuck": "safe", "ts-sat3": "safe", "ts-cnt4": "unsafe"}


@pytest.mark.parametrize("name", FIXTURE_NAMES)
@pytest.mark.parametrize("mode", MODES, ids=lambda m: m.kind)
def test_fixture_verdicts_all_modes(name, mode):
    ts = fixture_system(name)
    v = prove_ic4(ts, mode)
    assert v.kind == ORACLE_VERDICTS[name]
    rm = bfs(ts)
    if v.is_safe:
        assert check_invariant(ts, v.invariant, rm) is None
        assert v.stats["frames_opened"] <= rm.diameter + 1
    else:
        assert validate_trace(ts, v.trace) is None


@pytest.mark.parametrize("mode", MODES, ids=lambda m: m.kind)
def test_counter_trace_is_the_forced_path(mode):
    ts = fixture_system("ts-cnt4")
    v = prove_ic4(ts, mode)
    assert [ts.state_to_bits(s) for s in v.trace.states] == [0, 1, 2, 3]


def test_effort_mode_validation():
    with pytest.raises(ValueError):
        EffortMode("eager")
    with pytest.raises(ValueError):
        EffortMode("heuristic", budget=0, max_unpush_per_frame=3)
    with pytest.raises(ValueError):
        EffortMode("heuristic", budget=100, max_unpush_per_frame=0)


def test_check_push_examples():
    sat3 = fixture_system("ts-sat3")
    l0, l1 = sat3.state_vars
    eng = Ic4Engine(sat3, MINIMAL)
    holds = Clause([Literal(l0, True), Literal(l1, False)])
    assert eng.check_push(holds, 0)[0] == "holds"

    cnt4 = fixture_system("ts-cnt4")
    l0, l1 = cnt4.state_vars
    eng = Ic4Engine(cnt4, MINIMAL)
    cl = Clause([Literal(l0, False), Literal(l1, False)])
    assert eng.check_push(cl, 0)[0] == "holds"
    verdict, witness = eng.check_push(cl, 1)
    assert verdict == "fails"
    assert cnt4.state_to_bits(witness) == 3


def cnt4_without_property():
    circuit = parse_aag(fixture_text("ts-cnt4"))
    return encode(dataclasses.replace(circuit, bad=0), name="cnt4-noprop")


def test_new_push_proves_unpushability():
    # counter with the property stripped: state 3 is reachable (depth 3) but
    # not within 2 steps, so a clause excluding it sits correctly in F_2 yet
    # can never be pushed
    ts = cnt4_without_property()
    l0, l1 = ts.state_vars
    eng = Ic4Engine(ts, MINIMAL)
    eng.frames.open_frame()  # top = 2
    excludes_2 = Clause([Literal(l0, True), Literal(l1, False)])
    excludes_3 = Clause([Literal(l0, False), Literal(l1, False)])
    eng.insert_clause(excludes_2, 1)
    eng.insert_clause(excludes_3, 2)

    out = eng.new_push()
    assert out.kind == "unpushable"
    assert out.clause == excludes_3
    assert validate_trace(ts, out.trace) is None
    assert len(out.trace) == 4  # k + 2 states for k = 2
    endpoint = out.trace.states[-1]
    assert ts.state_to_bits(endpoint) == 3
    assert eng.reach.covers(endpoint).depth == bfs(ts).depth[3] == 3
    # tight against the minimal-mode bound: 3 = k(k+1)/2 at k = 2
    assert eng.reach.generated == 3
    assert excludes_3 in eng.unpushable


def test_unpushability_reuses_stored_states():
    ts = cnt4_without_property()
    l0, l1 = ts.state_vars
    eng = Ic4Engine(ts, MINIMAL)
    eng.frames.open_frame()
    eng.insert_clause(Clause([Literal(l0, True), Literal(l1, False)]), 1)
    excludes_3 = Clause([Literal(l0, False), Literal(l1, False)])
    eng.insert_clause(excludes_3, 2)
    eng.new_push()
    proofs = eng.stats["unpush_proofs"]
    hits = eng.reach.reuse_hits
    # a later failing condition with a stored witness needs no new proof work
    res = eng.fix_clause(excludes_3, 2, ts.state_from_bits(3), None)
    assert res == "unpushable"
    assert eng.stats["unpush_proofs"] == proofs
    assert eng.reach.reuse_hits == hits + 1


def test_state_count_bound_assertions():
    assert_state_count_bounds(MINIMAL, 2, 3, 0)
    with pytest.raises(InternalCheckError):
        assert_state_count_bounds(MINIMAL, 2, 4, 0)
    assert_state_count_bounds(MAXIMAL, 2, 2, 1)
    with pytest.raises(InternalCheckError):
        assert_state_count_bounds(MAXIMAL, 2, 3, 1)
    with pytest.raises(InternalCheckError):
        assert_state_count_bounds(heuristic(), 3, 1, 0)


def test_tiny_budget_falls_back_to_standard_push():
    mode = heuristic(budget=1, max_unpush_per_frame=1)
    for name in FIXTURE_NAMES:
        ts = fixture_system(name)
        v = prove_ic4(ts, mode)
        assert v.kind == ORACLE_VERDICTS[name]


def test_runs_are_deterministic():
    ts = fixture_system("ts-sat3")
    a = prove_ic4(ts, MAXIMAL, EngineOptions(seed=6))
    b = prove_ic4(ts, MAXIMAL, EngineOptions(seed=6))
    assert a.invariant == b.invariant and a.stats == b.stats


def test_stats_record_engine_and_mode():
    ts = fixture_system("ts-stuck")
    for mode, engine in [(MINIMAL, "ic4-min"), (MAXIMAL, "ic4-max"),
                         (heuristic(), "ic4-heur")]:
        v = prove_ic4(ts, mode)
        assert v.stats["engine"] == engine
        assert v.stats["effort_mode"] == mode.kind
        assert "unpushable_clauses" in v.stats


@pytest.mark.parametrize("mode", MODES, ids=lambda m: m.kind)
def test_random_models_agree_with_oracle(mode):
    rng = random.Random(101)
    for i in range(20):
        circuit = generate_circuit(rng, max_latches=5, max_ands=12)
        ts = encode(circuit, name=f"rnd{i}")
        expected, _ = oracle_verdict(ts, bfs(ts))
        v = prove_ic4(ts, mode, EngineOptions(seed=i))
        assert v.kind == expected, (i, mode.kind)
        if v.is_safe:
            assert check_invariant(ts, v.invariant, bfs(ts)) is None
            assert v.stats["frames_opened"] <= bfs(ts).diameter + 1
        else:
            assert validate_trace(ts, v.trace) is None


def test_reuse_never_generates_more_states():
    rng = random.Random(55)
    with_reuse = without_reuse = 0
    for i in range(30):
        circuit = generate_circuit(rng, max_latches=6, max_ands=16)
        ts = encode(circuit, name=f"reuse{i}")
        a = prove_ic4(ts, MAXIMAL, EngineOptions(seed=i, reuse=True))
        b = prove_ic4(ts, MAXIMAL, EngineOptions(seed=i, reuse=False))
        assert a.kind == b.kind
        with_reuse += a.stats["reach_states_generated"]
        without_reuse += b.stats["reach_states_generated"]
    assert with_reuse <= without_reuse
