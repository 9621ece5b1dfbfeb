import random

import pytest

from ic4mc.aiger import encode
from ic4mc.cli import generate_circuit
from ic4mc.fixtures import FIXTURE_NAMES, fixture_system
from ic4mc.ic3 import EngineOptions
from ic4mc.ic4 import MAXIMAL, MINIMAL, heuristic
from ic4mc.logic import Clause, Literal, State
from ic4mc.oracle import bfs, check_invariant, oracle_verdict, validate_trace
from ic4mc.pd import PdState, form_q, prove_local, prove_pd, strengthen_q
from ic4mc.reach import ReachStore

ORACLE_VERDICTS = {"ts-stuck": "safe", "ts-sat3": "safe", "ts-cnt4": "unsafe"}


def test_form_q_is_the_full_negation():
    s = State(vars=(0, 1), values=(True, True))
    assert form_q(s) == Clause([Literal(0, False), Literal(1, False)])
    single = State(vars=(0,), values=(False,))
    assert form_q(single) == Clause([Literal(0, True)])


def test_pd_state_inv_dedupes_property_clauses():
    p = Clause([Literal(0, True)])
    extra = Clause([Literal(1, False)])
    st = PdState(prop=[p], learned=[p, extra])
    assert st.inv == [p, extra]


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fixture_verdicts(name):
    ts = fixture_system(name)
    v = prove_pd(ts)
    assert v.kind == ORACLE_VERDICTS[name]
    if v.is_safe:
        assert check_invariant(ts, v.invariant, bfs(ts)) is None
    else:
        assert validate_trace(ts, v.trace) is None


def test_unsafe_trace_violates_property_only_at_the_end():
    ts = fixture_system("ts-cnt4")
    v = prove_pd(ts)
    assert all(ts.holds_prop(s) for s in v.trace.states[:-1])
    assert not ts.holds_prop(v.trace.states[-1])


def test_prove_local_single_bad_state():
    # sat3's only bad state is 10, which is unreachable: the local run for
    # its Q needs no clauses beyond Q itself
    ts = fixture_system("ts-sat3")
    q = form_q(ts.state_from_bits(0b10))
    v = prove_local(q, ts, list(ts.prop), MINIMAL, EngineOptions(), ReachStore(ts))
    assert v.is_safe
    assert set(v.invariant) == {q}


def test_prove_local_counterexample_for_initial_state():
    ts = fixture_system("ts-sat3")
    q = form_q(ts.init_state)  # "property" falsified by the initial state
    v = prove_local(q, ts, list(ts.prop), MINIMAL, EngineOptions(), ReachStore(ts))
    assert v.is_unsafe and len(v.trace) == 1


def test_strengthen_q_keeps_required_literals():
    # Q for sat3's bad state 10 is (l0 | ~l1); dropping l0 leaves (~l1),
    # which the reachable transition 01 -> 11 breaks, and dropping ~l1
    # leaves (l0), which the initial state 00 falsifies
    ts = fixture_system("ts-sat3")
    q = form_q(ts.state_from_bits(0b10))
    widened, removed = strengthen_q(q, ts, list(ts.prop))
    assert widened == q and removed == 0


def test_strengthen_q_stops_at_single_literal():
    ts = fixture_system("ts-stuck")
    q = form_q(ts.state_from_bits(1))
    widened, removed = strengthen_q(q, ts, list(ts.prop))
    assert widened == q and removed == 0


def test_strengthen_q_widens_when_a_subclause_is_inductive():
    # two sticky-zero latches with bad = l0 & l1: Q for state 11 widens to
    # the single-literal (~l1), which is inductive on its own
    from ic4mc.aiger import parse_aag
    ts = encode(parse_aag("aag 3 0 2 1 1\n2 2\n4 4\n6\n6 2 4\n"), name="mem2")
    l0, l1 = ts.state_vars
    q = form_q(ts.state_from_bits(3))
    widened, removed = strengthen_q(q, ts, list(ts.prop))
    assert widened == Clause([Literal(l1, False)]) and removed == 1


def test_strengthen_q_respects_stored_reachable_states():
    # cnt4 reaches every state, so no subclause of Q survives the store check
    ts = fixture_system("ts-cnt4")
    store = ReachStore(ts)
    states = [ts.state_from_bits(b) for b in range(4)]
    from ic4mc.results import Trace
    store.add_trace(Trace(tuple(states), (0, 0, 0)))
    q = form_q(ts.state_from_bits(3))
    widened, removed = strengthen_q(q, ts, [], reach=store)
    assert widened == q and removed == 0


@pytest.mark.parametrize("mode", [MINIMAL, MAXIMAL, heuristic()],
                         ids=lambda m: m.kind)
def test_random_models_agree_with_oracle(mode):
    rng = random.Random(303)
    for i in range(15):
        circuit = generate_circuit(rng, max_latches=5, max_ands=12)
        ts = encode(circuit, name=f"pd{i}")
        expected, _ = oracle_verdict(ts, bfs(ts))
        v = prove_pd(ts, mode, EngineOptions(seed=i))
        assert v.kind == expected, (i, mode.kind)
        if v.is_safe:
            assert check_invariant(ts, v.invariant, bfs(ts)) is None
        else:
            assert validate_trace(ts, v.trace) is None


def test_stats_shape_and_determinism():
    ts = fixture_system("ts-sat3")
    a = prove_pd(ts, opts=EngineOptions(seed=2))
    b = prove_pd(ts, opts=EngineOptions(seed=2))
    assert a.invariant == b.invariant and a.stats == b.stats
    for key in ("engine", "effort_mode", "q_properties", "q_inductive_as_is",
                "strengthen_literals_removed", "sat_calls_total",
                "frames_opened", "reach_states_generated", "reuse_hits"):
        assert key in a.stats, key
    assert a.stats["engine"] == "ic4-pd"
    assert a.stats["q_properties"] >= 1


def test_iteration_cap_yields_unknown():
    # a safe model known (from an uncapped run) to take two decomposition
    # iterations gives up cleanly when capped below that
    rng = random.Random(404)
    for i in range(19):
        circuit = generate_circuit(rng, max_latches=5, max_ands=12)
    ts = encode(circuit, name="two-iter")
    full = prove_pd(ts)
    assert full.is_safe and full.stats["q_properties"] == 2
    capped = prove_pd(ts, opts=EngineOptions(pd_iteration_cap=1))
    assert capped.kind == "unknown" and "cap" in capped.reason
