import pytest

from ic4mc.fixtures import fixture_system
from ic4mc.logic import Clause, Literal
from ic4mc.reach import ReachStore
from ic4mc.results import Trace


def cnt4_trace(ts, upto):
    states = [ts.state_from_bits(b) for b in range(upto + 1)]
    return Trace(tuple(states), tuple(0 for _ in range(upto)))


def test_store_seeded_with_initial_state():
    ts = fixture_system("ts-cnt4")
    store = ReachStore(ts)
    entry = store.covers(ts.init_state)
    assert entry is not None and entry.depth == 0
    assert store.generated == 0


def test_add_trace_and_covers():
    ts = fixture_system("ts-cnt4")
    store = ReachStore(ts)
    new = store.add_trace(cnt4_trace(ts, 3))
    assert new == 3 and store.generated == 3
    entry = store.covers(ts.state_from_bits(2))
    assert entry is not None and entry.depth == 2


def test_add_trace_rejects_invalid_traces():
    ts = fixture_system("ts-cnt4")
    store = ReachStore(ts)
    with pytest.raises(ValueError):
        store.add_trace(Trace((ts.state_from_bits(2),), ()))
    states = (ts.init_state, ts.state_from_bits(3))
    with pytest.raises(ValueError):
        store.add_trace(Trace(states, (0,)))


def test_rediscovered_state_keeps_first_entry():
    ts = fixture_system("ts-cnt4")
    store = ReachStore(ts)
    store.add_trace(cnt4_trace(ts, 2))
    # a longer route visiting state 2 again at depth 6
    states = [ts.state_from_bits(b % 4) for b in range(7)]
    added = store.add_trace(Trace(tuple(states), tuple(0 for _ in range(6))))
    assert added == 1  # only state 3 is new
    assert store.covers(ts.state_from_bits(2)).depth == 2
    assert store.generated == 3


def test_trace_to_reconstructs_without_sat():
    ts = fixture_system("ts-cnt4")
    store = ReachStore(ts)
    store.add_trace(cnt4_trace(ts, 3))
    entry = store.covers(ts.state_from_bits(3))
    t = store.trace_to(entry)
    assert [ts.state_to_bits(s) for s in t.states] == [0, 1, 2, 3]
    assert t.inputs == (0, 0, 0)


def test_violates_respects_depth_bound():
    ts = fixture_system("ts-cnt4")
    store = ReachStore(ts)
    store.add_trace(cnt4_trace(ts, 3))
    l0, l1 = ts.state_vars
    excludes_3 = Clause([Literal(l0, False), Literal(l1, False)])
    assert store.violates(excludes_3) is not None
    assert store.violates(excludes_3, max_depth=2) is None
    assert store.violates(excludes_3, max_depth=3).depth == 3


def test_all_traces_covers_every_noninitial_entry():
    ts = fixture_system("ts-cnt4")
    store = ReachStore(ts)
    store.add_trace(cnt4_trace(ts, 3))
    traces = store.all_traces()
    endpoints = {ts.state_to_bits(t.states[-1]) for t in traces}
    assert endpoints == {1, 2, 3}
