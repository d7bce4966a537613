import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from decmon import decent
from decmon.alphabet import index_set, project
from decmon.decent import (
    Chunk,
    LocalMonitorState,
    MemoryEntry,
    Message,
    MessageSyntaxError,
    ObservationOutOfScope,
    delta_d,
    initial_state,
    merge_memory,
    message_of_text,
    receive,
    step,
    text_of_message,
    update_state,
    verdict_d,
)
from decmon.monitor import Verdict, run

from helpers import l1_monitor, random_alphabet, random_monitor

M = l1_monitor()
A = M.alphabet
Q0, Q1 = M.state_index("q0"), M.state_index("q1")


def ev(names):
    return A.event(names)


def entry(names, idx):
    return MemoryEntry(ev(names), index_set(idx))


def test_delta_d_examples():
    assert delta_d(M, {Q0}, index_set([1]), ev("a")) == {Q0, Q1}
    assert delta_d(M, {Q0}, index_set([1, 2, 3]), ev("abc")) == {Q1}
    assert delta_d(M, {Q0}, A.all_components, ev("ab")) == {Q0}
    with pytest.raises(ObservationOutOfScope):
        delta_d(M, {Q0}, index_set([1]), ev("b"))


def test_verdict_d_examples():
    assert verdict_d(M, {Q1}) is Verdict.TOP
    assert verdict_d(M, {Q0, Q1}) is Verdict.UNKNOWN
    assert verdict_d(M, {Q0}) is Verdict.UNKNOWN


def test_merge_example():
    mem = {0: entry("b", [1, 2]), 1: entry("ab", [1, 2]), 2: entry("", [2])}
    other = {1: entry("c", [3]), 2: entry("c", [3])}
    assert merge_memory(mem, other) == {
        0: entry("b", [1, 2]),
        1: entry("abc", [1, 2, 3]),
        2: entry("c", [2, 3]),
    }
    assert merge_memory(mem, {}) == mem
    assert merge_memory(mem, mem) == mem


def test_receive_event():
    st0 = receive(initial_state(M, 1), event=0, alphabet=A)
    assert st0.t == 0
    assert st0.mem == {0: entry("", [1])}


def test_receive_rejects_foreign_event():
    with pytest.raises(ObservationOutOfScope):
        receive(initial_state(M, 1), event=ev("b"), alphabet=A)


def test_receive_stale_and_fresh_state():
    st1 = replace(initial_state(M, 3), t_last=1, t=0)
    same = receive(st1, msg=Message(state=(Q0, 1)))
    assert (same.q, same.t_last, same.rcv_state) == (Q0, 1, False)
    fresh = receive(st1, msg=Message(state=(Q0, 2)))
    assert (fresh.t_last, fresh.rcv_state) == (2, True)


def test_receive_chunk_merges_and_flags():
    st1 = replace(initial_state(M, 2), t=1, t_last=1, mem={1: entry("b", [2])})
    got = receive(st1, msg=Message(chunk=Chunk(1, (entry("a", [1]),))))
    assert got.mem == {1: entry("ab", [1, 2])}
    assert got.rcv_mem


def test_update_state_reaches_verdict():
    st = LocalMonitorState(
        index=2, q=Q0, t_last=2, t=3,
        mem={2: entry("abc", [1, 2, 3]), 3: entry("a", [1, 2])},
    )
    out = update_state(st, M)
    assert (out.q, out.t_last, out.upd_state) == (Q1, 3, True)
    assert out.mem == {3: entry("a", [1, 2])}
    assert verdict_d(M, out.estimate) is Verdict.TOP


def test_update_state_without_pending_entries():
    st = replace(initial_state(M, 1), t_last=1, t=0)
    assert update_state(st, M) == replace(st, estimate=frozenset({Q0}))
    assert not update_state(st, M).upd_state


def test_update_state_stops_at_gap():
    st = LocalMonitorState(index=1, q=Q0, t_last=0, t=2, mem={0: entry("abc", [1, 2, 3]), 2: entry("", [1])})
    # time 0 is fully known; the verdict stops the fold there anyway
    out = update_state(st, M)
    assert out.q == Q1 and out.t_last == 1


def test_single_component_tracks_run():
    rng = random.Random(3)
    for _ in range(200):
        alpha = random_alphabet(rng, max_n=1)
        m = random_monitor(rng, alpha)
        st = initial_state(m, 1)
        tr = []
        for _ in range(rng.randint(1, 10)):
            e = rng.randrange(1 << alpha.size)
            tr.append(e)
            st = update_state(receive(st, event=e), m)
            assert st.q == run(m, tr) or m.verdicts[st.q].definitive
            if m.verdicts[st.q].definitive:
                break
            assert st.t_last == st.t + 1


def test_step_leader_after_first_event():
    st = receive(initial_state(M, 1), event=0)
    res = step(st, M, leader=True)
    assert text_of_message(M, res.message) == "(q0,1)"
    assert res.state.mem == {}
    assert res.folded.mem == {0: entry("", [1])}


def test_step_non_leader_sends_state_only():
    st = receive(initial_state(M, 3), event=0)
    res = step(st, M, leader=False)
    assert res.message == Message(state=(Q0, 1))


def test_step_nothing_to_say():
    st = receive(replace(initial_state(M, 2), t_last=1, t=0), event=ev("b"))
    res = step(st, M, leader=False)
    assert res.message is None
    assert res.state.mem == {1: entry("b", [2])}


def test_step_halts_on_verdict():
    st = LocalMonitorState(index=1, q=Q0, t_last=0, t=0, mem={0: entry("abc", [1, 2, 3])})
    res = step(st, M, leader=True)
    assert res.verdict is Verdict.TOP and res.message is None
    assert res.state.halted and res.state.verdict_out is Verdict.TOP
    again = step(res.state, M, leader=True)
    assert again.message is None and again.state == res.state


def test_flags_reset_after_step():
    st = receive(initial_state(M, 2), event=0)
    st = receive(st, msg=Message(chunk=Chunk(0, (entry("", [1]),))))
    res = step(st, M, leader=False)
    assert not (res.state.rcv_mem or res.state.rcv_state or res.state.upd_state)


@pytest.mark.parametrize(
    "text",
    ["(q0,1)", "(({a},{1}),1)", "(q0,2),(({a},{1}),2)", "(({a,b},{1,2}),(∅,{2}),1)"],
)
def test_message_text_round_trip(text):
    msg = message_of_text(M, text)
    assert text_of_message(M, msg) == text


def test_message_shapes():
    msg = message_of_text(M, "(q0,2),(({a},{1}),2)")
    assert msg.state == (Q0, 2)
    assert msg.chunk == Chunk(2, (entry("a", [1]),))


@pytest.mark.parametrize("bad", ["", "(q9,1)", "(q0,1", "(({a},{}),1)", "(q0,1),", "(({z},{1}),1)", "(({a},{1}),1),(q0,1)"])
def test_message_parse_errors(bad):
    with pytest.raises(MessageSyntaxError):
        message_of_text(M, bad)


def test_format_memory():
    assert decent.format_memory(M, {}) == "∅"
    mem = {1: entry("ab", [1, 2]), 0: entry("", [3])}
    assert decent.format_memory(M, mem) == "{0↦(∅,{3}), 1↦({a,b},{1,2})}"


# -- estimate properties (hypothesis; the acceptance suite runs the full counts) --

seeds = st.integers(0, 2**32)


def _setup(seed):
    rng = random.Random(seed)
    alpha = random_alphabet(rng)
    return rng, alpha, random_monitor(rng, alpha)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_estimate_contains_successor(seed):
    rng, alpha, m = _setup(seed)
    q = rng.randrange(m.n_states)
    sigma = rng.randrange(1 << alpha.size)
    s = rng.randrange(1, 1 << alpha.n)
    assert m.delta[q][sigma] in delta_d(m, {q}, s, project(alpha, s, sigma))


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_estimate_monotone(seed):
    rng, alpha, m = _setup(seed)
    big = {q for q in range(m.n_states) if rng.random() < 0.6} or {0}
    small = {q for q in big if rng.random() < 0.5} or {min(big)}
    s = rng.randrange(1, 1 << alpha.n)
    sigma = rng.randrange(1 << alpha.size) & alpha.observed_mask(s)
    assert delta_d(m, small, s, sigma) <= delta_d(m, big, s, sigma)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_estimate_full_observation(seed):
    rng, alpha, m = _setup(seed)
    q = rng.randrange(m.n_states)
    sigma = rng.randrange(1 << alpha.size)
    assert delta_d(m, {q}, alpha.all_components, sigma) == {m.delta[q][sigma]}


def _sound_memory(rng, alpha, tau):
    mem = {}
    for t, e in enumerate(tau):
        if rng.random() < 0.7:
            s = rng.randrange(1, 1 << alpha.n)
            mem[t] = MemoryEntry(project(alpha, s, e), s)
    return mem


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_merge_preserves_soundness_and_is_a_semilattice(seed):
    rng, alpha, _ = _setup(seed)
    tau = [rng.randrange(1 << alpha.size) for _ in range(6)]
    a, b, c = (_sound_memory(rng, alpha, tau) for _ in range(3))
    ab = merge_memory(a, b)
    for t, e in ab.items():
        assert e.sigma == project(alpha, e.sources, tau[t])
    assert ab == merge_memory(b, a)
    assert merge_memory(ab, c) == merge_memory(a, merge_memory(b, c))
    assert merge_memory(a, a) == a


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_delta_d_never_empty(seed):
    rng, alpha, m = _setup(seed)
    s = rng.randrange(1, 1 << alpha.n)
    sigma = rng.randrange(1 << alpha.size) & alpha.observed_mask(s)
    assert delta_d(m, {rng.randrange(m.n_states)}, s, sigma)
