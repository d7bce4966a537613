import random

import pytest

from decmon.alphabet import DistributedAlphabet, EventOutOfAlphabet
from decmon.monitor import (
    Acceptor,
    Monitor,
    MonitorError,
    Verdict,
    good_bad_oracle,
    monitor_from_acceptor,
    run,
)
from decmon.specfile import SpecError, dump_spec, parse_spec

from helpers import L1, l1_acceptor, l1_monitor, random_acceptor, random_alphabet


def trace(alpha, *events):
    return [alpha.event(e) for e in events]


def test_run_examples():
    m = l1_monitor()
    a = m.alphabet
    assert run(m, []) == m.initial
    assert m.states[run(m, trace(a, "", "ab", "abc"))] == "q1"
    assert m.states[run(m, trace(a, "", "ab", "abc", "a"))] == "q1"
    with pytest.raises(EventOutOfAlphabet):
        run(m, [1 << 7])


def test_l1_verdicts():
    m = l1_monitor()
    assert m.verdicts == (Verdict.UNKNOWN, Verdict.TOP)


def test_all_accepting_gives_top_everywhere():
    alpha = DistributedAlphabet.parse("a")
    acc = Acceptor(alpha, ("x", "y"), 0, ((1, 0), (0, 1)), frozenset({0, 1}))
    assert set(monitor_from_acceptor(acc).verdicts) == {Verdict.TOP}


def test_accepting_state_before_rejecting_trap_is_unknown():
    alpha = DistributedAlphabet.parse("a")
    # q0 -a-> q1 (accepting) -a-> q2 (rejecting trap)
    acc = Acceptor(alpha, ("q0", "q1", "q2"), 0, ((0, 1), (1, 2), (2, 2)), frozenset({1}))
    m = monitor_from_acceptor(acc)
    assert m.verdicts[1] is Verdict.UNKNOWN
    assert m.verdicts[2] is Verdict.BOT


def test_definitive_states_become_traps():
    alpha = DistributedAlphabet.parse("a")
    # q1 is accepting and only reaches accepting states, but does not loop
    acc = Acceptor(alpha, ("q0", "q1", "q2"), 0, ((1, 0), (2, 2), (1, 2)), frozenset({1, 2}))
    m = monitor_from_acceptor(acc)
    assert m.verdicts[1] is Verdict.TOP
    assert m.delta[1] == (1, 1)


def test_monitor_rejects_non_trap_definitive_state():
    alpha = DistributedAlphabet.parse("a")
    with pytest.raises(MonitorError):
        Monitor(alpha, ("q0", "q1"), 0, ((1, 1), (0, 1)), (Verdict.UNKNOWN, Verdict.TOP))


def test_oracle_examples():
    acc = l1_acceptor()
    a = acc.alphabet
    assert good_bad_oracle(acc, trace(a, "", "ab", "abc")) is Verdict.TOP
    assert good_bad_oracle(acc, []) is Verdict.UNKNOWN
    empty = Acceptor(a, acc.states, 0, acc.delta, frozenset())
    assert good_bad_oracle(empty, trace(a, "a")) is Verdict.BOT


def _brute_force(acc, tr, depth):
    """Enumerate every extension up to ``depth`` events; a third oracle for small cases."""
    q = acc.initial
    for ev in tr:
        q = acc.delta[q][ev]
    frontier, seen = {q}, {q}
    for _ in range(depth):
        frontier = {acc.delta[p][ev] for p in frontier for ev in range(len(acc.delta[p]))} - seen
        seen |= frontier
    if seen <= acc.accepting:
        return Verdict.TOP
    if not seen & acc.accepting:
        return Verdict.BOT
    return Verdict.UNKNOWN


def test_oracle_agreement_randomized():
    rng = random.Random(5)
    for _ in range(10_000):
        alpha = random_alphabet(rng, max_aps=3, max_n=3)
        acc = random_acceptor(rng, alpha)
        m = monitor_from_acceptor(acc)
        tr = [rng.randrange(1 << alpha.size) for _ in range(rng.randint(0, 8))]
        assert m.verdicts[run(m, tr)] is good_bad_oracle(acc, tr)


def test_oracle_matches_bounded_enumeration():
    rng = random.Random(6)
    for _ in range(500):
        alpha = random_alphabet(rng, max_aps=2, max_n=2)
        acc = random_acceptor(rng, alpha)
        tr = [rng.randrange(1 << alpha.size) for _ in range(rng.randint(0, 5))]
        assert good_bad_oracle(acc, tr) is _brute_force(acc, tr, len(acc.states))


def test_trap_persistence():
    rng = random.Random(7)
    for _ in range(2_000):
        alpha = random_alphabet(rng, max_aps=3)
        m = monitor_from_acceptor(random_acceptor(rng, alpha))
        tr = [rng.randrange(1 << alpha.size) for _ in range(rng.randint(0, 8))]
        v = m.verdicts[run(m, tr)]
        if v.definitive:
            more = [rng.randrange(1 << alpha.size) for _ in range(5)]
            assert m.verdicts[run(m, tr + more)] is v


def test_spec_round_trip():
    acc = parse_spec(L1)
    again = parse_spec(dump_spec(acc))
    assert again == acc


def test_spec_incomplete_is_an_error():
    text = L1.replace("trans: q0 * -> q0\n", "")
    with pytest.raises(SpecError, match="incomplete"):
        parse_spec(text)


def test_spec_errors_carry_line_numbers():
    with pytest.raises(SpecError) as exc:
        parse_spec("aps: a\nstates: q0\ninit: q0\ntrans: q0 {z} -> q0\n")
    assert exc.value.line == 4
    with pytest.raises(SpecError):
        parse_spec("aps: a\nstates: q0\ninit: nope\n")
