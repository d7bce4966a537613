"""Random instance builders shared by the test suites (plain ``random.Random``)."""

from __future__ import annotations

import random

from decmon.alphabet import DistributedAlphabet
from decmon.generators import gen_formula
from decmon.ltl import StateExplosion, compile as compile_ltl
from decmon.monitor import Acceptor, monitor_from_acceptor
from decmon.netsim import CommConfig
from decmon.specfile import parse_spec

L1 = """\
aps: a b c
components: a | b | c
states: q0 q1
init: q0
accept: q1
trans: q0 {a,b,c} -> q1
trans: q0 * -> q0
trans: q1 * -> q1
"""


def l1_acceptor() -> Acceptor:
    return parse_spec(L1)


def l1_monitor():
    return monitor_from_acceptor(l1_acceptor())


def random_alphabet(rng: random.Random, max_aps: int = 4, max_n: int = 4) -> DistributedAlphabet:
    n_aps = rng.randint(1, max_aps)
    n = rng.randint(1, min(n_aps, max_n))
    aps = [chr(ord("a") + k) for k in range(n_aps)]
    shuffled = aps[:]
    rng.shuffle(shuffled)
    # every block gets one proposition, the rest land anywhere
    blocks = [[p] for p in shuffled[:n]]
    for p in shuffled[n:]:
        blocks[rng.randrange(n)].append(p)
    return DistributedAlphabet(tuple(aps), tuple(tuple(b) for b in blocks))


def random_acceptor(rng: random.Random, alphabet: DistributedAlphabet, max_states: int = 6) -> Acceptor:
    k = rng.randint(1, max_states)
    n_events = 1 << alphabet.size
    delta = []
    for q in range(k):
        if rng.random() < 0.25:
            delta.append(tuple(q for _ in range(n_events)))  # trap
        else:
            # sparse successors keep interesting structure
            targets = [rng.randrange(k) for _ in range(rng.randint(1, 3))]
            delta.append(tuple(rng.choice(targets) for _ in range(n_events)))
    accepting = frozenset(q for q in range(k) if rng.random() < 0.5)
    return Acceptor(alphabet, tuple(f"q{q}" for q in range(k)), 0, tuple(delta), accepting)


def random_monitor(rng: random.Random, alphabet: DistributedAlphabet, max_states: int = 6):
    return monitor_from_acceptor(random_acceptor(rng, alphabet, max_states))


def random_local_traces(rng: random.Random, alphabet: DistributedAlphabet, length: int):
    return [
        [rng.randrange(1 << alphabet.size) & alphabet.local_mask(i) for _ in range(length)]
        for i in range(1, alphabet.n + 1)
    ]


def random_cycle(rng: random.Random, n: int) -> tuple[int, ...]:
    """A uniformly random single n-cycle as a ``choose_mon`` table."""
    order = list(range(1, n + 1))
    rng.shuffle(order)
    choose = [0] * n
    for k, i in enumerate(order):
        choose[i - 1] = order[(k + 1) % n]
    return tuple(choose)


def random_config(rng: random.Random, n: int, leaders=None, **kw) -> CommConfig:
    if leaders is None:
        leader_set = {i for i in range(1, n + 1) if rng.random() < 0.5} or {rng.randint(1, n)}
    else:
        leader_set = set(leaders)
    return CommConfig(
        n=n,
        choose_mon=random_cycle(rng, n),
        leader_mon=tuple(i in leader_set for i in range(1, n + 1)),
        **kw,
    )


def random_instance(rng: random.Random, max_aps: int = 4, max_n: int = 4):
    """Random (monitor, acceptor or None) from an acceptor or a compiled formula."""
    alphabet = random_alphabet(rng, max_aps, max_n)
    if rng.random() < 0.5:
        acc = random_acceptor(rng, alphabet)
        return monitor_from_acceptor(acc), acc
    while True:
        f = gen_formula(alphabet, rng.randint(1, 3), rng)
        try:
            return compile_ltl(f, alphabet, cap=500), None
        except StateExplosion:
            continue
