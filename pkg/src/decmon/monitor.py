"""Centralized three-valued monitors over ``2^AP``.

A :class:`Monitor` is a complete deterministic Moore machine whose states carry
a verdict; definitive states are sinks. Monitors are usually synthesized from a
plain DFA acceptor with :func:`monitor_from_acceptor`.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .alphabet import DistributedAlphabet, Event, EventOutOfAlphabet

MAX_DENSE_APS = 16


class Verdict(enum.Enum):
    TOP = "⊤"
    BOT = "⊥"
    UNKNOWN = "?"

    @property
    def definitive(self) -> bool:
        return self is not Verdict.UNKNOWN

    @property
    def ascii(self) -> str:
        return {"⊤": "top", "⊥": "bot", "?": "?"}[self.value]

    def __str__(self):
        return self.value


class MonitorError(ValueError):
    pass


def _check_table(delta, n_states: int, n_events: int):
    if len(delta) != n_states:
        raise MonitorError("transition table must have one row per state")
    for row in delta:
        if len(row) != n_events:
            raise MonitorError("transition function is not total")
        for q in row:
            if not 0 <= q < n_states:
                raise MonitorError(f"successor {q} is not a state")


@dataclass(frozen=True)
class Acceptor:
    """DFA ``(Q, q_init, 2^AP, delta, F)`` with a dense successor table.

    ``delta[q][ev]`` is the successor of state ``q`` under the event bitmask ``ev``.
    """

    alphabet: DistributedAlphabet
    states: tuple[str, ...]
    initial: int
    delta: tuple[tuple[int, ...], ...]
    accepting: frozenset[int]

    def __post_init__(self):
        if self.alphabet.size > MAX_DENSE_APS:
            raise MonitorError(f"at most {MAX_DENSE_APS} propositions are supported")
        _check_table(self.delta, len(self.states), 1 << self.alphabet.size)
        if not 0 <= self.initial < len(self.states):
            raise MonitorError("initial state out of range")


@dataclass(frozen=True)
class Monitor:
    alphabet: DistributedAlphabet
    states: tuple[str, ...]
    initial: int
    delta: tuple[tuple[int, ...], ...]
    verdicts: tuple[Verdict, ...]
    # memo for the decentralized transition function, see decent.delta_d
    _memo: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.alphabet.size > MAX_DENSE_APS:
            raise MonitorError(f"at most {MAX_DENSE_APS} propositions are supported")
        _check_table(self.delta, len(self.states), 1 << self.alphabet.size)
        if len(self.verdicts) != len(self.states):
            raise MonitorError("one verdict per state is required")
        for q, v in enumerate(self.verdicts):
            if v.definitive and any(succ != q for succ in self.delta[q]):
                raise MonitorError(f"definitive state {self.states[q]} is not a trap")

    @property
    def n_states(self) -> int:
        return len(self.states)

    def step(self, q: int, ev: Event) -> int:
        return self.delta[q][ev]

    def verdict(self, q: int) -> Verdict:
        return self.verdicts[q]

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise MonitorError(f"unknown state {name!r}") from None


def run(monitor: Monitor, trace: Sequence[Event], start: int | None = None) -> int:
    """State reached from the initial state (or ``start``) after reading ``trace``."""
    q = monitor.initial if start is None else start
    full = monitor.alphabet.full
    for ev in trace:
        if ev < 0 or ev & ~full:
            raise EventOutOfAlphabet(f"event {ev:#x} uses unknown propositions")
        q = monitor.delta[q][ev]
    return q


def verdict_trace(monitor: Monitor, trace: Sequence[Event]) -> list[Verdict]:
    """Verdict after each prefix ``trace[0..k]``."""
    q, out = monitor.initial, []
    for ev in trace:
        q = monitor.delta[q][ev]
        out.append(monitor.verdicts[q])
    return out


def _reachable(delta, q: int) -> set[int]:
    seen, stack = {q}, [q]
    while stack:
        p = stack.pop()
        for succ in delta[p]:
            if succ not in seen:
                seen.add(succ)
                stack.append(succ)
    return seen


def monitor_from_acceptor(acceptor: Acceptor) -> Monitor:
    """Label each state by what every continuation from it does, then trap definitive states."""
    verdicts = []
    for q in range(len(acceptor.states)):
        reach = _reachable(acceptor.delta, q)
        if reach <= acceptor.accepting:
            verdicts.append(Verdict.TOP)
        elif not reach & acceptor.accepting:
            verdicts.append(Verdict.BOT)
        else:
            verdicts.append(Verdict.UNKNOWN)
    delta = tuple(
        tuple(q for _ in row) if verdicts[q].definitive else row
        for q, row in enumerate(acceptor.delta)
    )
    return Monitor(acceptor.alphabet, acceptor.states, acceptor.initial, delta, tuple(verdicts))


def good_bad_oracle(acceptor: Acceptor, trace: Sequence[Event]) -> Verdict:
    """Classify ``trace`` as a good prefix, a bad prefix, or neither.

    Test oracle only: it walks the raw acceptor and explores every extension
    breadth-first, sharing no code with :func:`monitor_from_acceptor`.
    """
    q = acceptor.initial
    for ev in trace:
        q = acceptor.delta[q][ev]
    seen = {q}
    queue = deque([q])
    some_accepting = some_rejecting = False
    while queue:
        p = queue.popleft()
        if p in acceptor.accepting:
            some_accepting = True
        else:
            some_rejecting = True
        if some_accepting and some_rejecting:
            return Verdict.UNKNOWN
        for succ in acceptor.delta[p]:
            if succ not in seen:
                seen.add(succ)
                queue.append(succ)
    return Verdict.TOP if some_accepting else Verdict.BOT
