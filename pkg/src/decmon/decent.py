"""Decentralized monitor: state estimation, local memory and the per-component engine.

Each component runs a :class:`LocalMonitorState` through three pure transformers:
:func:`receive` (inputs from the component and from the peer), :func:`update_state`
(fold the memory into a state estimate) and :func:`step` (evaluate, build the
outgoing message).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .alphabet import DistributedAlphabet, Event, IndexSet, indices, index_set, submasks
from .monitor import Monitor, Verdict
from .specfile import format_event, parse_event

StateEstimate = frozenset


class ObservationOutOfScope(ValueError):
    pass


class MessageSyntaxError(ValueError):
    pass


def delta_d(monitor: Monitor, estimate: Iterable[int], s: IndexSet, sigma: Event) -> frozenset[int]:
    """Every state reachable from ``estimate`` by a global event whose ``s``-part is ``sigma``."""
    alphabet = monitor.alphabet
    observed = alphabet.observed_mask(s)
    if sigma & ~observed:
        raise ObservationOutOfScope(
            f"event {format_event(alphabet, sigma)} is not observable by components {indices(s)}"
        )
    memo = monitor._memo
    hidden = alphabet.full & ~observed
    out: set[int] = set()
    for q in estimate:
        key = (q, observed, sigma)
        succ = memo.get(key)
        if succ is None:
            row = monitor.delta[q]
            succ = frozenset(row[sigma | x] for x in submasks(hidden))
            memo[key] = succ
        out |= succ
    return frozenset(out)


def verdict_d(monitor: Monitor, estimate: Iterable[int]) -> Verdict:
    verdicts = {monitor.verdicts[q] for q in estimate}
    if not verdicts:
        raise ValueError("empty state estimate")
    return verdicts.pop() if len(verdicts) == 1 else Verdict.UNKNOWN


@dataclass(frozen=True)
class MemoryEntry:
    """``sigma`` is the union of the events of the components in ``sources`` at one instant."""

    sigma: Event
    sources: IndexSet

    def __or__(self, other: "MemoryEntry") -> "MemoryEntry":
        return MemoryEntry(self.sigma | other.sigma, self.sources | other.sources)


LocalMemory = Mapping[int, MemoryEntry]


def merge_memory(a: LocalMemory, b: LocalMemory) -> dict[int, MemoryEntry]:
    out = dict(a)
    for t, entry in b.items():
        out[t] = out[t] | entry if t in out else entry
    return out


def prune_memory(mem: LocalMemory, t_last: int) -> dict[int, MemoryEntry]:
    return {t: e for t, e in mem.items() if t >= t_last}


@dataclass(frozen=True)
class Chunk:
    """Consecutive memory entries starting at time ``base``."""

    base: int
    entries: tuple[MemoryEntry, ...]

    def as_memory(self) -> dict[int, MemoryEntry]:
        return {self.base + k: e for k, e in enumerate(self.entries)}


@dataclass(frozen=True)
class Message:
    state: tuple[int, int] | None = None
    chunk: Chunk | None = None

    def __bool__(self):
        return self.state is not None or self.chunk is not None


@dataclass(frozen=True)
class Halt:
    """Control notification: ``sender`` reached ``verdict``; recipients stop monitoring."""

    sender: int
    verdict: Verdict


@dataclass(frozen=True)
class LocalMonitorState:
    index: int
    q: int
    t_last: int = 0
    t: int = -1
    mem: Mapping[int, MemoryEntry] = field(default_factory=dict)
    rcv_state: bool = False
    rcv_mem: bool = False
    upd_state: bool = False
    halted: bool = False
    verdict_out: Verdict | None = None
    # estimate produced by the last update_state fold
    estimate: frozenset = frozenset()


def initial_state(monitor: Monitor, index: int) -> LocalMonitorState:
    return LocalMonitorState(index=index, q=monitor.initial, estimate=frozenset({monitor.initial}))


def receive(
    state: LocalMonitorState,
    event: Event | None = None,
    msg: Message | None = None,
    *,
    alphabet: DistributedAlphabet | None = None,
) -> LocalMonitorState:
    """Apply a local event and/or a peer message.

    ``rcv_state``/``rcv_mem`` accumulate until the next :func:`step` consumes them,
    so a message delivered in a round without communication is not forgotten.
    """
    if state.halted:
        return state
    t, t_last, q, mem = state.t, state.t_last, state.q, state.mem
    rcv_state, rcv_mem = state.rcv_state, state.rcv_mem
    if event is not None:
        if alphabet is not None and event & ~alphabet.local_mask(state.index):
            raise ObservationOutOfScope(f"component {state.index} cannot emit {event:#x}")
        t += 1
        mem = dict(mem)
        mem[t] = MemoryEntry(event, 1 << (state.index - 1))
    if msg is not None:
        if msg.state is not None:
            q_new, t_new = msg.state
            if t_new > t_last:
                q, t_last, rcv_state = q_new, t_new, True
        if msg.chunk is not None:
            mem = prune_memory(merge_memory(mem, msg.chunk.as_memory()), t_last)
            rcv_mem = True
    return replace(state, t=t, t_last=t_last, q=q, mem=mem, rcv_state=rcv_state, rcv_mem=rcv_mem)


def update_state(state: LocalMonitorState, monitor: Monitor, prune: bool = True) -> LocalMonitorState:
    """Fold the decentralized transition over ``mem[t_last..t]``.

    Each time the estimate collapses to one state the last known global state
    moves forward. The fold stops at the first missing entry and as soon as the
    estimate carries a definitive verdict.
    """
    if state.halted:
        return state
    mem = prune_memory(state.mem, state.t_last)
    q, t_last, upd = state.q, state.t_last, state.upd_state
    estimate = frozenset({q})
    t = state.t_last
    while t <= state.t:
        entry = mem.get(t)
        if entry is None:
            break
        estimate = delta_d(monitor, estimate, entry.sources, entry.sigma)
        if len(estimate) == 1:
            (q,) = estimate
            t_last, upd = t + 1, True
        t += 1
        if verdict_d(monitor, estimate).definitive:
            break
    if prune:
        mem = prune_memory(mem, t_last)
    return replace(state, q=q, t_last=t_last, mem=mem, upd_state=upd, estimate=estimate)


@dataclass(frozen=True)
class StepResult:
    state: LocalMonitorState
    message: Message | None
    verdict: Verdict | None
    # state right after the fold, before stale memory is discarded (for round logs)
    folded: LocalMonitorState


def step(state: LocalMonitorState, monitor: Monitor, leader: bool) -> StepResult:
    if state.halted:
        return StepResult(state, None, None, state)
    folded = update_state(state, monitor, prune=False)
    verdict = verdict_d(monitor, folded.estimate)
    if verdict.definitive:
        done = replace(folded, halted=True, verdict_out=verdict)
        return StepResult(done, None, verdict, folded)
    msg_state = chunk = None
    if folded.upd_state or folded.rcv_state:
        msg_state = (folded.q, folded.t_last)
    if folded.t_last <= folded.t and (folded.rcv_mem or leader):
        chunk = Chunk(folded.t_last, tuple(folded.mem[t] for t in range(folded.t_last, folded.t + 1)))
    msg = Message(msg_state, chunk)
    after = replace(
        folded,
        mem=prune_memory(folded.mem, folded.t_last),
        rcv_state=False,
        rcv_mem=False,
        upd_state=False,
    )
    return StepResult(after, msg if msg else None, None, folded)


def halt(state: LocalMonitorState, verdict: Verdict) -> LocalMonitorState:
    if state.halted:
        return state
    return replace(state, halted=True, verdict_out=verdict)


# -- canonical text rendering -------------------------------------------------


def format_indices(s: IndexSet) -> str:
    return "{" + ",".join(str(i) for i in indices(s)) + "}"


def format_entry(monitor: Monitor, e: MemoryEntry) -> str:
    return f"({format_event(monitor.alphabet, e.sigma)},{format_indices(e.sources)})"


def format_memory(monitor: Monitor, mem: LocalMemory) -> str:
    if not mem:
        return "∅"
    return "{" + ", ".join(f"{t}↦{format_entry(monitor, mem[t])}" for t in sorted(mem)) + "}"


def text_of_message(monitor: Monitor, msg: Message) -> str:
    parts = []
    if msg.state is not None:
        q, t = msg.state
        parts.append(f"({monitor.states[q]},{t})")
    if msg.chunk is not None:
        body = ",".join(format_entry(monitor, e) for e in msg.chunk.entries)
        parts.append(f"({body},{msg.chunk.base})")
    if not parts:
        raise ValueError("empty messages have no text form")
    return ",".join(parts)


_TOKEN = re.compile(r"\s*(\(|\)|,|\{[^}]*\}|∅|[^\s(),{}]+)")


def _tokens(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise MessageSyntaxError(f"unexpected character at {pos}: {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def message_of_text(monitor: Monitor, text: str) -> Message:
    toks = _tokens(text)
    pos = 0

    def expect(tok: str):
        nonlocal pos
        if pos >= len(toks) or toks[pos] != tok:
            got = toks[pos] if pos < len(toks) else "end of input"
            raise MessageSyntaxError(f"expected {tok!r}, got {got!r}")
        pos += 1

    def integer() -> int:
        nonlocal pos
        if pos >= len(toks) or not re.fullmatch(r"-?\d+", toks[pos]):
            raise MessageSyntaxError(f"expected an integer at token {pos}")
        pos += 1
        return int(toks[pos - 1])

    def entry() -> MemoryEntry:
        nonlocal pos
        expect("(")
        try:
            sigma = parse_event(monitor.alphabet, toks[pos])
            pos += 1
            expect(",")
            s_tok = toks[pos]
            pos += 1
            s = index_set(int(k) for k in s_tok.strip("{}").split(",") if k.strip())
        except (IndexError, ValueError) as e:
            raise MessageSyntaxError(str(e)) from e
        expect(")")
        if not s:
            raise MessageSyntaxError("empty component set")
        return MemoryEntry(sigma, s)

    state = chunk = None
    while pos < len(toks):
        expect("(")
        if pos < len(toks) and toks[pos] == "(":
            if chunk is not None:
                raise MessageSyntaxError("two memory parts")
            entries = [entry()]
            expect(",")
            while pos < len(toks) and toks[pos] == "(":
                entries.append(entry())
                expect(",")
            chunk = Chunk(integer(), tuple(entries))
        else:
            if state is not None or chunk is not None:
                raise MessageSyntaxError("state part must come first and only once")
            if pos >= len(toks):
                raise MessageSyntaxError("truncated state part")
            try:
                q = monitor.state_index(toks[pos])
            except ValueError as e:
                raise MessageSyntaxError(str(e)) from e
            pos += 1
            expect(",")
            state = (q, integer())
        expect(")")
        if pos < len(toks):
            expect(",")
            if pos == len(toks):
                raise MessageSyntaxError("trailing comma")
    msg = Message(state, chunk)
    if not msg:
        raise MessageSyntaxError("empty message")
    return msg
