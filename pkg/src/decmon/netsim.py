"""Deterministic round-based simulation of n local monitors on a ring.

Round ``r`` is an event round when ``r`` is a multiple of ``event_period`` (and
events remain) and a communication round when it is a multiple of
``comm_period``; after the last event every round communicates. Within a round
the local event is read first, then every live monitor steps on the same
snapshot, and the messages produced are delivered at the end of the round.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import decent
from .alphabet import Event, project
from .decent import Halt, LocalMonitorState, Message
from .metrics import HALT_BITS, MetricsRecord, SizeModel, event_bits, memory_bits, message_bits, state_bits
from .monitor import Monitor, Verdict, run, verdict_trace
from .specfile import format_event


class ConfigError(ValueError):
    pass


class NotBijective(ConfigError):
    pass


class NotSingleCycle(ConfigError):
    def __init__(self, k: int, i: int):
        super().__init__(f"choose_mon^{k}({i}) = {i}: routing is not a single cycle")
        self.k, self.i = k, i


class CapExceeded(RuntimeError):
    pass


class InvariantViolation(AssertionError):
    pass


@dataclass(frozen=True)
class CommConfig:
    """Communication layout: ``choose_mon[i - 1]`` is the recipient of monitor ``i``."""

    n: int
    choose_mon: tuple[int, ...]
    leader_mon: tuple[bool, ...]
    event_period: int = 1
    comm_period: int = 1
    post_trace_round_cap: int | None = None
    count_halt: bool = False
    # reserved: per-round routing/leader changes are not supported yet
    round_hook: Callable | None = field(default=None, compare=False)

    @classmethod
    def ring(cls, n: int, leaders: Sequence[int] = (1,), **kw) -> "CommConfig":
        """``choose_mon(i) = (i mod n) + 1`` with the given leader indices."""
        return cls(
            n=n,
            choose_mon=tuple(i % n + 1 for i in range(1, n + 1)),
            leader_mon=tuple(i in set(leaders) for i in range(1, n + 1)),
            **kw,
        )

    @property
    def cap(self) -> int:
        return 10 * self.n if self.post_trace_round_cap is None else self.post_trace_round_cap

    def recipient(self, i: int) -> int:
        return self.choose_mon[i - 1]

    def is_leader(self, i: int) -> bool:
        return self.leader_mon[i - 1]


def validate_config(cfg: CommConfig) -> None:
    n = cfg.n
    if n < 1:
        raise ConfigError("n must be >= 1")
    if len(cfg.choose_mon) != n or len(cfg.leader_mon) != n:
        raise ConfigError("choose_mon and leader_mon need one entry per monitor")
    if sorted(cfg.choose_mon) != list(range(1, n + 1)):
        raise NotBijective(f"choose_mon {cfg.choose_mon} is not a permutation of 1..{n}")
    for i in range(1, n + 1):
        j = i
        for k in range(1, n):
            j = cfg.choose_mon[j - 1]
            if j == i:
                raise NotSingleCycle(k, i)
    if cfg.event_period < 1 or cfg.comm_period < 1:
        raise ConfigError("event and communication periods must be >= 1")
    if cfg.cap < 0:
        raise ConfigError("post_trace_round_cap must be >= 0")
    if not any(cfg.leader_mon):
        warnings.warn("no leader monitor: verdicts may never be reached", stacklevel=2)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    monitor: int
    phase: str  # "read" or "comm"
    t_last: int
    t: int
    q: str
    mem: str
    action: str
    message: str = ""

    def render(self) -> str:
        line = (
            f"r={self.round} M{self.monitor} {self.phase}: {self.action}"
            f" | t_last={self.t_last} t={self.t} q={self.q} | mem={self.mem}"
        )
        return line + (f" | msg={self.message}" if self.message else "")


@dataclass
class SimResult:
    mode: str
    verdict: Verdict
    verdict_round: int | None
    verdict_monitor: int | None
    metrics: MetricsRecord
    central_verdicts: list[Verdict]
    central_index: int | None
    events_read: int
    rounds: int = 0
    message_logs: dict[int, list[tuple[int, str]]] = field(default_factory=dict)
    records: list[RoundRecord] = field(default_factory=list)
    final_states: list[LocalMonitorState] = field(default_factory=list)
    # verdict reached by each monitor, if any
    monitor_verdicts: dict[int, Verdict] = field(default_factory=dict)

    def transcript(self) -> str:
        return "\n".join(r.render() for r in self.records) + "\n"


def global_trace(monitor: Monitor, local_traces: Sequence[Sequence[Event]]) -> list[Event]:
    alphabet = monitor.alphabet
    if len(local_traces) != alphabet.n:
        raise ConfigError(f"expected {alphabet.n} local traces, got {len(local_traces)}")
    lengths = {len(tr) for tr in local_traces}
    if len(lengths) > 1:
        raise ConfigError("local traces must all have the same length")
    length = lengths.pop() if lengths else 0
    return [alphabet.merge([tr[k] for tr in local_traces]) for k in range(length)]


def first_definitive(verdicts: Sequence[Verdict]) -> int | None:
    for k, v in enumerate(verdicts):
        if v.definitive:
            return k
    return None


def _record(monitor: Monitor, st: LocalMonitorState, r: int, phase: str, action: str, msg: str = "") -> RoundRecord:
    return RoundRecord(
        round=r,
        monitor=st.index,
        phase=phase,
        t_last=st.t_last,
        t=st.t,
        q=monitor.states[st.q],
        mem=decent.format_memory(monitor, st.mem),
        action=action,
        message=msg,
    )


def _check_ground_truth(monitor: Monitor, tau: Sequence[Event], st: LocalMonitorState):
    if st.halted:
        return
    if st.q != run(monitor, tau[: st.t_last]):
        raise InvariantViolation(f"M{st.index}: q is not the state at t_last={st.t_last}")
    for t, e in st.mem.items():
        if t < len(tau) and e.sigma != project(monitor.alphabet, e.sources, tau[t]):
            raise InvariantViolation(f"M{st.index}: memory entry at {t} is unsound")


def simulate(
    monitor: Monitor,
    local_traces: Sequence[Sequence[Event]],
    cfg: CommConfig,
    seed: int | None = None,
    *,
    debug: bool = False,
    log_rounds: bool = False,
) -> SimResult:
    """Run the decentralized algorithm on ``local_traces`` until every monitor is done.

    A monitor is done once it has halted, or once the trace is exhausted and its
    last known global state covers every event without a definitive verdict.
    ``seed`` is accepted for interface symmetry; the simulation draws no randomness.
    """
    validate_config(cfg)
    alphabet = monitor.alphabet
    if cfg.n != alphabet.n:
        raise ConfigError(f"config is for {cfg.n} monitors, alphabet has {alphabet.n} components")
    tau = global_trace(monitor, local_traces)
    length = len(tau)
    model = SizeModel.for_monitor(monitor)
    central = verdict_trace(monitor, tau)
    states = [decent.initial_state(monitor, i) for i in range(1, cfg.n + 1)]
    inbox: list[Message | None] = [None] * cfg.n
    metrics = MetricsRecord()
    logs: dict[int, list[tuple[int, str]]] = {i: [] for i in range(1, cfg.n + 1)}
    records: list[RoundRecord] = []
    monitor_verdicts: dict[int, Verdict] = {}
    verdict, verdict_round, verdict_monitor = Verdict.UNKNOWN, None, None
    last_event_round = (length - 1) * cfg.event_period

    r = 0
    while True:
        events_so_far = min(length, r // cfg.event_period + 1) if length else 0
        is_event = length > 0 and r % cfg.event_period == 0 and r // cfg.event_period < length
        if is_event:
            k = r // cfg.event_period
            for idx, st in enumerate(states):
                ev = local_traces[idx][k]
                states[idx] = decent.receive(st, event=ev, alphabet=alphabet)
        is_comm = r % cfg.comm_period == 0 or r > last_event_round
        if is_comm:
            outcomes = [decent.step(st, monitor, cfg.is_leader(st.index)) for st in states]
            halts: list[Halt] = []
            for idx, out in enumerate(outcomes):
                i = idx + 1
                states[idx] = out.state
                if states[idx].halted and not out.verdict:
                    continue
                metrics.peak_mem_bits = max(metrics.peak_mem_bits, memory_bits(out.folded, model))
                if log_rounds and is_event:
                    ev = local_traces[idx][r // cfg.event_period]
                    records.append(_record(monitor, out.folded, r, "read", f"read {format_event(alphabet, ev)}"))
                if out.verdict is not None:
                    monitor_verdicts[i] = out.verdict
                    halts.append(Halt(i, out.verdict))
                    if verdict_round is None:
                        verdict, verdict_round, verdict_monitor = out.verdict, r, i
                    logs[i].append((r, f"return {out.verdict}"))
                elif out.message is not None:
                    j = cfg.recipient(i)
                    if j == i:
                        # single component: nobody to talk to
                        continue
                    text = decent.text_of_message(monitor, out.message)
                    logs[i].append((r, f"send M{j} {text}"))
                    metrics.n_msgs += 1
                    metrics.msg_bits += message_bits(out.message, model)
                    inbox[j - 1] = out.message
            # deliver
            for idx in range(cfg.n):
                msg, inbox[idx] = inbox[idx], None
                if msg is not None:
                    states[idx] = decent.receive(states[idx], msg=msg)
            for h in halts:
                if cfg.count_halt:
                    metrics.n_msgs += cfg.n - 1
                    metrics.msg_bits += (cfg.n - 1) * HALT_BITS
                for idx in range(cfg.n):
                    if not states[idx].halted:
                        monitor_verdicts.setdefault(idx + 1, h.verdict)
                        states[idx] = decent.halt(states[idx], h.verdict)
            if log_rounds:
                for idx, out in enumerate(outcomes):
                    i = idx + 1
                    if out.verdict is not None:
                        action, text = f"return {out.verdict}", ""
                    elif out.message is not None and cfg.recipient(i) != i:
                        action = f"send M{cfg.recipient(i)}"
                        text = decent.text_of_message(monitor, out.message)
                    elif out.state.halted and out.folded.halted:
                        continue
                    else:
                        action, text = "idle", ""
                    records.append(_record(monitor, states[idx], r, "comm", action, text))
            for st in states:
                if not st.halted:
                    metrics.peak_mem_bits = max(metrics.peak_mem_bits, memory_bits(st, model))
            if debug:
                for st in states:
                    _check_ground_truth(monitor, tau, st)
        elif log_rounds and is_event:
            for idx, st in enumerate(states):
                ev = local_traces[idx][r // cfg.event_period]
                records.append(_record(monitor, st, r, "read", f"read {format_event(alphabet, ev)}"))

        if all(st.halted for st in states):
            break
        if r >= last_event_round and _all_done(monitor, states, length):
            break
        if r - max(last_event_round, 0) >= cfg.cap:
            raise CapExceeded(
                f"monitors still running {cfg.cap} rounds after the last event "
                f"(round {r}, t_last={[st.t_last for st in states]})"
            )
        r += 1

    central_index = first_definitive(central)
    if verdict.definitive:
        metrics.trace_len_to_verdict = min(verdict_round // cfg.event_period + 1, length)
    else:
        metrics.trace_len_to_verdict = length
    if verdict.definitive and central_index is not None:
        metrics.delay = verdict_round - central_index * cfg.event_period
    return SimResult(
        mode="decent",
        verdict=verdict,
        verdict_round=verdict_round,
        verdict_monitor=verdict_monitor,
        metrics=metrics,
        central_verdicts=central,
        central_index=central_index,
        events_read=events_so_far,
        rounds=r + 1,
        message_logs=logs,
        records=records,
        final_states=states,
        monitor_verdicts=monitor_verdicts,
    )


def _all_done(monitor: Monitor, states: Sequence[LocalMonitorState], length: int) -> bool:
    for st in states:
        if st.halted:
            continue
        if st.t < length - 1 or st.t_last <= st.t:
            return False
        if monitor.verdicts[st.q].definitive:
            return False
    return True


def run_centralized(monitor: Monitor, local_traces: Sequence[Sequence[Event]]) -> SimResult:
    """Baseline: every component forwards its event to a central monitor when it changes."""
    tau = global_trace(monitor, local_traces)
    model = SizeModel.for_monitor(monitor)
    central = verdict_trace(monitor, tau)
    metrics = MetricsRecord(peak_mem_bits=state_bits(model))
    per_msg = event_bits(model)
    verdict, index = Verdict.UNKNOWN, None
    if monitor.verdicts[monitor.initial].definitive:
        # decided before any event is sent
        verdict = monitor.verdicts[monitor.initial]
        metrics.trace_len_to_verdict = 0
        return SimResult("central", verdict, 0, None, metrics, central, first_definitive(central), 0)
    for k in range(len(tau)):
        for tr in local_traces:
            if k == 0 or tr[k] != tr[k - 1]:
                metrics.n_msgs += 1
                metrics.msg_bits += per_msg
        if central[k].definitive:
            verdict, index = central[k], k
            break
    if index is None:
        metrics.trace_len_to_verdict = len(tau)
    else:
        metrics.trace_len_to_verdict = index + 1
    return SimResult(
        mode="central",
        verdict=verdict,
        verdict_round=index,
        verdict_monitor=None,
        metrics=metrics,
        central_verdicts=central,
        central_index=first_definitive(central),
        events_read=len(tau) if index is None else index + 1,
    )
