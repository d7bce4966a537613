"""Bit-size accounting, per-run counters and batch aggregation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from statistics import fmean
from typing import Iterable, Sequence

from .decent import LocalMonitorState, Message

# ⊤ ⊥ ∨ ∧ ¬ ⇒ ⇔ X F G U R W X̄ # ( )
N_OPS = 17


def _clog2(x: int) -> int:
    if x < 1:
        raise ValueError(f"log argument must be >= 1, got {x}")
    return (x - 1).bit_length()


@dataclass(frozen=True)
class SizeModel:
    n_events: int  # |Σ|
    n_states: int  # |Q|
    n_aps: int
    n_components: int
    n_ops: int = N_OPS

    @classmethod
    def for_monitor(cls, monitor) -> "SizeModel":
        a = monitor.alphabet
        return cls(1 << a.size, monitor.n_states, a.size, a.n)


def event_bits(model: SizeModel) -> int:
    return _clog2(model.n_events)


def state_bits(model: SizeModel) -> int:
    return _clog2(model.n_states)


def time_bits(t: int) -> int:
    """Bits for a timestamp: ``max(1, ceil(log2(t + 1)))``, so 0 and 1 cost one bit."""
    if t < 0:
        raise ValueError("timestamps are non-negative")
    return max(1, _clog2(t + 1))


def formula_bits(formula, model: SizeModel) -> int:
    from .ltl import symbol_count

    return symbol_count(formula) * _clog2(model.n_aps + model.n_ops)


def entry_bits(model: SizeModel) -> int:
    # event + n-bit bitmap of contributing components
    return event_bits(model) + model.n_components


def message_bits(msg: Message, model: SizeModel) -> int:
    bits = 0
    if msg.state is not None:
        bits += state_bits(model) + time_bits(msg.state[1])
    if msg.chunk is not None:
        bits += len(msg.chunk.entries) * entry_bits(model) + time_bits(msg.chunk.base)
    return bits


HALT_BITS = 1


def memory_bits(state: LocalMonitorState, model: SizeModel) -> int:
    return len(state.mem) * entry_bits(model) + state_bits(model) + 2 * time_bits(max(state.t, 0))


@dataclass
class MetricsRecord:
    n_msgs: int = 0
    msg_bits: int = 0
    trace_len_to_verdict: int = 0
    delay: int | None = None
    peak_mem_bits: int = 0

    def __post_init__(self):
        for name in ("n_msgs", "msg_bits", "trace_len_to_verdict", "peak_mem_bits"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


class EmptyBatch(ValueError):
    pass


CSV_HEADER = (
    "mode",
    "spec",
    "size",
    "runs",
    "n_msgs",
    "msg_bits",
    "trace_len",
    "delay",
    "mem_bits",
    "verdict_top",
    "verdict_bot",
    "verdict_unknown",
    "ratio_msgs_c_over_d",
    "ratio_bits_c_over_d",
    "ratio_msgs_d_over_c",
    "ratio_bits_d_over_c",
)


@dataclass(frozen=True)
class RunSummary:
    """What aggregation needs from one simulation (central or decentralized)."""

    mode: str
    spec: str
    size: str
    verdict: str  # "⊤", "⊥" or "?"
    metrics: MetricsRecord


def _mean(values: Sequence[float]) -> float | None:
    return fmean(values) if values else None


def aggregate(results: Iterable[RunSummary], central: Iterable[RunSummary] | None = None) -> dict:
    """Mean of each metric over a batch, plus ratios against ``central`` when given."""
    results = list(results)
    if not results:
        raise EmptyBatch("cannot aggregate an empty batch")
    first = results[0]
    row = {
        "mode": first.mode,
        "spec": first.spec,
        "size": first.size,
        "runs": len(results),
        "n_msgs": fmean(r.metrics.n_msgs for r in results),
        "msg_bits": fmean(r.metrics.msg_bits for r in results),
        "trace_len": fmean(r.metrics.trace_len_to_verdict for r in results),
        "delay": _mean([r.metrics.delay for r in results if r.metrics.delay is not None]),
        "mem_bits": fmean(r.metrics.peak_mem_bits for r in results),
        "verdict_top": sum(r.verdict == "⊤" for r in results),
        "verdict_bot": sum(r.verdict == "⊥" for r in results),
        "verdict_unknown": sum(r.verdict == "?" for r in results),
    }
    ratios = dict.fromkeys(CSV_HEADER[12:])
    if central is not None:
        c = aggregate(central)
        ratios["ratio_msgs_c_over_d"] = _ratio(c["n_msgs"], row["n_msgs"])
        ratios["ratio_bits_c_over_d"] = _ratio(c["msg_bits"], row["msg_bits"])
        ratios["ratio_msgs_d_over_c"] = _ratio(row["n_msgs"], c["n_msgs"])
        ratios["ratio_bits_d_over_c"] = _ratio(row["msg_bits"], c["msg_bits"])
    row.update(ratios)
    return row


def _ratio(num: float, den: float) -> float | None:
    return num / den if den else None


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(row.get(k)) for k in CSV_HEADER])
    return buf.getvalue()


def per_run_row(summary: RunSummary, run: int) -> dict:
    m = summary.metrics
    return {
        "mode": summary.mode,
        "spec": summary.spec,
        "size": summary.size,
        "runs": run,
        "n_msgs": m.n_msgs,
        "msg_bits": m.msg_bits,
        "trace_len": m.trace_len_to_verdict,
        "delay": m.delay,
        "mem_bits": m.peak_mem_bits,
        "verdict_top": int(summary.verdict == "⊤"),
        "verdict_bot": int(summary.verdict == "⊥"),
        "verdict_unknown": int(summary.verdict == "?"),
    }


__all__ = [
    "SizeModel",
    "MetricsRecord",
    "RunSummary",
    "event_bits",
    "state_bits",
    "time_bits",
    "formula_bits",
    "message_bits",
    "memory_bits",
    "aggregate",
    "to_csv",
    "EmptyBatch",
]
