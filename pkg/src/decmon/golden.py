"""Golden replay of the worked three-component example.

The fixture is the reference transcript for L1 = "eventually {a,b,c}" with
leader_mon(i) = (i = 1), choose_mon(i) = (i mod 3) + 1 and the global trace
∅·{a,b}·{a,b,c}·{a}, written in the simulator's round-log notation. A ``*``
cell is absent from the reference transcript and is not compared.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import decent
from .generators import parse_trace
from .monitor import Monitor, monitor_from_acceptor
from .netsim import CommConfig, RoundRecord, SimResult, simulate
from .specfile import parse_spec

L1_SPEC = """\
aps: a b c
components: a | b | c
states: q0 q1
init: q0
accept: q1
trans: q0 {a,b,c} -> q1
trans: q0 * -> q0
trans: q1 * -> q1
"""

L1_TRACE = """\
-|-|-
a|b|-
a|b|c
a|-|-
"""

TABLE_1 = """\
r=-1 M1 init: start | t_last=0 t=-1 q=q0 | mem=∅
r=-1 M2 init: start | t_last=0 t=-1 q=q0 | mem=∅
r=-1 M3 init: start | t_last=0 t=-1 q=q0 | mem=∅
r=0 M1 read: read ∅ | t_last=1 t=0 q=q0 | mem={0↦(∅,{1})}
r=0 M2 read: read ∅ | t_last=1 t=0 q=q0 | mem={0↦(∅,{2})}
r=0 M3 read: read ∅ | t_last=1 t=0 q=q0 | mem={0↦(∅,{3})}
r=0 M1 comm: send M2 | t_last=1 t=0 q=q0 | mem=∅ | msg=(q0,1)
r=0 M2 comm: send M3 | t_last=1 t=0 q=q0 | mem=∅ | msg=(q0,1)
r=0 M3 comm: send M1 | t_last=1 t=0 q=q0 | mem={0↦(∅,{3})} | msg=(q0,1)
r=1 M1 read: read {a} | t_last=1 t=1 q=q0 | mem={1↦({a},{1})}
r=1 M2 read: read {b} | t_last=1 t=1 q=q0 | mem={1↦({b},{2})}
r=1 M3 read: read ∅ | t_last=2 t=1 q=q0 | mem={0↦(∅,{3}), 1↦(∅,{3})}
r=1 M1 comm: send M2 | t_last=2 t=1 q=q0 | mem={1↦({a},{1})} | msg=(({a},{1}),1)
r=1 M2 comm: send M3 | t_last=1 t=1 q=q0 | mem={1↦({a,b},{1,2})} | msg=(q0,1),(({b},{2}),1)
r=1 M3 comm: send M1 | t_last=2 t=1 q=q0 | mem=∅ | msg=(q0,2)
r=2 M1 read: read {a} | t_last=2 t=2 q=q0 | mem={2↦({a},{1})}
r=2 M2 read: read {b} | t_last=1 t=2 q=q0 | mem={1↦({a,b},{1,2}), 2↦({b},{2})}
r=2 M3 read: read {c} | t_last=2 t=2 q=q0 | mem={2↦({c},{3})}
r=2 M1 comm: send M2 | t_last=2 t=2 q=q0 | mem={2↦({a,c},{1,3})} | msg=(q0,2),(({a},{1}),2)
r=2 M2 comm: send M3 | t_last=2 t=2 q=q0 | mem={2↦({a,b},{1,2})} | msg=(({a,b},{1,2}),({b},{2}),1)
r=2 M3 comm: send M1 | t_last=2 t=2 q=q0 | mem={2↦({b,c},{2,3})} | msg=(({c},{3}),2)
r=3 M1 read: read {a} | t_last=2 t=3 q=q0 | mem={2↦({a,c},{1,3}), 3↦({a},{1})}
r=3 M2 read: read ∅ | t_last=2 t=3 q=q0 | mem={2↦({a,b},{1,2}), 3↦(∅,{2})}
r=3 M3 read: read ∅ | t_last=2 t=3 q=q0 | mem={2↦({b,c},{2,3}), 3↦(∅,{3})}
r=3 M1 comm: send M2 | t_last=2 t=3 q=q0 | mem={2↦({a,c},{1,3}), 3↦({a},{1,3})} | msg=(({a,c},{1,3}),({a},{1}),2)
r=3 M2 comm: send M3 | t_last=3 t=3 q=q1 | mem={3↦({a},{1,2})} | msg=(q0,2),(({a,b},{1,2}),(∅,{2}),2)
r=3 M3 comm: send M1 | t_last=2 t=3 q=q0 | mem={2↦({b,c},{2,3}), 3↦(∅,{2,3})} | msg=(({b,c},{2,3}),(∅,{3}),2)
r=4 M1 comm: send M2 | t_last=* t=* q=* | mem=* | msg=(({a,c},{1,3}),({a},{1,3}),2)
r=4 M2 comm: return ⊤ | t_last=* t=* q=* | mem=*
r=4 M3 comm: send M1 | t_last=* t=* q=* | mem=* | msg=(({b,c},{2,3}),(∅,{2,3}),2)
"""

_LINE = re.compile(
    r"^r=(?P<round>-?\d+) M(?P<monitor>\d+) (?P<phase>\w+): (?P<action>[^|]+?)"
    r" \| t_last=(?P<t_last>\S+) t=(?P<t>\S+) q=(?P<q>\S+) \| mem=(?P<mem>.*?)(?: \| msg=(?P<message>.*))?$"
)


@dataclass(frozen=True)
class Row:
    round: int
    monitor: int
    phase: str
    action: str
    t_last: str
    t: str
    q: str
    mem: str
    message: str

    def key(self):
        return (self.round, self.phase, self.monitor)


def parse_transcript(text: str) -> list[Row]:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        m = _LINE.match(line.strip())
        if not m:
            raise ValueError(f"line {lineno}: malformed transcript record {line!r}")
        d = m.groupdict()
        rows.append(
            Row(
                round=int(d["round"]),
                monitor=int(d["monitor"]),
                phase=d["phase"],
                action=d["action"],
                t_last=d["t_last"],
                t=d["t"],
                q=d["q"],
                mem=d["mem"],
                message=d["message"] or "",
            )
        )
    return rows


def l1_monitor() -> Monitor:
    return monitor_from_acceptor(parse_spec(L1_SPEC))


def replay() -> SimResult:
    monitor = l1_monitor()
    traces = parse_trace(monitor.alphabet, L1_TRACE)
    return simulate(monitor, traces, CommConfig.ring(3, leaders=(1,)), log_rounds=True)


def transcript(result: SimResult | None = None) -> str:
    """Canonical transcript of the replay, including the initial state of each monitor."""
    result = result or replay()
    monitor = l1_monitor()
    init = []
    for i in range(1, monitor.alphabet.n + 1):
        st = decent.initial_state(monitor, i)
        init.append(
            RoundRecord(-1, i, "init", st.t_last, st.t, monitor.states[st.q],
                        decent.format_memory(monitor, st.mem), "start").render()
        )
    return "\n".join(init) + "\n" + result.transcript()


_FIELDS = ("action", "t_last", "t", "q", "mem", "message")


def diff(expected: str, actual: str) -> str | None:
    """First divergence between two transcripts, or None when they agree."""
    exp, act = parse_transcript(expected), parse_transcript(actual)
    act_by_key = {r.key(): r for r in act}
    for e in exp:
        a = act_by_key.get(e.key())
        where = f"round {e.round}, M{e.monitor} {e.phase}"
        if a is None:
            return f"{where}: missing record"
        for name in _FIELDS:
            want, got = getattr(e, name), getattr(a, name)
            if want != "*" and want != got:
                return f"{where}: {name} expected {want!r}, got {got!r}"
    extra = [r for r in act if r.key() not in {e.key() for e in exp}]
    if extra:
        r = extra[0]
        return f"round {r.round}, M{r.monitor} {r.phase}: unexpected record"
    return None


def check(fixture: str = TABLE_1) -> str | None:
    return diff(fixture, transcript())
