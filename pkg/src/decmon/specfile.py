"""Line-oriented automaton spec files.

Example::

    aps: a b c
    components: a | b | c
    states: q0 q1
    init: q0
    accept: q1
    trans: q0 {a,b,c} -> q1
    trans: q0 * -> q0          # catch-all for q0
    trans: q1 * -> q1

Rules for a state are matched top-down; ``{...}`` is one exact event and ``*``
covers every event not matched by an earlier rule of that state.
"""

from __future__ import annotations

import re
from pathlib import Path

from .alphabet import DistributedAlphabet
from .monitor import Acceptor

_TRANS = re.compile(r"^(\S+)\s+(\*|\{[^}]*\}|∅)\s*->\s*(\S+)$")


class SpecError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


def parse_event(alphabet: DistributedAlphabet, text: str) -> int:
    text = text.strip()
    if text in ("∅", "{}", "-", ""):
        return 0
    if text.startswith("{") and text.endswith("}"):
        text = text[1:-1]
    names = [p for p in re.split(r"[,\s]+", text) if p]
    return alphabet.event(names)


def format_event(alphabet: DistributedAlphabet, ev: int) -> str:
    if not ev:
        return "∅"
    return "{" + ",".join(alphabet.names(ev)) + "}"


def parse_spec(text: str) -> Acceptor:
    fields: dict[str, tuple[int, str]] = {}
    rules: list[tuple[int, str, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise SpecError(f"expected 'key: value', got {line!r}", lineno)
        key, value = key.strip(), value.strip()
        if key == "trans":
            m = _TRANS.match(value)
            if not m:
                raise SpecError(f"malformed transition {value!r}", lineno)
            rules.append((lineno, *m.groups()))
        elif key in ("aps", "components", "states", "init", "accept"):
            if key in fields:
                raise SpecError(f"duplicate {key!r}", lineno)
            fields[key] = (lineno, value)
        else:
            raise SpecError(f"unknown key {key!r}", lineno)
    for key in ("aps", "states", "init"):
        if key not in fields:
            raise SpecError(f"missing {key!r}")

    aps = fields["aps"][1].split()
    try:
        if "components" in fields:
            alphabet = DistributedAlphabet.parse(fields["components"][1], aps)
        else:
            alphabet = DistributedAlphabet(tuple(aps), (tuple(aps),))
    except ValueError as e:
        raise SpecError(str(e), fields.get("components", (None,))[0]) from e

    states = fields["states"][1].split()
    if len(set(states)) != len(states):
        raise SpecError("duplicate state names", fields["states"][0])
    index = {q: k for k, q in enumerate(states)}

    def state(name: str, lineno: int) -> int:
        if name not in index:
            raise SpecError(f"unknown state {name!r}", lineno)
        return index[name]

    initial = state(fields["init"][1], fields["init"][0])
    accept_line, accept_text = fields.get("accept", (None, ""))
    accepting = frozenset(state(q, accept_line) for q in accept_text.split())

    n_events = 1 << len(aps)
    table: list[list[int | None]] = [[None] * n_events for _ in states]
    for lineno, src, label, dst in rules:
        q, succ = state(src, lineno), state(dst, lineno)
        row = table[q]
        if label == "*":
            for ev in range(n_events):
                if row[ev] is None:
                    row[ev] = succ
        else:
            try:
                ev = parse_event(alphabet, label)
            except ValueError as e:
                raise SpecError(str(e), lineno) from e
            if row[ev] is None:
                row[ev] = succ
    for q, row in enumerate(table):
        if any(succ is None for succ in row):
            raise SpecError(f"transitions of state {states[q]!r} are incomplete")
    delta = tuple(tuple(row) for row in table)
    return Acceptor(alphabet, tuple(states), initial, delta, accepting)


def load_spec(path: str | Path) -> Acceptor:
    return parse_spec(Path(path).read_text(encoding="utf-8"))


def dump_spec(acceptor: Acceptor) -> str:
    alphabet = acceptor.alphabet
    lines = [
        f"aps: {' '.join(alphabet.aps)}",
        "components: " + " | ".join(" ".join(b) for b in alphabet.blocks),
        f"states: {' '.join(acceptor.states)}",
        f"init: {acceptor.states[acceptor.initial]}",
        "accept: " + " ".join(acceptor.states[q] for q in sorted(acceptor.accepting)),
    ]
    for q, row in enumerate(acceptor.delta):
        default = max(set(row), key=row.count)
        for ev, succ in enumerate(row):
            if succ != default:
                lines.append(
                    f"trans: {acceptor.states[q]} {format_event(alphabet, ev)} -> {acceptor.states[succ]}"
                )
        lines.append(f"trans: {acceptor.states[q]} * -> {acceptor.states[default]}")
    return "\n".join(lines) + "\n"
