"""Seeded generation of local traces, random LTL formulas and pattern formulas.

Every function takes an explicit ``random.Random`` (or a seed); nothing touches
the global RNG. Use :func:`rng_for` to derive independent streams per run.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import ltl
from .alphabet import DistributedAlphabet

LocalTrace = list  # list[Event], events over one component's local alphabet


class UnknownPattern(KeyError):
    pass


class TraceFormatError(ValueError):
    pass


def rng_for(seed, *path) -> random.Random:
    """Independent stream for ``(seed, *path)``; stable across Python versions."""
    return random.Random("/".join(str(p) for p in (seed, *path)))


def _rng(seed_or_rng) -> random.Random:
    if isinstance(seed_or_rng, random.Random):
        return seed_or_rng
    return random.Random(seed_or_rng)


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    trace_len: int = 1000
    prob: float = 0.5
    size: int = 2
    pattern: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.prob <= 1.0:
            raise ValueError(f"probability must be in [0, 1], got {self.prob}")
        if self.trace_len < 0:
            raise ValueError("trace length must be >= 0")


# -- traces -------------------------------------------------------------------


def gen_traces(alphabet: DistributedAlphabet, length: int, prob: float = 0.5, rng=None) -> list[LocalTrace]:
    """One local trace per component; each proposition is true with ``prob`` at every step."""
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {prob}")
    if length < 0:
        raise ValueError("trace length must be >= 0")
    rng = _rng(rng)
    traces: list[LocalTrace] = [[] for _ in range(alphabet.n)]
    for _ in range(length):
        for i in range(1, alphabet.n + 1):
            ev = 0
            for k in range(alphabet.size):
                bit = 1 << k
                if alphabet.local_mask(i) & bit and rng.random() < prob:
                    ev |= bit
            traces[i - 1].append(ev)
    return traces


def format_trace(alphabet: DistributedAlphabet, traces: Sequence[LocalTrace]) -> str:
    """ASCII trace file: one line per instant, ``|`` between components, ``-`` for ∅."""
    lines = []
    for k in range(len(traces[0]) if traces else 0):
        cells = [",".join(alphabet.names(tr[k])) or "-" for tr in traces]
        lines.append("|".join(cells))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_trace(alphabet: DistributedAlphabet, text: str) -> list[LocalTrace]:
    traces: list[LocalTrace] = [[] for _ in range(alphabet.n)]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cells = line.split("|")
        if len(cells) != alphabet.n:
            raise TraceFormatError(f"line {lineno}: expected {alphabet.n} components, got {len(cells)}")
        for i, cell in enumerate(cells, start=1):
            cell = cell.strip().strip("{}")
            names = [] if cell in ("-", "∅", "") else [p.strip() for p in cell.split(",")]
            try:
                ev = alphabet.event(names)
            except ValueError as e:
                raise TraceFormatError(f"line {lineno}: {e}") from e
            if ev & ~alphabet.local_mask(i):
                raise TraceFormatError(f"line {lineno}: component {i} cannot observe {cell!r}")
            traces[i - 1].append(ev)
    return traces


def load_trace(alphabet: DistributedAlphabet, path: str | Path) -> list[LocalTrace]:
    return parse_trace(alphabet, Path(path).read_text(encoding="utf-8"))


# -- random formulas ----------------------------------------------------------

_UNARY_T = (ltl.Next, ltl.Finally, ltl.Globally, ltl.WeakNext)
_BINARY_T = (ltl.Until, ltl.Release, ltl.WeakUntil)


def _state_formula(aps: Sequence[str], rng: random.Random) -> ltl.Formula:
    x = rng.random()
    atom = ltl.Atom(rng.choice(aps))
    if x < 0.6:
        return atom
    if x < 0.8:
        return ltl.Not(atom)
    cls = rng.choice((ltl.And, ltl.Or))
    return cls(atom, ltl.Atom(rng.choice(aps)))


def _gen(k: int, aps: Sequence[str], rng: random.Random, mode: str) -> ltl.Formula:
    if k == 0:
        return _state_formula(aps, rng)
    kinds = ["unary", "unary", "binary"]
    if k >= 2:
        kinds.append("bool")
    kind = rng.choice(kinds)
    if kind == "unary":
        return rng.choice(_UNARY_T)(_gen(k - 1, aps, rng, mode))
    if kind == "binary":
        cls = rng.choice(_BINARY_T)
        if mode == "count":
            j = rng.randint(0, k - 1)
            left, right = _gen(j, aps, rng, mode), _gen(k - 1 - j, aps, rng, mode)
        else:
            big, small = _gen(k - 1, aps, rng, mode), _gen(rng.randint(0, k - 1), aps, rng, mode)
            left, right = (big, small) if rng.random() < 0.5 else (small, big)
        return cls(left, right)
    j = rng.randint(1, k - 1)
    cls = rng.choice((ltl.And, ltl.Or, ltl.Implies))
    return cls(_gen(j, aps, rng, mode), _gen(k - j, aps, rng, mode))


def gen_formula(alphabet: DistributedAlphabet, target_size: int, rng=None, mode: str = "depth") -> ltl.Formula:
    """Random formula whose entailment size is exactly ``target_size``."""
    if target_size < 1:
        raise ValueError("target size must be >= 1")
    if target_size > 6:
        warnings.warn(f"formula size {target_size} is above the usual range 1..6", stacklevel=2)
    f = _gen(target_size, list(alphabet.aps), _rng(rng), mode)
    assert ltl.entailment_size(f, mode) == target_size
    return f


# -- specification patterns ---------------------------------------------------


def _load_patterns() -> dict[str, list[str]]:
    text = resources.files("decmon").joinpath("data/patterns.json").read_text(encoding="utf-8")
    return json.loads(text)


PATTERNS: dict[str, list[str]] = _load_patterns()
PATTERN_KINDS = tuple(PATTERNS)


def gen_pattern(kind: str, alphabet: DistributedAlphabet, rng=None) -> ltl.Formula:
    """Instantiate a global-scope template of ``kind`` with random atoms."""
    if kind not in PATTERNS:
        raise UnknownPattern(kind)
    rng = _rng(rng)
    template = rng.choice(PATTERNS[kind])
    slots = ("p", "s", "t", "z")
    aps = list(alphabet.aps)
    if len(aps) >= len(slots):
        chosen = rng.sample(aps, len(slots))
    else:
        chosen = [rng.choice(aps) for _ in slots]
    return ltl.parse(template.format(**dict(zip(slots, chosen))))
