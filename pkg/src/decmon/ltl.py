"""LTL formulas: parsing, printing, progression, simplification and compilation.

Compiled monitors follow progression semantics: a state is a simplified residual
formula and its verdict is ⊤/⊥ only when the residual *is* ``true``/``false``.
This is weaker than exact good/bad-prefix detection for some formulas (for
instance ``G F a`` never collapses), which is the intended behaviour.
"""

from __future__ import annotations

import re
from collections import deque
from typing import Callable, Iterable

from .alphabet import DistributedAlphabet
from .monitor import Monitor, Verdict


class LTLSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


class StateExplosion(RuntimeError):
    def __init__(self, cap: int):
        super().__init__(f"progression closure exceeds {cap} states")
        self.cap = cap


class Formula:
    """Base class. Nodes are immutable and compared by a canonical structural key."""

    __slots__ = ("_key", "_hash")
    rank = 0

    def _init_key(self, *parts):
        key = (self.rank, *parts)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __setattr__(self, name, value):
        raise AttributeError("formulas are immutable")

    def __eq__(self, other):
        return isinstance(other, Formula) and self._hash == other._hash and self._key == other._key

    def __hash__(self):
        return self._hash

    def __lt__(self, other: "Formula"):
        return self._key < other._key

    def __repr__(self):
        return f"Formula({render(self)!r})"

    def __str__(self):
        return render(self)

    @property
    def children(self) -> tuple["Formula", ...]:
        return ()


class _Const(Formula):
    __slots__ = ()

    def __init__(self):
        self._init_key()


class Top(_Const):
    __slots__ = ()
    rank = 0


class Bot(_Const):
    __slots__ = ()
    rank = 1


TRUE, FALSE = Top(), Bot()


class Atom(Formula):
    __slots__ = ("name",)
    rank = 2

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        self._init_key(name)


class _Unary(Formula):
    __slots__ = ("arg",)

    def __init__(self, arg: Formula):
        object.__setattr__(self, "arg", arg)
        self._init_key(arg._key)

    @property
    def children(self):
        return (self.arg,)


class Not(_Unary):
    __slots__ = ()
    rank = 3


class Next(_Unary):
    __slots__ = ()
    rank = 4


class WeakNext(_Unary):
    __slots__ = ()
    rank = 5


class Finally(_Unary):
    __slots__ = ()
    rank = 6


class Globally(_Unary):
    __slots__ = ()
    rank = 7


class _Binary(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula, right: Formula):
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        self._init_key(left._key, right._key)

    @property
    def children(self):
        return (self.left, self.right)


class Until(_Binary):
    __slots__ = ()
    rank = 8


class Release(_Binary):
    __slots__ = ()
    rank = 9


class WeakUntil(_Binary):
    __slots__ = ()
    rank = 10


class Implies(_Binary):
    __slots__ = ()
    rank = 11


class Iff(_Binary):
    __slots__ = ()
    rank = 12


class _Nary(Formula):
    __slots__ = ("args",)

    def __init__(self, *args: Formula):
        if len(args) < 2:
            raise ValueError(f"{type(self).__name__} needs at least two operands")
        object.__setattr__(self, "args", tuple(args))
        self._init_key(tuple(a._key for a in args))

    @property
    def children(self):
        return self.args


class And(_Nary):
    __slots__ = ()
    rank = 13


class Or(_Nary):
    __slots__ = ()
    rank = 14


TEMPORAL = (Next, WeakNext, Finally, Globally, Until, Release, WeakUntil)

# -- printing -----------------------------------------------------------------

_UNARY_OPS = {Not: "!", Next: "X", WeakNext: "Xw", Finally: "F", Globally: "G"}
_BINARY_OPS = {Until: "U", Release: "R", WeakUntil: "W", Implies: "->", Iff: "<->"}
# binding strength, higher binds tighter
_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Until: 5, Release: 5, WeakUntil: 5}


def render(f: Formula) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, _Unary):
        inner = _wrap(f.arg, 6)
        return f"!{inner}" if isinstance(f, Not) else f"{_UNARY_OPS[type(f)]} {inner}"
    if isinstance(f, _Nary):
        sym = " & " if isinstance(f, And) else " | "
        p = _PREC[type(f)]
        return sym.join(_wrap(a, p + 1) for a in f.args)
    p = _PREC[type(f)]
    # right-associative: the left operand needs parentheses at equal precedence
    return f"{_wrap(f.left, p + 1)} {_BINARY_OPS[type(f)]} {_wrap(f.right, p)}"


def _wrap(f: Formula, min_prec: int) -> str:
    text = render(f)
    if _PREC.get(type(f), 6) < min_prec:
        return f"({text})"
    return text


_TOKEN_RE = re.compile(
    r"\s*(?:(<->|<=>|⇔|↔)|(->|=>|⇒|→)|(&&|&|∧)|(\|\||\||∨)|(!|~|¬)|(\(|\))"
    r"|(X̄|Xw|⊤|⊥|[A-Za-z_][A-Za-z0-9_]*))"
)
_KEYWORDS = {"X", "Xw", "X̄", "F", "G", "U", "R", "W", "true", "false", "⊤", "⊥"}


def tokenize(text: str) -> list[tuple[str, int]]:
    out, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise LTLSyntaxError(f"unexpected character {text[start]!r}", start)
        tok = next(g for g in m.groups() if g is not None)
        out.append((_normalize(tok), m.start(m.lastindex)))
        pos = m.end()
    return out


def _normalize(tok: str) -> str:
    table = {
        "<=>": "<->", "⇔": "<->", "↔": "<->",
        "=>": "->", "⇒": "->", "→": "->",
        "&&": "&", "∧": "&", "||": "|", "∨": "|",
        "~": "!", "¬": "!", "X̄": "Xw", "⊤": "true", "⊥": "false",
    }
    return table.get(tok, tok)


def symbol_count(f: Formula) -> int:
    """Atoms, operators and parentheses in the canonical rendering."""
    return len(tokenize(render(f)))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.pos = 0

    def peek(self) -> str | None:
        return self.toks[self.pos][0] if self.pos < len(self.toks) else None

    def where(self) -> int:
        return self.toks[self.pos][1] if self.pos < len(self.toks) else len(self.text)

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise LTLSyntaxError("unexpected end of formula", len(self.text))
        self.pos += 1
        return tok

    def parse(self) -> Formula:
        f = self.iff()
        if self.peek() is not None:
            raise LTLSyntaxError(f"unexpected {self.peek()!r}", self.where())
        return f

    def iff(self) -> Formula:
        left = self.implies()
        if self.peek() == "<->":
            self.take()
            return Iff(left, self.iff())
        return left

    def implies(self) -> Formula:
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implies())
        return left

    def disj(self) -> Formula:
        args = [self.conj()]
        while self.peek() == "|":
            self.take()
            args.append(self.conj())
        return args[0] if len(args) == 1 else Or(*args)

    def conj(self) -> Formula:
        args = [self.temporal()]
        while self.peek() == "&":
            self.take()
            args.append(self.temporal())
        return args[0] if len(args) == 1 else And(*args)

    def temporal(self) -> Formula:
        left = self.unary()
        op = self.peek()
        if op in ("U", "R", "W"):
            self.take()
            cls = {"U": Until, "R": Release, "W": WeakUntil}[op]
            return cls(left, self.temporal())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        cls = {"!": Not, "X": Next, "Xw": WeakNext, "F": Finally, "G": Globally}.get(tok)
        if cls is not None:
            self.take()
            return cls(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        where = self.where()
        tok = self.take()
        if tok == "(":
            f = self.iff()
            if self.peek() != ")":
                raise LTLSyntaxError("expected ')'", self.where())
            self.take()
            return f
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        if tok in _KEYWORDS or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            raise LTLSyntaxError(f"unexpected {tok!r}", where)
        return Atom(tok)


def parse(text: str) -> Formula:
    return _Parser(text).parse()


def atoms(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return {f.name}
    out: set[str] = set()
    for c in f.children:
        out |= atoms(c)
    return out


# -- size measures ------------------------------------------------------------


def entailment_size(f: Formula, mode: str = "depth") -> int:
    """Temporal-operator size; state formulas have size 0.

    ``depth``: Boolean connectives add up their operands, a temporal operator adds
    one to the deepest of its operands. ``count``: total number of temporal operators.
    """
    if mode not in ("depth", "count"):
        raise ValueError(f"unknown mode {mode!r}")
    sizes = [entailment_size(c, mode) for c in f.children]
    if isinstance(f, TEMPORAL):
        if mode == "count":
            return 1 + sum(sizes)
        return 1 + max(sizes)
    return sum(sizes)


# -- simplification -----------------------------------------------------------


def _neg(f: Formula) -> Formula:
    if isinstance(f, Top):
        return FALSE
    if isinstance(f, Bot):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    if isinstance(f, And):
        return _or([_neg(a) for a in f.args])
    if isinstance(f, Or):
        return _and([_neg(a) for a in f.args])
    return Not(f)


def _flatten(cls, args: Iterable[Formula]) -> list[Formula]:
    out = []
    for a in args:
        out.extend(a.args if isinstance(a, cls) else (a,))
    return out


def _and(args: Iterable[Formula]) -> Formula:
    return _junction(And, Or, TRUE, FALSE, args)


def _or(args: Iterable[Formula]) -> Formula:
    return _junction(Or, And, FALSE, TRUE, args)


def _junction(cls, dual, unit, zero, args) -> Formula:
    items = set()
    for a in _flatten(cls, args):
        if a == zero:
            return zero
        if a != unit:
            items.add(a)
    for a in items:
        if _neg(a) in items:
            return zero
    # in x | y, y may assume !x (dually for &); rewriting only at Boolean
    # positions keeps this sound, and it stops progression closures from growing
    for y in sorted(items):
        if not isinstance(y, _BOOLEAN):
            continue
        y2 = _assume(y, items - {y}, unit)
        if y2 != y:
            return _junction(cls, dual, unit, zero, (items - {y}) | {simplify(y2)})
    # absorption: x & (x | y) = x
    items = {
        a for a in items
        if not (isinstance(a, dual) and any(b in items for b in a.args))
    }
    if not items:
        return unit
    if len(items) == 1:
        return items.pop()
    return cls(*sorted(items))


_BOOLEAN = (Not, And, Or, Implies, Iff)


def _assume(f: Formula, known: set, value: Formula) -> Formula:
    """Replace Boolean-position occurrences of ``known`` in ``f`` by ``value``."""
    if f in known:
        return value
    if isinstance(f, Not):
        return Not(_assume(f.arg, known, value))
    if isinstance(f, _Nary):
        return type(f)(*(_assume(a, known, value) for a in f.args))
    if isinstance(f, (Implies, Iff)):
        return type(f)(_assume(f.left, known, value), _assume(f.right, known, value))
    return f


def simplify(f: Formula) -> Formula:
    """Canonical Boolean simplification; equal formulas simplify to identical objects."""
    return _simplify(f, {})


def _simplify(f: Formula, memo: dict) -> Formula:
    hit = memo.get(f)
    if hit is not None:
        return hit
    out = _simplify_node(f, memo)
    memo[f] = out
    return out


def _simplify_node(f: Formula, memo: dict) -> Formula:
    if isinstance(f, (Top, Bot, Atom)):
        return f
    s = [_simplify(c, memo) for c in f.children]
    if isinstance(f, Not):
        return _neg(s[0])
    if isinstance(f, And):
        return _and(s)
    if isinstance(f, Or):
        return _or(s)
    if isinstance(f, Implies):
        return _or([_neg(s[0]), s[1]])
    if isinstance(f, Iff):
        a, b = sorted(s)
        if a == b:
            return TRUE
        if _neg(a) == b:
            return FALSE
        for x, y in ((a, b), (b, a)):
            if x == TRUE:
                return y
            if x == FALSE:
                return _neg(y)
        return Iff(a, b)
    if isinstance(f, (Next, WeakNext)):
        a = s[0]
        return a if isinstance(a, _Const) else type(f)(a)
    if isinstance(f, Finally):
        a = s[0]
        if isinstance(a, (_Const, Finally)):
            return a
        return Finally(a)
    if isinstance(f, Globally):
        a = s[0]
        if isinstance(a, (_Const, Globally)):
            return a
        return Globally(a)
    left, right = s
    if isinstance(f, Until):
        if isinstance(right, _Const) or left == FALSE:
            return right
        if left == TRUE:
            return _simplify(Finally(right), memo)
        if left == right:
            return left
        return Until(left, right)
    if isinstance(f, Release):
        if isinstance(right, _Const) or left == TRUE:
            return right
        if left == FALSE:
            return _simplify(Globally(right), memo)
        if left == right:
            return left
        return Release(left, right)
    if isinstance(f, WeakUntil):
        if right == TRUE or left == TRUE:
            return TRUE
        if left == FALSE:
            return right
        if right == FALSE:
            return _simplify(Globally(left), memo)
        if left == right:
            return left
        return WeakUntil(left, right)
    raise TypeError(f"unknown formula node {type(f).__name__}")


# -- progression --------------------------------------------------------------


def _progress(f: Formula, holds: Callable[[str], bool], memo: dict) -> Formula:
    hit = memo.get(f)
    if hit is not None:
        return hit
    if isinstance(f, _Const):
        out = f
    elif isinstance(f, Atom):
        out = TRUE if holds(f.name) else FALSE
    elif isinstance(f, Not):
        out = Not(_progress(f.arg, holds, memo))
    elif isinstance(f, And):
        out = And(*(_progress(a, holds, memo) for a in f.args))
    elif isinstance(f, Or):
        out = Or(*(_progress(a, holds, memo) for a in f.args))
    elif isinstance(f, Implies):
        out = Implies(_progress(f.left, holds, memo), _progress(f.right, holds, memo))
    elif isinstance(f, Iff):
        out = Iff(_progress(f.left, holds, memo), _progress(f.right, holds, memo))
    elif isinstance(f, (Next, WeakNext)):
        out = f.arg
    elif isinstance(f, Finally):
        out = Or(_progress(f.arg, holds, memo), f)
    elif isinstance(f, Globally):
        out = And(_progress(f.arg, holds, memo), f)
    elif isinstance(f, (Until, WeakUntil)):
        pl, pr = _progress(f.left, holds, memo), _progress(f.right, holds, memo)
        out = Or(pr, And(pl, f))
    elif isinstance(f, Release):
        pl, pr = _progress(f.left, holds, memo), _progress(f.right, holds, memo)
        out = And(pr, Or(pl, f))
    else:
        raise TypeError(f"unknown formula node {type(f).__name__}")
    memo[f] = out
    return out


def progress(f: Formula, sigma: Iterable[str]) -> Formula:
    """Residual obligation after reading one event (the set of true atoms)."""
    sigma = frozenset(sigma)
    return simplify(_progress(f, sigma.__contains__, {}))


def progression_verdict(f: Formula, trace: Iterable[Iterable[str]]) -> Verdict:
    """⊤/⊥ once iterated progression reaches ``true``/``false``, else ?."""
    f = simplify(f)
    for sigma in trace:
        if isinstance(f, _Const):
            break
        f = progress(f, sigma)
    return _verdict_of(f)


def _verdict_of(f: Formula) -> Verdict:
    if isinstance(f, Top):
        return Verdict.TOP
    if isinstance(f, Bot):
        return Verdict.BOT
    return Verdict.UNKNOWN


# -- compilation --------------------------------------------------------------

DEFAULT_STATE_CAP = 10_000


def compile_formula(
    f: Formula, alphabet: DistributedAlphabet, cap: int = DEFAULT_STATE_CAP
) -> tuple[Monitor, list[Formula]]:
    """Monitor whose states are the progression closure of ``f``; also returns the state formulas."""
    unknown = atoms(f) - set(alphabet.aps)
    if unknown:
        raise ValueError(f"atoms {sorted(unknown)} are not in the alphabet")
    ids = {p: k for k, p in enumerate(alphabet.aps)}
    start = simplify(f)
    index = {start: 0}
    formulas = [start]
    rows: list[list[int]] = []
    queue = deque([start])
    n_events = 1 << alphabet.size
    while queue:
        g = queue.popleft()
        row = []
        cache: dict[Formula, int] = {}
        for ev in range(n_events):
            succ = simplify(_progress(g, lambda p, ev=ev: bool(ev >> ids[p] & 1), {}))
            k = index.get(succ)
            if k is None:
                if len(formulas) >= cap:
                    raise StateExplosion(cap)
                k = index[succ] = len(formulas)
                formulas.append(succ)
                queue.append(succ)
            cache[succ] = k
            row.append(k)
        rows.append(row)
    names = tuple(f"q{k}" for k in range(len(formulas)))
    monitor = Monitor(
        alphabet=alphabet,
        states=names,
        initial=0,
        delta=tuple(tuple(r) for r in rows),
        verdicts=tuple(_verdict_of(g) for g in formulas),
    )
    return monitor, formulas


def compile(f: Formula, alphabet: DistributedAlphabet, cap: int = DEFAULT_STATE_CAP) -> Monitor:  # noqa: A001
    return compile_formula(f, alphabet, cap)[0]
