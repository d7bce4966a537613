"""Distributed alphabets, bitset events and the projection function.

Propositions carry dense integer ids, so an event (a set of propositions) is an
``int`` bitmask and a set of component indices is an ``int`` bitmask too, with
component ``i`` (1-based) stored at bit ``i - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

Event = int
IndexSet = int


class AlphabetError(ValueError):
    pass


class OverlapError(AlphabetError):
    def __init__(self, prop: str, i: int, j: int):
        super().__init__(f"proposition {prop!r} appears in components {i} and {j}")
        self.prop, self.i, self.j = prop, i, j


class EmptyBlockError(AlphabetError):
    def __init__(self, i: int):
        super().__init__(f"component {i} owns no proposition")
        self.i = i


class UncoveredError(AlphabetError):
    def __init__(self, prop: str):
        super().__init__(f"proposition {prop!r} is not owned by any component")
        self.prop = prop


class EventOutOfAlphabet(AlphabetError):
    pass


@dataclass(frozen=True)
class AtomicProposition:
    id: int
    name: str


def validate_partition(aps: Sequence[str], blocks: Sequence[Iterable[str]]) -> None:
    """Raise unless ``blocks`` is a partition of ``aps`` into nonempty parts."""
    owner: dict[str, int] = {}
    for i, block in enumerate(blocks, start=1):
        block = list(block)
        if not block:
            raise EmptyBlockError(i)
        for p in block:
            if p in owner:
                raise OverlapError(p, owner[p], i)
            owner[p] = i
    for p in aps:
        if p not in owner:
            raise UncoveredError(p)
    unknown = [p for p in owner if p not in set(aps)]
    if unknown:
        raise AlphabetError(f"unknown proposition {unknown[0]!r} in components")


@dataclass(frozen=True)
class DistributedAlphabet:
    """Propositions ``aps`` split into ``n`` disjoint local alphabets.

    ``blocks[i - 1]`` holds the names owned by component ``i``.
    """

    aps: tuple[str, ...]
    blocks: tuple[tuple[str, ...], ...]
    _ids: dict = field(init=False, repr=False, compare=False, hash=False)
    _masks: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "aps", tuple(self.aps))
        object.__setattr__(self, "blocks", tuple(tuple(b) for b in self.blocks))
        if len(set(self.aps)) != len(self.aps):
            raise AlphabetError("duplicate proposition names")
        if not self.blocks:
            raise AlphabetError("at least one component is required")
        validate_partition(self.aps, self.blocks)
        ids = {p: k for k, p in enumerate(self.aps)}
        object.__setattr__(self, "_ids", ids)
        masks = tuple(sum(1 << ids[p] for p in b) for b in self.blocks)
        object.__setattr__(self, "_masks", masks)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[str]]) -> "DistributedAlphabet":
        aps = [p for b in blocks for p in b]
        return cls(tuple(aps), tuple(tuple(b) for b in blocks))

    @classmethod
    def parse(cls, text: str, aps: Sequence[str] | None = None) -> "DistributedAlphabet":
        """Parse a declaration such as ``"a b | c | d e"``."""
        blocks = [part.replace(",", " ").split() for part in text.split("|")]
        if aps is None:
            aps = list(dict.fromkeys(p for b in blocks for p in b))
        return cls(tuple(aps), tuple(tuple(b) for b in blocks))

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def size(self) -> int:
        return len(self.aps)

    @property
    def full(self) -> Event:
        return (1 << len(self.aps)) - 1

    @property
    def all_components(self) -> IndexSet:
        return (1 << self.n) - 1

    def propositions(self) -> list[AtomicProposition]:
        return [AtomicProposition(k, p) for k, p in enumerate(self.aps)]

    def prop_id(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise EventOutOfAlphabet(f"unknown proposition {name!r}") from None

    def local_mask(self, i: int) -> Event:
        return self._masks[i - 1]

    def observed_mask(self, s: IndexSet) -> Event:
        """Union of the local alphabets of the components in ``s``."""
        mask = 0
        for k, m in enumerate(self._masks):
            if s >> k & 1:
                mask |= m
        return mask

    def owner(self, prop: int) -> int:
        for k, m in enumerate(self._masks):
            if m >> prop & 1:
                return k + 1
        raise EventOutOfAlphabet(f"unknown proposition id {prop}")

    def event(self, names: Iterable[str]) -> Event:
        ev = 0
        for p in names:
            ev |= 1 << self.prop_id(p)
        return ev

    def names(self, ev: Event) -> list[str]:
        return [p for k, p in enumerate(self.aps) if ev >> k & 1]

    def check_event(self, ev: Event) -> Event:
        if ev < 0 or ev & ~self.full:
            raise EventOutOfAlphabet(f"event {ev:#x} uses unknown propositions")
        return ev

    def merge(self, local_events: Sequence[Event]) -> Event:
        """Global event at one instant: union of the components' local events."""
        ev = 0
        for i, le in enumerate(local_events, start=1):
            if le & ~self.local_mask(i):
                raise EventOutOfAlphabet(f"component {i} emitted a foreign proposition")
            ev |= le
        return ev

    def split(self, ev: Event) -> list[Event]:
        return [ev & m for m in self._masks]


def index_set(indices: Iterable[int]) -> IndexSet:
    s = 0
    for i in indices:
        if i < 1:
            raise AlphabetError(f"component index {i} out of range")
        s |= 1 << (i - 1)
    return s


def indices(s: IndexSet) -> list[int]:
    out, k = [], 1
    while s:
        if s & 1:
            out.append(k)
        s >>= 1
        k += 1
    return out


def project(alphabet: DistributedAlphabet, s: IndexSet, sigma: Event) -> Event:
    """The part of ``sigma`` visible to the components in ``s``."""
    return sigma & alphabet.observed_mask(s)


def submasks(mask: int):
    """Yield every submask of ``mask``, including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask
