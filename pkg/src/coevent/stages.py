"""History spaces, the restriction map between stages, and the event ring.

Histories are positional: history ``i`` of a stage is bit ``i`` of every event
mask at that stage. Labels only matter for display and for looking histories
up by name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .bits import iter_bits, mask_of, popcount
from .errors import InvalidLinkError, NoPredecessorError, StageMismatchError


@dataclass(frozen=True)
class History:
    stage: int
    index: int
    label: str
    parent: int | None = None


@dataclass(frozen=True)
class Event:
    """A set of histories of a single stage, stored as a bitmask.

    ``+`` is symmetric difference and ``*`` is intersection, so events form
    the Boolean ring of the stage's power set.
    """

    stage: int
    n: int
    bits: int = 0

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"event bits {self.bits:#x} exceed stage size {self.n}")

    def _check(self, other: "Event") -> None:
        if not isinstance(other, Event):
            raise TypeError(f"expected Event, got {type(other).__name__}")
        if other.stage != self.stage or other.n != self.n:
            raise StageMismatchError(
                f"cannot combine events of stage {self.stage} and stage {other.stage}"
            )

    def __add__(self, other: "Event") -> "Event":
        self._check(other)
        return Event(self.stage, self.n, self.bits ^ other.bits)

    def __mul__(self, other: "Event") -> "Event":
        self._check(other)
        return Event(self.stage, self.n, self.bits & other.bits)

    def __invert__(self) -> "Event":
        return Event(self.stage, self.n, self.bits ^ ((1 << self.n) - 1))

    def __le__(self, other: "Event") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def __ge__(self, other: "Event") -> bool:
        return other <= self

    def __lt__(self, other: "Event") -> bool:
        return self <= other and self.bits != other.bits

    def __gt__(self, other: "Event") -> bool:
        return other < self

    def __contains__(self, index: int) -> bool:
        return bool(self.bits >> index & 1)

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.bits)

    def __len__(self) -> int:
        return popcount(self.bits)

    def __bool__(self) -> bool:
        return self.bits != 0

    def complement(self) -> "Event":
        return ~self


class Stage:
    """An immutable history space together with its parent map."""

    def __init__(self, t: int, labels: Sequence[str], parents: Sequence[int] | None = None):
        if t < 0:
            raise ValueError("stage index must be non-negative")
        if len(labels) == 0:
            raise ValueError(f"stage {t} has no histories")
        if len(set(labels)) != len(labels):
            raise ValueError(f"stage {t} has duplicate history labels")
        if t == 0 and parents is not None:
            raise ValueError("stage 0 histories have no parents")
        if t > 0:
            if parents is None or len(parents) != len(labels):
                raise ValueError(f"stage {t} needs one parent per history")
            if any(p < 0 for p in parents):
                raise ValueError(f"stage {t} has a negative parent index")
        self.t = t
        self.labels: tuple[str, ...] = tuple(str(x) for x in labels)
        self.parents: tuple[int, ...] | None = None if parents is None else tuple(int(p) for p in parents)
        self.n = len(self.labels)
        self.full = (1 << self.n) - 1
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self.histories: tuple[History, ...] = tuple(
            History(t, i, lab, None if self.parents is None else self.parents[i])
            for i, lab in enumerate(self.labels)
        )

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Stage(t={self.t}, n={self.n})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Stage)
            and self.t == other.t
            and self.labels == other.labels
            and self.parents == other.parents
        )

    def __hash__(self) -> int:
        return hash((self.t, self.labels, self.parents))

    def index(self, label: str) -> int:
        return self._index[label]

    def event(self, histories: Iterable[int | str] = ()) -> Event:
        """Build an event from history indices and/or labels."""
        idx = [self._index[h] if isinstance(h, str) else int(h) for h in histories]
        for i in idx:
            if not 0 <= i < self.n:
                raise IndexError(f"history {i} out of range for {self!r}")
        return Event(self.t, self.n, mask_of(idx))

    def event_from_mask(self, bits: int) -> Event:
        return Event(self.t, self.n, bits)

    def empty(self) -> Event:
        return Event(self.t, self.n, 0)

    def omega(self) -> Event:
        return Event(self.t, self.n, self.full)

    def labels_of(self, bits: int) -> list[str]:
        return [self.labels[i] for i in iter_bits(bits)]

    # ---- cached lookups used by the mask-level algorithms --------------

    @property
    def children(self) -> tuple[int, ...]:
        """children[h] is the mask of stage-t histories whose parent is h."""
        try:
            return self._children
        except AttributeError:
            pass
        if self.parents is None:
            raise NoPredecessorError("stage 0 has no predecessor")
        width = max(self.parents) + 1
        ch = [0] * width
        for j, p in enumerate(self.parents):
            ch[p] |= 1 << j
        self._children = tuple(ch)
        return self._children

    def extend_mask(self, prev_bits: int) -> int:
        """Preimage of a stage t-1 mask under the parent map."""
        ch = self.children
        out = 0
        for h in iter_bits(prev_bits):
            if h < len(ch):
                out |= ch[h]
        return out

    def restrict_mask(self, bits: int) -> int:
        if self.parents is None:
            raise NoPredecessorError("stage 0 has no predecessor")
        out = 0
        for j in iter_bits(bits):
            out |= 1 << self.parents[j]
        return out


@dataclass(frozen=True)
class LinkDiagnostics:
    t: int
    extension_counts: tuple[int, ...]
    orphans: tuple[int, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.orphans

    @property
    def uniform(self) -> int | None:
        """The common extension count, or None when it varies."""
        counts = set(self.extension_counts)
        return counts.pop() if len(counts) == 1 else None

    @property
    def is_copy(self) -> bool:
        return self.uniform == 1


def validate_stage_link(prev: Stage, nxt: Stage) -> LinkDiagnostics:
    """Check that ``nxt``'s parent map is total and onto ``prev``."""
    if nxt.t != prev.t + 1:
        raise StageMismatchError(f"stage {nxt.t} does not follow stage {prev.t}")
    if nxt.parents is None:
        raise InvalidLinkError(f"stage {nxt.t} has no parent map")
    bad = [p for p in nxt.parents if p >= prev.n]
    if bad:
        raise InvalidLinkError(f"stage {nxt.t} refers to parents {sorted(set(bad))} outside stage {prev.t}")
    counts = [0] * prev.n
    for p in nxt.parents:
        counts[p] += 1
    orphans = tuple(i for i, c in enumerate(counts) if c == 0)
    if orphans:
        names = ", ".join(prev.labels[i] for i in orphans)
        raise InvalidLinkError(f"stage {prev.t} histories without extension: {names}", orphans)
    return LinkDiagnostics(nxt.t, tuple(counts))


class StageSequence(Sequence[Stage]):
    """Consecutive stages 0..T with validated links."""

    def __init__(self, stages: Sequence[Stage]):
        stages = tuple(stages)
        if not stages:
            raise ValueError("a stage sequence needs at least stage 0")
        for i, s in enumerate(stages):
            if s.t != i:
                raise ValueError(f"stage at position {i} has index {s.t}")
        self.links = tuple(validate_stage_link(a, b) for a, b in zip(stages, stages[1:]))
        self._stages = stages

    def __getitem__(self, t):
        return self._stages[t]

    def __len__(self) -> int:
        return len(self._stages)

    @property
    def final(self) -> int:
        return len(self._stages) - 1

    def truncated(self, T: int) -> "StageSequence":
        return StageSequence(self._stages[: T + 1])


# ---- operations on Event objects ------------------------------------------


def _need_predecessor(stage_t: Stage) -> None:
    if stage_t.t == 0 or stage_t.parents is None:
        raise NoPredecessorError("stage 0 has no predecessor")


def restrict_history(stage_t: Stage, h: int) -> int:
    """Index at stage t-1 of history ``h``'s past."""
    _need_predecessor(stage_t)
    if not 0 <= h < stage_t.n:
        raise IndexError(f"history {h} out of range for {stage_t!r}")
    return stage_t.parents[h]


def extend_event(E: Event, stage_t: Stage) -> Event:
    """The physically equivalent event one stage later (preimage of the parent map)."""
    _need_predecessor(stage_t)
    if E.stage != stage_t.t - 1:
        raise StageMismatchError(f"event of stage {E.stage} cannot extend to stage {stage_t.t}")
    return Event(stage_t.t, stage_t.n, stage_t.extend_mask(E.bits))


def restrict_event(E: Event, stage_t: Stage, prev_n: int | None = None) -> Event:
    """Image of ``E`` under the parent map."""
    _need_predecessor(stage_t)
    if E.stage != stage_t.t:
        raise StageMismatchError(f"event of stage {E.stage} does not live at stage {stage_t.t}")
    if prev_n is None:
        prev_n = len(stage_t.children)
    return Event(stage_t.t - 1, prev_n, stage_t.restrict_mask(E.bits))


def event_algebra(A: Event, B: Event | None, op: str) -> Event:
    if op == "add":
        return A + B
    if op == "mul":
        return A * B
    if op == "complement":
        return ~A
    raise ValueError(f"unknown event operation {op!r}")
