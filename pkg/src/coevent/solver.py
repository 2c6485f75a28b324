"""Preclusive prolongations as a hitting-set problem.

A co-event with support ``S`` can be a preclusive prolongation exactly when
``S`` meets every ``A + D`` with ``A`` affirmed and ``D`` denied, so the
minimal supports are the minimal transversals of that difference family.

The families are never listed extensionally. The previous co-event only
sees traces on its own support ``S'``, so an affirmed event is
``T+(a) + T+(k)`` with ``a`` an affirmed trace on ``S'`` and ``k`` any set
of previous histories outside ``S'``. Null events factor through
:class:`~coevent.measure.NullStructure`. Both facts let the minimal
differences be generated directly from those small pieces.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from .bits import deposit, extract, iter_bits, minimal_sets, popcount, span
from .coevents import CoEvent, _mobius
from .errors import (
    BudgetExceededError,
    InconsistentConstraintsError,
    InvalidSupportError,
    StageMismatchError,
)
from .measure import DecoherenceMatrix, NullStructure
from .stages import Event, Stage


class _Initial:
    """Stand-in for the previous co-event at stage 0.

    Stage 0 is treated as the extension of a single virtual history ``r``
    with previous co-event ``r*``: affirming ``T+(r)`` means affirming Omega_0.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INITIAL"


INITIAL = _Initial()


@dataclass(frozen=True)
class Budget:
    """Caps on every exponential enumeration in the solver.

    ``max_histories`` bounds the width of any subset enumeration (supports,
    previous supports, interference classes); ``max_pairs`` bounds the number
    of raw differences generated; ``max_coevents`` bounds synthesis output.
    """

    max_histories: int = 20
    max_pairs: int = 1 << 26
    max_coevents: int = 1 << 16

    def check_width(self, width: int, what: str) -> None:
        if width > self.max_histories:
            raise BudgetExceededError(f"{what} spans {width} histories, above the cap of {self.max_histories}")


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True)
class EventFamily:
    """The events ``seed + sum(subset of free)``, for each seed.

    Seeds are extensions of previous traces and ``free`` holds the child sets
    of previous histories the previous co-event does not depend on.
    """

    n: int
    seeds: tuple[int, ...]
    free: tuple[int, ...]

    def traces_on(self, S: int) -> set[int]:
        base = {s & S for s in self.seeds}
        extra = span(c & S for c in self.free)
        return {b ^ e for b in base for e in extra}

    def members(self, limit: int = 1 << 20) -> list[int]:
        count = len(self.seeds) << len(self.free)
        if count > limit:
            raise BudgetExceededError(f"listing {count} events exceeds the limit {limit}")
        out = set()
        for s in self.seeds:
            for k in range(1 << len(self.free)):
                e = s
                for i in iter_bits(k):
                    e ^= self.free[i]
                out.add(e)
        return sorted(out)


@dataclass(frozen=True)
class ConstraintFamily:
    stage: int
    n: int
    affirm: EventFamily
    deny: EventFamily
    nulls: NullStructure
    differences: tuple[int, ...]

    def affirm_events(self, limit: int = 1 << 20) -> list[Event]:
        return [Event(self.stage, self.n, b) for b in self.affirm.members(limit)]

    def deny_events(self, limit: int = 1 << 20) -> list[Event]:
        prol = set(self.deny.members(limit))
        prol.update(self.nulls.iter_all())
        return [Event(self.stage, self.n, b) for b in sorted(prol)]

    @property
    def difference_events(self) -> list[Event]:
        return [Event(self.stage, self.n, b) for b in self.differences]


@dataclass(frozen=True)
class SupportCandidate:
    """All preclusive prolongations on one minimal support, kept implicit.

    ``table`` is the local truth table over subsets of the support (bit ``j``
    of a local index is the ``j``-th support history) with ``-1`` on free
    traces. Assignment ``k`` sets the ``j``-th free trace to bit ``j`` of ``k``.
    """

    support: Event
    table: tuple[int, ...]
    free: tuple[int, ...]
    mode: str = "all"

    @property
    def count(self) -> int:
        return 1 if self.mode == "max_affirmative" else 1 << len(self.free)

    def coevent(self, k: int) -> CoEvent:
        sbits = list(iter_bits(self.support.bits))
        values = list(self.table)
        for j, i in enumerate(self.free):
            values[i] = (k >> j) & 1
        coeffs = _mobius(values, len(sbits))
        monos = frozenset(deposit(m, sbits) for m, c in enumerate(coeffs) if c)
        phi = CoEvent(self.support.stage, self.support.n, monos)
        if phi.support_mask != self.support.bits:
            raise InvalidSupportError("support is not minimal: a synthesized co-event depends on fewer histories")
        return phi

    def max_affirmative(self) -> CoEvent:
        return self.coevent((1 << len(self.free)) - 1)

    def iter_coevents(self):
        if self.mode == "max_affirmative":
            yield self.max_affirmative()
            return
        for k in range(1 << len(self.free)):
            yield self.coevent(k)

    def coevents(self, budget: "Budget | None" = None) -> tuple[CoEvent, ...]:
        cap = (budget or DEFAULT_BUDGET).max_coevents
        if self.count > cap:
            raise BudgetExceededError(f"{len(self.free)} free traces give more than {cap} co-events")
        return tuple(sorted(self.iter_coevents(), key=lambda p: p.key))


def _prev_view(prev, stage_t: Stage) -> tuple[tuple[int, ...], list[int], list[int], list[int]]:
    """(children, support bits, affirmed traces, denied traces) at the previous stage."""
    if prev is INITIAL:
        if stage_t.t != 0:
            raise StageMismatchError("INITIAL only precedes stage 0")
        return (stage_t.full,), [0], [1], [0]
    if not isinstance(prev, CoEvent):
        raise TypeError(f"expected a CoEvent or INITIAL, got {type(prev).__name__}")
    if stage_t.t == 0:
        raise StageMismatchError("stage 0 co-events have no predecessor; use INITIAL")
    children = stage_t.children
    if prev.stage != stage_t.t - 1 or prev.n != len(children):
        raise StageMismatchError(f"co-event of stage {prev.stage} cannot precede stage {stage_t.t}")
    sbits = list(iter_bits(prev.support_mask))
    return children, sbits, [], []


def build_constraints(
    prev,
    stage_t: Stage,
    measure: DecoherenceMatrix | NullStructure,
    budget: Budget = DEFAULT_BUDGET,
) -> ConstraintFamily:
    """Minimal difference family for preclusive prolongations of ``prev``."""
    nulls = measure.nulls if isinstance(measure, DecoherenceMatrix) else measure
    if nulls.n != stage_t.n:
        raise StageMismatchError(f"null structure over {nulls.n} histories given for {stage_t!r}")
    children, sbits, alpha, delta = _prev_view(prev, stage_t)
    if prev is not INITIAL:
        budget.check_width(len(sbits), "previous support")
        for k in range(1 << len(sbits)):
            trace = deposit(k, sbits)
            (alpha if prev(trace) else delta).append(trace)

    def ext(bits: int) -> int:
        out = 0
        for h in iter_bits(bits):
            out |= children[h]
        return out

    in_support = set(sbits)
    outside = [h for h in range(len(children)) if h not in in_support]
    affirm = EventFamily(stage_t.n, tuple(ext(a) for a in alpha), tuple(children[h] for h in outside))
    deny = EventFamily(stage_t.n, tuple(ext(d) for d in delta), affirm.free)

    pairs = len(alpha) * len(delta)
    if pairs > budget.max_pairs:
        raise BudgetExceededError(f"{pairs} prolongation pairs exceed the budget {budget.max_pairs}")
    raw = [ext(x) for x in minimal_sets(a ^ d for a in alpha for d in delta)]

    live = nulls.live
    ext_support = ext(sum(1 << h for h in sbits))
    groups = [g for g in (children[h] & live for h in outside) if g]
    for b in nulls.interfering_blocks:
        budget.check_width(popcount(b.mask), "interference class")
    for Q in nulls.iter_reduced():
        options = []
        for g in groups:
            q = Q & g
            if q and q != g:
                options.append((q, g ^ q))
        combos = len(alpha) << len(options)
        pairs += combos
        if pairs > budget.max_pairs:
            raise BudgetExceededError(f"difference generation exceeds the pair budget {budget.max_pairs}")
        q_in = Q & ext_support
        outs = [sum(c) for c in itertools.product(*options)] if options else [0]
        for a in alpha:
            head = (ext(a) & live) ^ q_in
            raw.extend(head | o for o in outs)

    if any(x == 0 for x in raw):
        raise InconsistentConstraintsError(
            f"an event affirmed at stage {stage_t.t} is also denied; the previous co-event is not preclusive"
        )
    return ConstraintFamily(stage_t.t, stage_t.n, affirm, deny, nulls, tuple(minimal_sets(raw)))


def is_valid_support(S: Event | int, fam: ConstraintFamily) -> bool:
    s = S.bits if isinstance(S, Event) else int(S)
    return all(s & T for T in fam.differences)


def minimal_transversals(edges: Iterable[int]) -> list[int]:
    """All inclusion-minimal hitting sets of a family of non-empty masks.

    Depth-first search: branch on the vertices of the uncovered edge with
    the fewest available vertices, most frequent vertex first. Vertices tried
    in earlier sibling branches are excluded from later ones, which makes
    each transversal reachable along exactly one path; a partial solution
    is dropped as soon as one of its vertices loses every private edge.
    """
    edges = minimal_sets(edges)
    if not edges:
        return [0]
    if any(e == 0 for e in edges):
        return []
    freq: dict[int, int] = {}
    for e in edges:
        for v in iter_bits(e):
            freq[v] = freq.get(v, 0) + 1

    found: list[int] = []

    def critical_ok(S: int) -> bool:
        for u in iter_bits(S):
            ub = 1 << u
            if not any(e & S == ub for e in edges):
                return False
        return True

    def search(S: int, uncovered: list[int], banned: int) -> None:
        if not uncovered:
            found.append(S)
            return
        best = min(uncovered, key=lambda e: (popcount(e & ~banned), e))
        cand = best & ~banned
        if not cand:
            return
        order = sorted(iter_bits(cand), key=lambda v: (-freq[v], v))
        for v in order:
            vb = 1 << v
            nxt = S | vb
            if critical_ok(nxt):
                search(nxt, [e for e in uncovered if not e & vb], banned)
            banned |= vb

    search(0, edges, 0)
    result = sorted(set(found))
    return [S for S in result if critical_ok(S)]


def enumerate_minimal_supports(fam: ConstraintFamily) -> list[Event]:
    return [Event(fam.stage, fam.n, s) for s in minimal_transversals(fam.differences)]


def forced_traces(S: int, fam: ConstraintFamily) -> tuple[set[int], set[int]]:
    """Traces on ``S`` of affirmed and of denied events."""
    affirmed = fam.affirm.traces_on(S)
    denied = fam.deny.traces_on(S) | fam.nulls.traces_on(S)
    return affirmed, denied


def support_candidate(S: Event | int, fam: ConstraintFamily, mode: str = "all", budget: Budget = DEFAULT_BUDGET) -> SupportCandidate:
    """Forced and free traces on ``S``; nothing is enumerated yet."""
    if mode not in ("all", "max_affirmative"):
        raise ValueError(f"unknown synthesis mode {mode!r}")
    s = S.bits if isinstance(S, Event) else int(S)
    sbits = list(iter_bits(s))
    budget.check_width(len(sbits), "support")
    affirmed, denied = forced_traces(s, fam)
    clash = affirmed & denied
    if clash:
        raise InvalidSupportError(
            f"{len(clash)} trace(s) on the support are both affirmed and denied; it misses a difference"
        )
    table = [-1] * (1 << len(sbits))
    for x in affirmed:
        table[extract(x, sbits)] = 1
    for x in denied:
        table[extract(x, sbits)] = 0
    free = tuple(i for i, v in enumerate(table) if v < 0)
    return SupportCandidate(Event(fam.stage, fam.n, s), tuple(table), free, mode)


def synthesize_coevents(
    S: Event | int,
    fam: ConstraintFamily,
    mode: str = "all",
    budget: Budget = DEFAULT_BUDGET,
) -> list[CoEvent]:
    """Every preclusive prolongation supported on ``S`` (or the maximally affirmative one)."""
    return list(support_candidate(S, fam, mode, budget).coevents(budget))


def minimal_prolongations(
    prev,
    stage_t: Stage,
    d: DecoherenceMatrix,
    mode: str = "all",
    budget: Budget = DEFAULT_BUDGET,
) -> list[SupportCandidate]:
    """Minimal supports of preclusive prolongations of ``prev``, one candidate each."""
    fam = build_constraints(prev, stage_t, d, budget)
    return [support_candidate(S, fam, mode, budget) for S in enumerate_minimal_supports(fam)]
