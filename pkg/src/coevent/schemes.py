"""Evolving co-event schemes over a stage sequence.

Four schemes are supported. ``classical`` allows the classical co-events
of non-null extensions. ``basic`` allows every minimally supported
preclusive prolongation of each allowed previous co-event.
``max_affirmative`` keeps one co-event per minimal support, the one with
every free trace affirmed. ``global_minimal`` applies the support
minimality filter across the prolongations of all previous co-events at once.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

from .bits import iter_bits
from .coevents import CoEvent
from .errors import BudgetExceededError, SchemeMisuseError, WalkTerminated
from .measure import DecoherenceMatrix
from .solver import DEFAULT_BUDGET, INITIAL, Budget, SupportCandidate, minimal_prolongations
from .stages import Stage

SCHEMES = ("classical", "basic", "max_affirmative", "global_minimal")
ALIASES = {"maxaff": "max_affirmative", "global": "global_minimal"}


def scheme_name(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in SCHEMES:
        raise ValueError(f"unknown scheme {name!r}; choose from {', '.join(SCHEMES)}")
    return name


@dataclass(frozen=True)
class Branch:
    """The co-events on one minimal support, prolonging predecessor ``parent``."""

    parent: int | None
    candidate: SupportCandidate

    @property
    def support(self) -> int:
        return self.candidate.support.bits

    @property
    def count(self) -> int:
        return self.candidate.count


@dataclass(frozen=True)
class SchemeState:
    """Allowed co-events at one stage, grouped into branches.

    Branches are disjoint (a co-event determines both its restriction and
    its support), so counts add up. The flat, sorted co-event list is only
    built on demand and is subject to ``budget.max_coevents``.
    """

    t: int
    scheme: str
    branches: tuple[Branch, ...]
    dead_ends: tuple[int, ...] = ()
    budget: Budget = field(default=DEFAULT_BUDGET, repr=False, compare=False)

    @property
    def count(self) -> int:
        return sum(b.count for b in self.branches)

    @property
    def supports(self) -> list[int]:
        return sorted({b.support for b in self.branches})

    @cached_property
    def _flat(self) -> tuple[tuple[CoEvent, ...], tuple[tuple[int, ...], ...]]:
        if self.count > self.budget.max_coevents:
            raise BudgetExceededError(
                f"stage {self.t} allows {self.count} co-events, above the listing cap of {self.budget.max_coevents}"
            )
        pairs = []
        for b in self.branches:
            lin = () if b.parent is None else (b.parent,)
            pairs.extend((p, lin) for p in b.candidate.iter_coevents())
        pairs.sort(key=lambda x: x[0].key)
        return tuple(p for p, _ in pairs), tuple(lin for _, lin in pairs)

    @property
    def coevents(self) -> tuple[CoEvent, ...]:
        return self._flat[0]

    @property
    def lineage(self) -> tuple[tuple[int, ...], ...]:
        return self._flat[1]

    def index(self, phi: CoEvent) -> int:
        return self.coevents.index(phi)

    def successors_of(self, i: int) -> list[int]:
        return [j for j, lin in enumerate(self.lineage) if i in lin]


def _classical_candidate(stage_t: Stage, g: int) -> SupportCandidate:
    return SupportCandidate(stage_t.event([g]), (0, 1), ())


# ---- single steps ----------------------------------------------------------


def classical_successors(prev, stage_t: Stage, d: DecoherenceMatrix) -> list[CoEvent]:
    if not d.is_classical:
        raise SchemeMisuseError(
            f"the classical scheme needs a classical measure; stage {stage_t.t} has off-diagonal norm {d.off_diagonal_norm:.3g}"
        )
    if prev is INITIAL:
        pool = range(stage_t.n)
    else:
        if not prev.is_classical:
            raise SchemeMisuseError("the classical scheme only prolongs classical co-events")
        h = next(iter_bits(prev.support_mask))
        pool = iter_bits(stage_t.children[h])
    return [CoEvent.classical(stage_t.t, stage_t.n, g) for g in pool if not d.is_null_mask(1 << g)]


def _predecessors(prev: SchemeState | None) -> list[tuple[int | None, object]]:
    return [(None, INITIAL)] if prev is None else list(enumerate(prev.coevents))


def step_classical(prev: SchemeState | None, stage_t: Stage, d: DecoherenceMatrix, budget: Budget = DEFAULT_BUDGET) -> SchemeState:
    """Classical co-events of non-null histories extending an expressed history."""
    if prev is not None and prev.scheme != "classical":
        raise SchemeMisuseError(f"cannot continue a {prev.scheme} state with the classical scheme")
    branches = []
    for i, phi in _predecessors(prev):
        for psi in classical_successors(phi, stage_t, d):
            branches.append(Branch(i, _classical_candidate(stage_t, next(iter_bits(psi.support_mask)))))
    return SchemeState(stage_t.t, "classical", tuple(branches), (), budget)


def step_basic(prev, stage_t: Stage, d: DecoherenceMatrix, budget: Budget = DEFAULT_BUDGET) -> list[CoEvent]:
    """MinSupp of the preclusive prolongations of ``prev`` (``INITIAL`` at stage 0)."""
    cands = minimal_prolongations(prev, stage_t, d, "all", budget)
    return _listed(cands, budget)


def step_max_affirmative(prev, stage_t: Stage, d: DecoherenceMatrix, budget: Budget = DEFAULT_BUDGET) -> list[CoEvent]:
    cands = minimal_prolongations(prev, stage_t, d, "max_affirmative", budget)
    return _listed(cands, budget)


def _listed(cands: Sequence[SupportCandidate], budget: Budget) -> list[CoEvent]:
    total = sum(c.count for c in cands)
    if total > budget.max_coevents:
        raise BudgetExceededError(f"{total} candidate co-events exceed the listing cap of {budget.max_coevents}")
    return sorted((p for c in cands for p in c.iter_coevents()), key=lambda p: p.key)


def step_global(prev: SchemeState | None, stage_t: Stage, d: DecoherenceMatrix, budget: Budget = DEFAULT_BUDGET) -> SchemeState:
    """One MinSupp over the union of every predecessor's preclusive prolongations.

    Only per-predecessor minimal supports can survive, so those are pooled
    and any support strictly containing another pooled support is dropped.
    """
    if prev is not None and prev.scheme != "global_minimal":
        raise SchemeMisuseError(f"cannot continue a {prev.scheme} state with the global scheme")
    preds = _predecessors(prev)
    pooled = [Branch(i, c) for i, phi in preds for c in minimal_prolongations(phi, stage_t, d, "all", budget)]
    supports = {b.support for b in pooled}
    kept = [b for b in pooled if not any(o != b.support and o & ~b.support == 0 for o in supports)]
    alive = {b.parent for b in kept}
    dead = tuple(i for i, _ in preds if i is not None and i not in alive)
    return SchemeState(stage_t.t, "global_minimal", tuple(kept), dead, budget)


def step_state(prev: SchemeState | None, stage_t: Stage, d: DecoherenceMatrix, scheme: str, budget: Budget = DEFAULT_BUDGET) -> SchemeState:
    scheme = scheme_name(scheme)
    if scheme == "classical":
        return step_classical(prev, stage_t, d, budget)
    if scheme == "global_minimal":
        return step_global(prev, stage_t, d, budget)
    if prev is not None and prev.scheme != scheme:
        raise SchemeMisuseError(f"cannot continue a {prev.scheme} state with the {scheme} scheme")
    mode = "all" if scheme == "basic" else "max_affirmative"
    branches, dead = [], []
    for i, phi in _predecessors(prev):
        cands = minimal_prolongations(phi, stage_t, d, mode, budget)
        if not cands and i is not None:
            dead.append(i)
        branches.extend(Branch(i, c) for c in cands)
    return SchemeState(stage_t.t, scheme, tuple(branches), tuple(dead), budget)


# ---- driver ----------------------------------------------------------------


@dataclass
class WalkPolicy:
    """How a walk picks the expressed co-event among the allowed ones.

    ``interactive`` delegates to ``chooser(t, candidates) -> index``.
    """

    kind: str = "first"
    seed: int = 0
    chooser: Callable[[int, Sequence[CoEvent]], int] | None = None

    def __post_init__(self):
        if self.kind not in ("first", "seeded_random", "interactive"):
            raise ValueError(f"unknown walk policy {self.kind!r}")
        if self.kind == "interactive" and self.chooser is None:
            raise ValueError("an interactive policy needs a chooser")

    @classmethod
    def replay(cls, choices: Sequence[int]) -> "WalkPolicy":
        it = iter(choices)
        return cls("interactive", chooser=lambda t, cands: next(it))

    def start(self) -> Callable[[int, Sequence[CoEvent]], int]:
        if self.kind == "first":
            return lambda t, cands: 0
        if self.kind == "seeded_random":
            rng = random.Random(self.seed)
            return lambda t, cands: rng.randrange(len(cands))
        return self.chooser


@dataclass(frozen=True)
class WalkStep:
    t: int
    candidates: tuple[CoEvent, ...]
    choice: int

    @property
    def chosen(self) -> CoEvent:
        return self.candidates[self.choice]


@dataclass
class Transcript:
    scheme: str
    policy: str
    steps: list[WalkStep] = field(default_factory=list)

    @property
    def choices(self) -> list[int]:
        return [s.choice for s in self.steps]

    @property
    def sequence(self) -> list[CoEvent]:
        return [s.chosen for s in self.steps]


@dataclass
class RunResult:
    system: object
    scheme: str
    states: list[SchemeState]

    @property
    def counts(self) -> list[int]:
        return [s.count for s in self.states]


def run_exhaustive(system, scheme: str, T: int | None = None, budget: Budget = DEFAULT_BUDGET) -> RunResult:
    scheme = scheme_name(scheme)
    T = system.T if T is None else T
    states: list[SchemeState] = []
    prev = None
    for t in range(T + 1):
        prev = step_state(prev, system.seq[t], system.matrices[t], scheme, budget)
        states.append(prev)
    return RunResult(system, scheme, states)


def run_walk(system, scheme: str, policy: WalkPolicy, T: int | None = None, budget: Budget = DEFAULT_BUDGET) -> Transcript:
    """One expressible sequence, chosen stage by stage by ``policy``.

    The global scheme's allowed set depends on every previously allowed
    co-event, so its full states are carried along; the other schemes only
    prolong the co-event actually chosen.
    """
    scheme = scheme_name(scheme)
    T = system.T if T is None else T
    choose = policy.start()
    transcript = Transcript(scheme, policy.kind)
    state = None
    current = INITIAL
    current_index = None
    for t in range(T + 1):
        stage, d = system.seq[t], system.matrices[t]
        if scheme == "global_minimal":
            state = step_global(state, stage, d, budget)
            idx = range(len(state.coevents)) if current_index is None else state.successors_of(current_index)
            cands = [state.coevents[j] for j in idx]
            positions = list(idx)
        elif scheme == "classical":
            cands = sorted(classical_successors(current, stage, d), key=lambda p: p.key)
        elif scheme == "basic":
            cands = step_basic(current, stage, d, budget)
        else:
            cands = step_max_affirmative(current, stage, d, budget)
        if not cands:
            err = WalkTerminated(t)
            err.transcript = transcript
            raise err
        k = int(choose(t, cands))
        if not 0 <= k < len(cands):
            raise IndexError(f"choice {k} out of range for {len(cands)} candidates at stage {t}")
        transcript.steps.append(WalkStep(t, tuple(cands), k))
        current = cands[k]
        if scheme == "global_minimal":
            current_index = positions[k]
    return transcript


def run(system, scheme: str, T: int | None = None, policy: WalkPolicy | None = None, budget: Budget = DEFAULT_BUDGET):
    """Exhaustive states when ``policy`` is None, otherwise a walk transcript."""
    if policy is None:
        return run_exhaustive(system, scheme, T, budget)
    return run_walk(system, scheme, policy, T, budget)
