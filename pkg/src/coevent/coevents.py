"""Co-events as GF(2) polynomials in the classical co-events.

A co-event is stored in its unique polynomial normal form: a set of monomial
events ``E``, each standing for ``E* = prod_{g in E} g*``. ``E*(A) = 1`` iff
``A`` contains ``E``, and the monomial ``0`` is the constant ``1``. Evaluation
is the parity of the monomials contained in the argument.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .bits import iter_bits, popcount, submasks
from .errors import BudgetExceededError, NoPredecessorError, StageMismatchError
from .stages import Event, Stage

MAX_TABLE_BITS = 20


def _as_mask(A, stage: int, n: int) -> int:
    if isinstance(A, Event):
        if A.stage != stage or A.n != n:
            raise StageMismatchError(f"event of stage {A.stage} given to a stage-{stage} co-event")
        return A.bits
    return int(A)


def _xor_set(items: Iterable[int]) -> frozenset[int]:
    out: set[int] = set()
    for m in items:
        if m in out:
            out.remove(m)
        else:
            out.add(m)
    return frozenset(out)


@dataclass(frozen=True)
class CoEvent:
    stage: int
    n: int
    monomials: frozenset[int] = frozenset()

    @classmethod
    def zero(cls, stage: int, n: int) -> "CoEvent":
        return cls(stage, n, frozenset())

    @classmethod
    def one(cls, stage: int, n: int) -> "CoEvent":
        return cls(stage, n, frozenset({0}))

    @classmethod
    def classical(cls, stage: int, n: int, history: int) -> "CoEvent":
        return cls(stage, n, frozenset({1 << history}))

    @classmethod
    def monomial(cls, E: Event) -> "CoEvent":
        return cls(E.stage, E.n, frozenset({E.bits}))

    @classmethod
    def from_monomials(cls, stage: int, n: int, monomials: Iterable[int]) -> "CoEvent":
        """Sum of monomials with mod-2 cancellation of repeats."""
        return cls(stage, n, _xor_set(monomials))

    @classmethod
    def parse(cls, stage: Stage, terms: Sequence[Sequence[str]]) -> "CoEvent":
        """Build from monomials written as lists of history labels."""
        return cls.from_monomials(stage.t, stage.n, (stage.event(term).bits for term in terms))

    def _check(self, other: "CoEvent") -> None:
        if not isinstance(other, CoEvent):
            raise TypeError(f"expected CoEvent, got {type(other).__name__}")
        if other.stage != self.stage or other.n != self.n:
            raise StageMismatchError(f"co-events of stages {self.stage} and {other.stage} do not combine")

    def __call__(self, A) -> int:
        a = _as_mask(A, self.stage, self.n)
        return sum(1 for m in self.monomials if m & ~a == 0) & 1

    def __add__(self, other: "CoEvent") -> "CoEvent":
        self._check(other)
        return CoEvent(self.stage, self.n, self.monomials ^ other.monomials)

    def __mul__(self, other: "CoEvent") -> "CoEvent":
        self._check(other)
        return CoEvent.from_monomials(self.stage, self.n, (a | b for a in self.monomials for b in other.monomials))

    def __bool__(self) -> bool:
        return bool(self.monomials)

    @property
    def key(self) -> tuple[int, ...]:
        """Deterministic sort key: monomial masks in ascending order."""
        return tuple(sorted(self.monomials))

    def __lt__(self, other: "CoEvent") -> bool:
        return (self.stage, self.key) < (other.stage, other.key)

    @property
    def support_mask(self) -> int:
        s = 0
        for m in self.monomials:
            s |= m
        return s

    @property
    def is_classical(self) -> bool:
        return len(self.monomials) == 1 and popcount(next(iter(self.monomials))) == 1

    def render(self, labels: Sequence[str] | Stage) -> str:
        if isinstance(labels, Stage):
            labels = labels.labels
        if not self.monomials:
            return "0"
        parts = []
        for m in self.key:
            if m == 0:
                parts.append("1")
            else:
                parts.append("·".join(f"{labels[i]}*" for i in iter_bits(m)))
        return " + ".join(parts)

    def __repr__(self) -> str:
        body = self.render([f"h{i}" for i in range(self.n)])
        return f"CoEvent(t={self.stage}, {body})"


# ---- operations ------------------------------------------------------------


def evaluate(phi: CoEvent, A: Event) -> int:
    return phi(A)


def coevent_ring(phi1: CoEvent, phi2: CoEvent, op: str) -> CoEvent:
    if op == "add":
        return phi1 + phi2
    if op == "mul":
        return phi1 * phi2
    raise ValueError(f"unknown co-event operation {op!r}")


def _difference_mask(phi: CoEvent, X: int) -> CoEvent:
    # dE*/dA = (E+A)* when E contains A, else 0; distinct E stay distinct
    return CoEvent(phi.stage, phi.n, frozenset(m ^ X for m in phi.monomials if m & X == X))


def partial_difference(phi: CoEvent, X: Event | int) -> CoEvent:
    """Boolean difference with respect to every history of ``X`` in turn."""
    return _difference_mask(phi, _as_mask(X, phi.stage, phi.n))


def support(phi: CoEvent) -> Event:
    return Event(phi.stage, phi.n, phi.support_mask)


def restrict_coevent(phi: CoEvent, stage_t: Stage) -> CoEvent:
    """Co-event at t-1 given by ``E -> phi(T+(E))``; monomial-wise ``E* -> (E|-)*``."""
    if stage_t.t == 0 or stage_t.parents is None:
        raise NoPredecessorError("cannot restrict a stage-0 co-event")
    if phi.stage != stage_t.t or phi.n != stage_t.n:
        raise StageMismatchError(f"co-event of stage {phi.stage} restricted through stage {stage_t.t}")
    prev_n = len(stage_t.children)
    return CoEvent.from_monomials(stage_t.t - 1, prev_n, (stage_t.restrict_mask(m) for m in phi.monomials))


def truth_table(phi: CoEvent) -> list[int]:
    """phi(E) for every event mask E = 0 .. 2^n - 1."""
    if phi.n > MAX_TABLE_BITS:
        raise BudgetExceededError(f"truth table over {phi.n} histories exceeds 2^{MAX_TABLE_BITS}")
    size = 1 << phi.n
    coeffs = [0] * size
    for m in phi.monomials:
        coeffs[m] = 1
    return _mobius(coeffs, phi.n)


def _mobius(values: list[int], n: int) -> list[int]:
    """Subset-sum transform over GF(2); it is its own inverse."""
    f = list(values)
    for i in range(n):
        bit = 1 << i
        for m in range(len(f)):
            if m & bit:
                f[m] ^= f[m ^ bit]
    return f


def from_truth_table(table: Sequence[int], stage: int, n: int) -> CoEvent:
    if len(table) != 1 << n:
        raise ValueError("truth table length must be 2^n")
    coeffs = _mobius([int(v) & 1 for v in table], n)
    return CoEvent(stage, n, frozenset(m for m, c in enumerate(coeffs) if c))


def dual(phi: CoEvent) -> CoEvent:
    """The co-event whose value on E is the X=0 coefficient of E*; an involution."""
    if phi.n > MAX_TABLE_BITS:
        raise BudgetExceededError(f"dual over {phi.n} histories exceeds 2^{MAX_TABLE_BITS}")
    table = [0] * (1 << phi.n)
    for m in phi.monomials:
        table[m] = 1
    return from_truth_table(table, phi.stage, phi.n)


def expand_around(phi: CoEvent, X: Event | int, include_zero: bool = False) -> list[tuple[int, Event]]:
    """Terms ``(d phi / d E)(X) * E*(. + X)`` of the expansion around ``X``.

    The coefficient of E is the parity of monomials M with ``M >= E`` and
    ``M - E <= X``; only nonzero terms are returned unless ``include_zero``.
    """
    x = _as_mask(X, phi.stage, phi.n)
    coeff: dict[int, int] = {}
    for m in phi.monomials:
        forced = m & ~x
        for sub in submasks(m & x):
            e = forced | sub
            coeff[e] = coeff.get(e, 0) ^ 1
    if include_zero:
        if phi.n > MAX_TABLE_BITS:
            raise BudgetExceededError("full expansion table too large")
        return [(coeff.get(e, 0), Event(phi.stage, phi.n, e)) for e in range(1 << phi.n)]
    return [(1, Event(phi.stage, phi.n, e)) for e in sorted(coeff) if coeff[e]]


def split_at_history(phi: CoEvent, history: int) -> tuple[CoEvent, CoEvent]:
    """(phi1, phi2) with phi = g* . phi1 + phi2 and neither depending on g."""
    bit = 1 << history
    with_g = [m ^ bit for m in phi.monomials if m & bit]
    without = [m for m in phi.monomials if not m & bit]
    return (
        CoEvent(phi.stage, phi.n, frozenset(with_g)),
        CoEvent(phi.stage, phi.n, frozenset(without)),
    )


@dataclass(frozen=True)
class ProlongationReport:
    """Decomposition of a candidate prolongation's monomials.

    ``direct[i]`` restricts to the i-th monomial of the earlier co-event,
    each ``pairs`` entry cancels under restriction, and ``leftover`` holds
    monomials that cannot be accounted for. ``missing`` lists earlier
    monomials with no direct partner.
    """

    direct: tuple[tuple[int, int], ...]
    pairs: tuple[tuple[int, int], ...]
    leftover: tuple[int, ...]
    missing: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.leftover and not self.missing


def check_prolongation_structure(phi_new: CoEvent, phi_prev: CoEvent, stage_t: Stage) -> ProlongationReport:
    if phi_new.stage != stage_t.t or phi_prev.stage != stage_t.t - 1:
        raise StageMismatchError("co-events must sit on consecutive stages")
    groups: dict[int, list[int]] = {}
    for m in sorted(phi_new.monomials):
        groups.setdefault(stage_t.restrict_mask(m), []).append(m)
    direct, pairs, leftover, missing = [], [], [], []
    for target in sorted(set(groups) | set(phi_prev.monomials)):
        members = groups.get(target, [])
        if target in phi_prev.monomials:
            if len(members) % 2 == 1:
                direct.append((members[0], target))
                members = members[1:]
            else:
                missing.append(target)
        elif len(members) % 2 == 1:
            leftover.append(members[-1])
            members = members[:-1]
        pairs.extend(zip(members[0::2], members[1::2]))
    return ProlongationReport(tuple(direct), tuple(pairs), tuple(leftover), tuple(missing))
