"""Decoherence matrices, the quantum measure and null events.

Null tests use the kernel criterion ``||d v_E|| <= tol * ||d||_F``. For a
positive semidefinite ``d`` this is equivalent to ``mu(E) == 0`` and is far
better conditioned near zero than the quadratic form itself.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .bits import deposit, gray, iter_bits, span
from .errors import BudgetExceededError, StageMismatchError
from .stages import Event, Stage

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ENUM = 20
BORDERLINE_FACTOR = 1e3


class DecoherenceMatrix:
    """Hermitian PSD matrix of pairwise history interference at one stage."""

    def __init__(self, t: int, matrix, tol: float = DEFAULT_TOL, max_enum: int = DEFAULT_MAX_ENUM):
        m = np.array(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("decoherence matrix must be square")
        if not np.all(np.isfinite(m)):
            raise ValueError("decoherence matrix has non-finite entries")
        m.setflags(write=False)
        self.t = t
        self.matrix = m
        self.n = m.shape[0]
        self.tol = tol
        self.max_enum = max_enum

    def __repr__(self) -> str:
        return f"DecoherenceMatrix(t={self.t}, n={self.n})"

    @cached_property
    def frobenius(self) -> float:
        return float(np.linalg.norm(self.matrix))

    @property
    def null_threshold(self) -> float:
        return self.tol * (self.frobenius if self.frobenius > 0 else 1.0)

    @cached_property
    def off_diagonal_norm(self) -> float:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return float(np.linalg.norm(off))

    @property
    def is_classical(self) -> bool:
        return self.off_diagonal_norm <= self.null_threshold

    def vector(self, bits: int) -> np.ndarray:
        v = np.zeros(self.n)
        for i in iter_bits(bits):
            v[i] = 1.0
        return v

    def kernel_residual(self, bits: int) -> float:
        idx = list(iter_bits(bits))
        if not idx:
            return 0.0
        return float(np.linalg.norm(self.matrix[:, idx].sum(axis=1)))

    def mu_mask(self, bits: int) -> float:
        idx = list(iter_bits(bits))
        if not idx:
            return 0.0
        val = float(self.matrix[np.ix_(idx, idx)].sum().real)
        return 0.0 if abs(val) <= self.null_threshold else val

    def is_null_mask(self, bits: int) -> bool:
        return self.kernel_residual(bits) <= self.null_threshold

    @cached_property
    def nulls(self) -> "NullStructure":
        return NullStructure.from_matrix(self)


def _check_stage(E: Event, d: DecoherenceMatrix) -> None:
    if E.stage != d.t or E.n != d.n:
        raise StageMismatchError(f"event of stage {E.stage} used with the stage-{d.t} measure")


def decoherence(A: Event, B: Event, d: DecoherenceMatrix) -> complex:
    """D(A, B) = v_A^dagger d v_B."""
    _check_stage(A, d)
    _check_stage(B, d)
    ia, ib = list(A), list(B)
    if not ia or not ib:
        return 0j
    return complex(d.matrix[np.ix_(ia, ib)].sum())


def mu(E: Event, d: DecoherenceMatrix) -> float:
    _check_stage(E, d)
    return d.mu_mask(E.bits)


def is_null_event(E: Event, d: DecoherenceMatrix) -> bool:
    _check_stage(E, d)
    return d.is_null_mask(E.bits)


def null_subsets(sub: np.ndarray, threshold: float, max_enum: int = DEFAULT_MAX_ENUM) -> list[int]:
    """Local masks E with ``||sub @ v_E|| <= threshold``, sorted ascending.

    Gray-code walk over the high bits; the low bits are handled as one
    precomputed table so each step is a single vectorised update.
    """
    m = sub.shape[0]
    if m > max_enum:
        raise BudgetExceededError(
            f"null enumeration over {m} histories exceeds the cap of {max_enum}"
        )
    if m == 0:
        return [0]
    k = min(m, 10)
    low = np.arange(1 << k)
    table = ((low[:, None] >> np.arange(k)) & 1).astype(np.float64)
    base = table @ sub[:, :k].T  # row i: d v for low mask i
    out: list[int] = []
    running = np.zeros(m, dtype=np.complex128)
    prev_g = 0
    for step in range(1 << (m - k)):
        g = gray(step)
        flipped = g ^ prev_g
        if flipped:
            col = k + flipped.bit_length() - 1
            if g & flipped:
                running = running + sub[:, col]
            else:
                running = running - sub[:, col]
        prev_g = g
        norms = np.linalg.norm(base + running, axis=1)
        for i in np.flatnonzero(norms <= threshold):
            out.append(int(i) | (g << k))
    out.sort()
    return out


def enumerate_null_events(d: DecoherenceMatrix, max_enum: int | None = None) -> list[Event]:
    """Every null event of the stage, the empty event included, sorted by mask."""
    cap = d.max_enum if max_enum is None else max_enum
    masks = null_subsets(d.matrix, d.null_threshold, cap)
    return [Event(d.t, d.n, b) for b in masks]


@dataclass(frozen=True)
class NullBlock:
    """One interference class of non-null histories and its null subsets."""

    mask: int
    nulls: tuple[int, ...]
    lookup: frozenset[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lookup", frozenset(self.nulls))


@dataclass(frozen=True)
class NullStructure:
    """Factorised description of all null events of one stage.

    A null history ``z`` satisfies ``d v_z = 0``, so adding or removing it never
    changes whether an event is null. The remaining histories split into
    interference classes (connected components of the nonzero off-diagonal
    pattern); because each diagonal block of a PSD matrix is PSD, an event is
    null exactly when its trace on every class is null. The full null family
    is therefore ``{Q + z}`` with ``Q`` a product of per-class null traces and
    ``z`` any set of null histories.
    """

    n: int
    null_histories: int
    blocks: tuple[NullBlock, ...]
    borderline: tuple[int, ...] = field(default_factory=tuple)

    @classmethod
    def from_matrix(cls, d: DecoherenceMatrix) -> "NullStructure":
        thr = d.null_threshold
        mat = d.matrix
        col_norms = np.linalg.norm(mat, axis=0)
        diag = np.real(np.diag(mat))
        null_idx = [i for i in range(d.n) if col_norms[i] <= thr]
        live = [i for i in range(d.n) if col_norms[i] > thr]
        borderline = tuple(i for i in live if diag[i] <= thr * BORDERLINE_FACTOR)

        parent = {i: i for i in live}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in itertools.combinations(live, 2):
            if abs(mat[a, b]) > thr:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        groups: dict[int, list[int]] = {}
        for i in live:
            groups.setdefault(find(i), []).append(i)

        blocks = []
        for members in sorted(groups.values()):
            if len(members) == 1:
                blocks.append(NullBlock(1 << members[0], (0,)))
                continue
            sub = mat[np.ix_(members, members)]
            local = null_subsets(sub, thr, d.max_enum)
            blocks.append(NullBlock(sum(1 << i for i in members), tuple(deposit(x, members) for x in local)))
        z = sum(1 << i for i in null_idx)
        return cls(d.n, z, tuple(blocks), borderline)

    @property
    def live(self) -> int:
        return ((1 << self.n) - 1) & ~self.null_histories

    @property
    def interfering_blocks(self) -> tuple[NullBlock, ...]:
        return tuple(b for b in self.blocks if len(b.nulls) > 1)

    @property
    def reduced_count(self) -> int:
        total = 1
        for b in self.blocks:
            total *= len(b.nulls)
        return total

    def iter_reduced(self) -> Iterator[int]:
        """Null events that contain no null history."""
        active = [b.nulls for b in self.interfering_blocks]
        for combo in itertools.product(*active):
            q = 0
            for part in combo:
                q |= part
            yield q

    def contains(self, bits: int) -> bool:
        for b in self.blocks:
            if bits & b.mask not in b.lookup:
                return False
        return True

    def traces_on(self, S: int) -> set[int]:
        """Distinct traces ``P * S`` over every null event ``P``."""
        traces = {0}
        for b in self.blocks:
            if not b.mask & S:
                continue
            local = {q & S for q in b.nulls}
            if local == {0}:
                continue
            traces = {x | y for x in traces for y in local}
        free = [1 << i for i in iter_bits(self.null_histories & S)]
        return {x ^ y for x in traces for y in span(free)}

    def iter_all(self, max_enum: int = DEFAULT_MAX_ENUM) -> Iterator[int]:
        """Every null event. Budgeted: the null histories contribute 2^|Z|."""
        zbits = list(iter_bits(self.null_histories))
        if len(zbits) > max_enum:
            raise BudgetExceededError(f"{len(zbits)} null histories exceed the enumeration cap {max_enum}")
        for q in self.iter_reduced():
            for k in range(1 << len(zbits)):
                yield q | deposit(k, zbits)


# ---- validation ------------------------------------------------------------


@dataclass
class StageMeasureReport:
    t: int
    n: int
    hermiticity: float
    min_eigenvalue: float
    normalization: float
    consistency: float | None
    off_diagonal_norm: float
    classical: bool
    null_histories: int
    borderline: tuple[int, ...] = ()


@dataclass
class MeasureDiagnostics:
    stages: list[StageMeasureReport]
    tol: float = DEFAULT_TOL

    def violations(self) -> dict[str, float]:
        """Worst violation per check across all stages."""
        out = {"hermiticity": 0.0, "psd": 0.0, "normalization": 0.0, "consistency": 0.0}
        for r in self.stages:
            out["hermiticity"] = max(out["hermiticity"], r.hermiticity)
            out["psd"] = max(out["psd"], -r.min_eigenvalue)
            out["normalization"] = max(out["normalization"], r.normalization)
            if r.consistency is not None:
                out["consistency"] = max(out["consistency"], r.consistency)
        return out

    def failures(self) -> list[tuple[int, str, float]]:
        bad = []
        for r in self.stages:
            if r.hermiticity > self.tol:
                bad.append((r.t, "hermiticity", r.hermiticity))
            if r.min_eigenvalue < -self.tol:
                bad.append((r.t, "psd", -r.min_eigenvalue))
            if r.normalization > self.tol:
                bad.append((r.t, "normalization", r.normalization))
            if r.consistency is not None and r.consistency > self.tol:
                bad.append((r.t, "consistency", r.consistency))
        return bad

    @property
    def ok(self) -> bool:
        return not self.failures()

    @property
    def classical(self) -> bool:
        return all(r.classical for r in self.stages)


def coarse_grain(stage_t: Stage, fine: np.ndarray, prev_n: int) -> np.ndarray:
    """Sum a stage-t matrix over extensions, giving the implied stage t-1 matrix."""
    M = np.zeros((prev_n, stage_t.n))
    for j, p in enumerate(stage_t.parents):
        M[p, j] = 1.0
    return M @ fine @ M.T


def validate_measure(
    stages: Sequence[Stage], matrices: Sequence[DecoherenceMatrix], tol: float = DEFAULT_TOL
) -> MeasureDiagnostics:
    """Hermiticity, PSD, normalisation and stage consistency, as max violations."""
    if len(stages) != len(matrices):
        raise ValueError("need exactly one matrix per stage")
    reports = []
    for k, (st, d) in enumerate(zip(stages, matrices)):
        if d.n != st.n or d.t != st.t:
            raise StageMismatchError(f"matrix for stage {d.t} (n={d.n}) attached to stage {st.t} (n={st.n})")
        m = d.matrix
        herm = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        eig = float(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2)))
        norm = float(abs(m.sum() - 1.0))
        cons = None
        if k > 0:
            implied = coarse_grain(st, m, stages[k - 1].n)
            cons = float(np.max(np.abs(matrices[k - 1].matrix - implied)))
        try:
            ns = d.nulls
        except BudgetExceededError:
            ns = None
        reports.append(
            StageMeasureReport(
                t=st.t,
                n=st.n,
                hermiticity=herm,
                min_eigenvalue=eig,
                normalization=norm,
                consistency=cons,
                off_diagonal_norm=d.off_diagonal_norm,
                classical=d.is_classical,
                null_histories=bin(ns.null_histories).count("1") if ns else -1,
                borderline=ns.borderline if ns else (),
            )
        )
    return MeasureDiagnostics(reports, tol)

