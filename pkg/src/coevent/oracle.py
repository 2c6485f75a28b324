"""Brute-force references and executable theorem checks.

The brute-force routines work from definitions only: co-events are raw
truth tables over all ``2^N`` events, nulls come from the quadratic form,
supports from ``phi(E) != phi(E + g)``. They share nothing with the solver
beyond the stage and matrix containers.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bits import iter_bits, popcount, span
from .coevents import CoEvent, check_prolongation_structure, dual, expand_around, from_truth_table, restrict_coevent
from .errors import OracleScaleError
from .measure import DecoherenceMatrix
from .schemes import RunResult, SchemeState, step_classical
from .solver import INITIAL
from .stages import Stage

ORACLE_MAX_N = 4
NULL_SCAN_MAX_N = 16


# ---- brute force -----------------------------------------------------------


def brute_force_mu(d: DecoherenceMatrix) -> np.ndarray:
    """mu(E) for every event mask E, straight from the quadratic form."""
    if d.n > NULL_SCAN_MAX_N:
        raise OracleScaleError(f"measure scan over {d.n} histories exceeds {NULL_SCAN_MAX_N}")
    events = np.arange(1 << d.n)
    V = ((events[:, None] >> np.arange(d.n)) & 1).astype(np.float64)
    return np.einsum("ei,ij,ej->e", V, d.matrix, V).real


def brute_force_null_masks(d: DecoherenceMatrix) -> list[int]:
    mu = brute_force_mu(d)
    return [int(e) for e in np.flatnonzero(np.abs(mu) <= d.null_threshold)]


def _parity_eval(monomials: Iterable[int], event: int) -> int:
    return sum(1 for m in monomials if m & event == m) & 1


def _extension(parents: Sequence[int], prev_event: int) -> int:
    return sum(1 << j for j, p in enumerate(parents) if prev_event >> p & 1)


def coevent_table(phi: CoEvent) -> tuple[int, ...]:
    """Truth table by direct parity evaluation (no transform involved)."""
    return tuple(_parity_eval(phi.monomials, e) for e in range(1 << phi.n))


@dataclass
class OracleStep:
    stage: int
    n: int
    tables: list[tuple[int, ...]]

    @property
    def table_set(self) -> set[tuple[int, ...]]:
        return set(self.tables)

    @property
    def coevents(self) -> list[CoEvent]:
        return sorted((from_truth_table(t, self.stage, self.n) for t in self.tables), key=lambda p: p.key)


def brute_force_scheme_step(prev, stage_t: Stage, d: DecoherenceMatrix, which: str = "minsupp_precprol") -> OracleStep:
    """Filter all ``2^(2^N)`` co-events by preclusion and prolongation of ``prev``."""
    if which not in ("precprol", "minsupp_precprol"):
        raise ValueError(f"unknown oracle filter {which!r}")
    N = stage_t.n
    if N > ORACLE_MAX_N:
        raise OracleScaleError(f"oracle enumeration over {N} histories exceeds the hard cap of {ORACLE_MAX_N}")
    M = 1 << N
    tables = np.arange(1 << M, dtype=np.uint32)
    keep = np.ones(tables.shape, dtype=bool)

    def bit(e: int) -> np.ndarray:
        return (tables >> np.uint32(e)) & np.uint32(1)

    for e in brute_force_null_masks(d):
        keep &= bit(e) == 0
    if prev is INITIAL:
        keep &= bit(M - 1) == 1
    else:
        prev_n = prev.n
        for e_prev in range(1 << prev_n):
            keep &= bit(_extension(stage_t.parents, e_prev)) == _parity_eval(prev.monomials, e_prev)
    survivors = tables[keep]
    if which == "minsupp_precprol" and survivors.size:
        supp = np.zeros(survivors.shape, dtype=np.uint32)
        for g in range(N):
            depends = np.zeros(survivors.shape, dtype=bool)
            for e in range(M):
                depends |= ((survivors >> np.uint32(e)) & 1) != ((survivors >> np.uint32(e ^ (1 << g))) & 1)
            supp |= depends.astype(np.uint32) << np.uint32(g)
        distinct = set(int(s) for s in supp)
        minimal = {s for s in distinct if not any(o != s and o & ~s == 0 for o in distinct)}
        survivors = survivors[np.isin(supp, list(minimal))]
    out = [tuple(int(x) >> e & 1 for e in range(M)) for x in survivors]
    return OracleStep(stage_t.t, N, out)


def brute_force_differences(prev, stage_t: Stage, d: DecoherenceMatrix, max_n: int = 12) -> list[int]:
    """Minimal ``A + D`` over explicitly listed affirm and deny events."""
    if stage_t.n > max_n:
        raise OracleScaleError(f"explicit pair enumeration over {stage_t.n} histories exceeds {max_n}")
    nulls = brute_force_null_masks(d)
    if prev is INITIAL:
        affirm, deny = [(1 << stage_t.n) - 1], list(nulls)
    else:
        affirm, deny = [], list(nulls)
        for e in range(1 << prev.n):
            (affirm if _parity_eval(prev.monomials, e) else deny).append(_extension(stage_t.parents, e))
    diffs = {a ^ x for a in affirm for x in deny}
    return sorted(s for s in diffs if not any(o != s and o & ~s == 0 for o in diffs))


def brute_force_transversals(edges: Sequence[int], n: int) -> list[int]:
    """Minimal hitting sets by scanning every subset of ``n`` vertices."""
    if n > 20:
        raise OracleScaleError("transversal scan limited to 20 vertices")
    hits = [S for S in range(1 << n) if all(S & e for e in edges)]
    hitset = set(hits)
    return [S for S in hits if not any((S & ~(1 << g)) in hitset for g in iter_bits(S))]


# ---- random inputs ---------------------------------------------------------


def random_preclusive_coevent(rng: random.Random, stage: int, d: DecoherenceMatrix) -> CoEvent:
    """A uniformly random truth table with every null event forced to 0."""
    table = [rng.randrange(2) for _ in range(1 << d.n)]
    for e in brute_force_null_masks(d):
        table[e] = 0
    return from_truth_table(table, stage, d.n)


def random_consistent_measures(rng: random.Random, stages: Sequence[Stage], rank: int = 2, sparsity: float = 0.5) -> list[np.ndarray]:
    """Consistent, normalised PSD matrices with exact nulls.

    The final matrix is ``B B^T`` for a small integer ``B``; earlier ones are
    its coarse grainings, so consistency holds by construction.
    """
    top = stages[-1]
    while True:
        B = np.array([[rng.choice((-1, 0, 1)) if rng.random() > sparsity else 0 for _ in range(rank)] for _ in range(top.n)], dtype=float)
        fine = B @ B.T
        total = fine.sum()
        if total > 0.5:
            break
    mats = [fine / total]
    for k in range(len(stages) - 1, 0, -1):
        st = stages[k]
        M = np.zeros((stages[k - 1].n, st.n))
        for j, p in enumerate(st.parents):
            M[p, j] = 1.0
        mats.append(M @ mats[-1] @ M.T)
    return mats[::-1]


# ---- theorem suite ---------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    t: int
    passed: bool
    examined: int = 0
    total: int = 0
    skipped: bool = False
    note: str = ""
    counterexample: str | None = None


@dataclass
class TheoremReport:
    scheme: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> CheckResult | None:
        return next((c for c in self.checks if not c.passed), None)

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "ok": self.ok, "checks": [asdict(c) for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    def to_text(self) -> str:
        lines = [f"theorem checks for scheme {self.scheme}: {'PASS' if self.ok else 'FAIL'}"]
        for c in self.checks:
            status = "skip" if c.skipped else ("pass" if c.passed else "FAIL")
            line = f"  t={c.t:<2} {c.name:<20} {status:<4} examined {c.examined}/{c.total}"
            if c.note:
                line += f"  ({c.note})"
            if c.counterexample:
                line += f"\n        counterexample: {c.counterexample}"
            lines.append(line)
        return "\n".join(lines)


def _examined(state: SchemeState, per_branch: int, rng: random.Random):
    """(parent, co-event) pairs: every co-event of small branches, samples of large ones."""
    sampled = False
    for b in state.branches:
        c = b.candidate
        if c.count <= per_branch:
            for phi in c.iter_coevents():
                yield b.parent, phi
        else:
            sampled = True
            f = len(c.free)
            picks = {0, (1 << f) - 1} | {rng.getrandbits(f) for _ in range(per_branch - 2)}
            for k in sorted(picks):
                yield b.parent, c.coevent(k)
    if sampled:
        yield None, None


def _diag_nulls(d: DecoherenceMatrix) -> int:
    diag = np.real(np.diag(d.matrix))
    return sum(1 << i for i in range(d.n) if diag[i] <= d.null_threshold)


def _null_traces(S: int, d: DecoherenceMatrix, cache: dict) -> set[int]:
    key = (id(d), S)
    if key not in cache:
        if d.n <= ORACLE_MAX_N:
            cache[key] = {e & S for e in brute_force_null_masks(d)}
        else:
            cache[key] = d.nulls.traces_on(S)
    return cache[key]


def no_new_preclusions(stage_t: Stage, d_prev: DecoherenceMatrix, d_t: DecoherenceMatrix) -> bool:
    """Does every null at t equal an extended earlier null, up to null histories?"""
    live = d_t.nulls.live
    ext = lambda bits: stage_t.extend_mask(bits) & live  # noqa: E731
    shifts = span(ext(1 << z) for z in iter_bits(d_prev.nulls.null_histories))
    targets = {ext(q) ^ w for q in d_prev.nulls.iter_reduced() for w in shifts}
    return all(q in targets for q in d_t.nulls.iter_reduced())


def emap_substitutions(phi: CoEvent, stage_t: Stage, d_t: DecoherenceMatrix, limit: int = 1 << 16) -> set[CoEvent] | None:
    """All ``phi`` with each support history replaced by one non-null extension."""
    S = list(iter_bits(phi.support_mask))
    options = [[g for g in iter_bits(stage_t.children[h]) if not d_t.is_null_mask(1 << g)] for h in S]
    total = 1
    for o in options:
        total *= len(o)
    if total > limit:
        return None
    out = set()
    for choice in itertools.product(*options):
        e = dict(zip(S, choice))
        monos = [sum(1 << e[h] for h in iter_bits(m)) for m in phi.monomials]
        out.add(CoEvent.from_monomials(stage_t.t, stage_t.n, monos))
    return out


def check_theorems(run: RunResult, per_branch: int = 16, seed: int = 0, event_samples: int = 64) -> TheoremReport:
    """Every theorem-level property, stage by stage, on a completed exhaustive run."""
    rng = random.Random(seed)
    trace_cache: dict = {}
    system = run.system
    report = TheoremReport(run.scheme)
    classical_state = None
    classical_ok = True
    for k, state in enumerate(run.states):
        t = state.t
        stage, d = system.seq[t], system.matrices[t]
        prev_state = run.states[k - 1] if k > 0 else None
        add = report.checks.append

        pairs = list(_examined(state, per_branch, rng))
        sampled = bool(pairs) and pairs[-1] == (None, None)
        if sampled:
            pairs.pop()
        note = "sampled within large branches" if sampled else ""
        events = (
            list(range(1 << stage.n))
            if stage.n <= 8
            else [rng.getrandbits(stage.n) for _ in range(event_samples)] + [0, stage.full]
        )

        # null histories never enter a support
        zh = _diag_nulls(d)
        bad = [b for b in state.branches if b.support & zh]
        add(CheckResult("null_exclusion", t, not bad, len(state.branches), len(state.branches),
                        note="checked per support",
                        counterexample=None if not bad else
                        f"support {stage.labels_of(bad[0].support)} contains null {stage.labels_of(bad[0].support & zh)}"))

        # each support history is witnessed by a null event
        cex = None
        for _, phi in pairs:
            S = phi.support_mask
            traces = _null_traces(S, d, trace_cache)
            for g in iter_bits(S):
                if not any(phi(q) != phi(q ^ (1 << g)) for q in traces):
                    cex = f"{phi.render(stage)}: no null witness for {stage.labels[g]}"
                    break
            if cex:
                break
        add(CheckResult("null_witness", t, cex is None, len(pairs), state.count, note=note, counterexample=cex))

        # phi only sees traces on its support
        cex = None
        for _, phi in pairs:
            S = phi.support_mask
            for e in events:
                if phi(e) != phi(e & S):
                    cex = f"{phi.render(stage)} differs on {stage.labels_of(e)} and its trace"
                    break
            if cex:
                break
        add(CheckResult("support_separation", t, cex is None, len(pairs), state.count, note=note, counterexample=cex))

        # expansion around a random event, and duality
        cex = None
        for _, phi in pairs:
            X = rng.getrandbits(stage.n)
            terms = expand_around(phi, X)
            for e in events:
                recon = sum(1 for _, E in terms if E.bits & ~(e ^ X) == 0) & 1
                if recon != phi(e):
                    cex = f"{phi.render(stage)} around {stage.labels_of(X)} fails on {stage.labels_of(e)}"
                    break
            if cex is None and stage.n <= 8 and dual(dual(phi)) != phi:
                cex = f"dual is not an involution on {phi.render(stage)}"
            if cex:
                break
        add(CheckResult("expansion_duality", t, cex is None, len(pairs), state.count, note=note, counterexample=cex))

        # soundness: preclusive and restricts to its recorded parent
        cex = None
        for parent, phi in pairs:
            if any(phi(q) for q in _null_traces(phi.support_mask, d, trace_cache)):
                cex = f"{phi.render(stage)} affirms a null event"
            elif t == 0:
                if phi(stage.full) != 1:
                    cex = f"{phi.render(stage)} denies Omega"
            elif restrict_coevent(phi, stage) != prev_state.coevents[parent]:
                cex = f"{phi.render(stage)} does not restrict to its parent"
            if cex:
                break
        add(CheckResult("soundness", t, cex is None, len(pairs), state.count, note=note, counterexample=cex))

        # classical measure: same sets as the classical scheme
        classical_ok = classical_ok and d.is_classical
        if run.scheme != "classical" and classical_ok:
            classical_state = step_classical(classical_state, stage, d)
            same = state.count == classical_state.count and set(state.coevents) == set(classical_state.coevents)
            add(CheckResult("classical_reduction", t, same, state.count, classical_state.count,
                            counterexample=None if same else f"{state.count} vs {classical_state.count} co-events"))

        if t == 0:
            continue
        prev_stage = system.seq[t - 1]
        parents = prev_state.coevents

        # prolongation structure
        cex = None
        for parent, phi in pairs:
            rep = check_prolongation_structure(phi, parents[parent], stage)
            if not rep.ok:
                cex = f"{phi.render(stage)}: leftover {rep.leftover}, missing {rep.missing}"
                break
        add(CheckResult("prolongation_structure", t, cex is None, len(pairs), state.count, note=note, counterexample=cex))

        # support never shrinks along lineage
        bad = [b for b in state.branches if popcount(b.support) < popcount(parents[b.parent].support_mask)]
        add(CheckResult("monotone_support", t, not bad, len(state.branches), len(state.branches),
                        counterexample=None if not bad else f"support {stage.labels_of(bad[0].support)} shrank"))

        # copied stage: each co-event continues unchanged
        if system.seq.links[t - 1].is_copy:
            cex = None
            child = {p: j for j, p in enumerate(stage.parents)}
            for i, phi in enumerate(parents):
                mine = [b for b in state.branches if b.parent == i]
                expected = CoEvent.from_monomials(t, stage.n, (sum(1 << child[h] for h in iter_bits(m)) for m in phi.monomials))
                got = [p for b in mine for p in b.candidate.iter_coevents()] if sum(b.count for b in mine) <= per_branch else None
                if got != [expected]:
                    cex = f"{phi.render(prev_stage)} continues as {len(mine)} branch(es) instead of a copy"
                    break
            add(CheckResult("copied_stage", t, cex is None, len(parents), len(parents), counterexample=cex))

        # no new preclusions: exactly the e-map substitutions
        if run.scheme != "classical" and no_new_preclusions(stage, system.matrices[t - 1], d):
            cex, skipped, checked = None, False, 0
            for i, phi in enumerate(parents):
                expected = emap_substitutions(phi, stage, d)
                mine = [b for b in state.branches if b.parent == i]
                if expected is None or sum(b.count for b in mine) > (1 << 16):
                    skipped = True
                    continue
                got = {p for b in mine for p in b.candidate.iter_coevents()}
                checked += 1
                ok = got == expected if run.scheme == "basic" else got <= expected
                if not ok:
                    cex = f"from {phi.render(prev_stage)}: {len(got)} co-events vs {len(expected)} substitutions"
                    break
            add(CheckResult("no_new_preclusions", t, cex is None, checked, len(parents), skipped=skipped and checked == 0,
                            note="equality" if run.scheme == "basic" else "containment", counterexample=cex))

    return report


def engine_matches_oracle(prev, stage_t: Stage, d: DecoherenceMatrix, engine: Sequence[CoEvent]) -> bool:
    return {coevent_table(p) for p in engine} == brute_force_scheme_step(prev, stage_t, d).table_set
