import random

import pytest

from coevent.coevents import CoEvent, restrict_coevent
from coevent.errors import SchemeMisuseError, WalkTerminated
from coevent.measure import DecoherenceMatrix
from coevent.oracle import brute_force_scheme_step, coevent_table
from coevent.schemes import (
    WalkPolicy,
    classical_successors,
    run,
    run_exhaustive,
    run_walk,
    scheme_name,
    step_basic,
    step_global,
    step_max_affirmative,
    step_state,
)
from coevent.stages import StageSequence
from coevent.systems import System

from conftest import random_system


def tables(cs):
    return {coevent_table(p) for p in cs}


def test_walker_stage_one(walker):
    state = step_state(step_state(None, walker.seq[0], walker.matrices[0], "basic"), walker.seq[1], walker.matrices[1], "basic")
    assert state.count == 6
    assert all(p.is_classical for p in state.coevents)


def test_walker_prolongation_choices(walker):
    s2, s3 = walker.seq[2], walker.seq[3]
    prev = CoEvent.classical(2, s2.n, s2.index("0→1→2"))
    allowed = step_basic(prev, s3, walker.matrices[3])
    assert [p.render(s3) for p in allowed] == ["0→1→2→1*", "0→1→2→2*"]
    assert CoEvent.classical(3, s3.n, s3.index("0→1→2→0")) not in allowed
    assert CoEvent.classical(3, s3.n, s3.index("0→1→0→1")) not in allowed


def test_classical_scheme_matches_basic(walker):
    small = walker.truncate(2)
    for scheme in ("basic", "max_affirmative", "global_minimal"):
        got = run_exhaustive(small, scheme)
        ref = run_exhaustive(small, "classical")
        assert [{p.key for p in s.coevents} for s in got.states] == [{p.key for p in s.coevents} for s in ref.states]


def test_classical_scheme_rejects_interference(hopper2):
    with pytest.raises(SchemeMisuseError):
        classical_successors(CoEvent.classical(1, 4, 0), hopper2.seq[2], hopper2.matrices[2])
    # the first two hopper stages happen to be diagonal
    assert run_exhaustive(hopper2.truncate(1), "classical").counts == [1, 2]


def test_hopper_basic_states(hopper2):
    result = run_exhaustive(hopper2.truncate(2), "basic")
    assert result.counts == [1, 2, 18]
    s1 = hopper2.seq[1]
    assert [p.render(s1) for p in result.states[1].coevents] == ["0→0*", "0→1*"]
    from_00 = [b for b in result.states[2].branches if b.parent == 0]
    assert sorted((b.support.bit_count(), b.count) for b in from_00) == [(1, 1), (3, 8)]


def test_hopper_other_schemes(hopper2):
    small = hopper2.truncate(2)
    assert run_exhaustive(small, "max_affirmative").counts == [1, 2, 4]
    glob = run_exhaustive(small, "global_minimal")
    assert glob.counts == [1, 2, 2]
    s2 = hopper2.seq[2]
    assert [p.render(s2) for p in glob.states[2].coevents] == ["0→0→0*", "0→1→0*"]


def test_max_affirmative_is_a_subset():
    rng = random.Random(5)
    for _ in range(30):
        stages, mats = random_system(rng, (2, 4))
        for prev in [CoEvent.from_monomials(0, 2, [m]) for m in (1, 2, 3)]:
            if any(mats[0].is_null_mask(e) and prev(e) for e in range(4)):
                continue
            basic = tables(step_basic(prev, stages[1], mats[1]))
            maxaff = step_max_affirmative(prev, stages[1], mats[1])
            assert tables(maxaff) <= basic
            assert len(maxaff) == len({p.support_mask for p in maxaff})


def _oracle_global(prev_coevents, stage, d):
    pooled = {}
    for i, phi in enumerate(prev_coevents):
        for p in brute_force_scheme_step(phi, stage, d, "precprol").coevents:
            pooled[coevent_table(p)] = p.support_mask
    supports = set(pooled.values())
    keep = {s for s in supports if not any(o != s and o & ~s == 0 for o in supports)}
    return {t for t, s in pooled.items() if s in keep}


def test_global_matches_oracle():
    rng = random.Random(9)
    for _ in range(40):
        stages, mats = random_system(rng, (rng.randint(1, 3), 4))
        state0 = step_global(None, stages[0], mats[0])
        if state0.count > 64:
            continue
        state1 = step_global(state0, stages[1], mats[1])
        assert tables(state1.coevents) == _oracle_global(state0.coevents, stages[1], mats[1])


def test_copied_stage_is_identity(hopper2):
    copied = hopper2.truncate(2).with_copied_stage(1)
    assert copied.seq.links[1].is_copy
    for scheme in ("basic", "global_minimal"):
        res = run_exhaustive(copied, scheme, 2)
        before, after = res.states[1], res.states[2]
        assert after.count == before.count
        assert all(b.parent is not None and b.count == 1 for b in after.branches)
        for b in after.branches:
            (phi,) = b.candidate.coevents()
            assert phi.key == before.coevents[b.parent].key


def test_classical_first_walk(walker):
    transcript = run_walk(walker, "classical", WalkPolicy("first"), 3)
    seq = transcript.sequence
    assert len(seq) == 4 and all(p.is_classical for p in seq)
    for t in range(1, 4):
        assert restrict_coevent(seq[t], walker.seq[t]) == seq[t - 1]


def test_seeded_walks_are_reproducible(hopper2):
    a = run_walk(hopper2, "max_affirmative", WalkPolicy("seeded_random", seed=4), 3)
    b = run_walk(hopper2, "max_affirmative", WalkPolicy("seeded_random", seed=4), 3)
    assert a.choices == b.choices and a.sequence == b.sequence
    replayed = run_walk(hopper2, "max_affirmative", WalkPolicy.replay(a.choices), 3)
    assert replayed.sequence == a.sequence


def test_global_walk_follows_lineage(hopper2):
    transcript = run_walk(hopper2.truncate(2), "global", WalkPolicy.replay([0, 1, 0]))
    assert [p.render(hopper2.seq[t]) for t, p in enumerate(transcript.sequence)] == ["0*", "0→1*", "0→1→0*"]


def test_walk_terminates_on_dead_end():
    from coevent.stages import Stage

    s0 = Stage(0, ["a", "b"])
    s1 = Stage(1, ["a'", "b'"], [0, 1])
    mats = [DecoherenceMatrix(0, [[0.5, 0], [0, 0.5]]), DecoherenceMatrix(1, [[0.5, 0], [0, 0.5]])]
    system = System(StageSequence([s0, s1]), mats)
    assert run_walk(system, "classical", WalkPolicy("first")).choices == [0, 0]
    bad = System(StageSequence([s0, s1]), [mats[0], DecoherenceMatrix(1, [[0, 0], [0, 1.0]])])
    with pytest.raises(WalkTerminated) as info:
        run_walk(bad, "classical", WalkPolicy("first"))
    assert info.value.stage == 1 and info.value.transcript.choices == [0]


def test_scheme_names():
    assert scheme_name("maxaff") == "max_affirmative"
    with pytest.raises(ValueError):
        scheme_name("quantum")
    with pytest.raises(ValueError):
        WalkPolicy("interactive")


def test_run_dispatch(walker):
    assert run(walker.truncate(1), "basic").counts == [3, 6]
    assert len(run(walker.truncate(1), "basic", policy=WalkPolicy()).steps) == 2
