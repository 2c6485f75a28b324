import pytest
from hypothesis import given
from hypothesis import strategies as st

from coevent.errors import InvalidLinkError, NoPredecessorError, StageMismatchError
from coevent.stages import Event, Stage, StageSequence, extend_event, restrict_event, restrict_history, validate_stage_link

from conftest import events


def test_hopper_restriction(hopper2):
    s1, s2 = hopper2.seq[1], hopper2.seq[2]
    assert s1.labels[restrict_history(s2, s2.index("1→0→1"))] == "1→0"


def test_five_site_restriction():
    from coevent.systems import SystemSpec, build

    sys5 = build(SystemSpec.hopper(5, preset="dft", psi0=[0, 1, 0, 0, 0]), 2)
    s1, s2 = sys5.seq[1], sys5.seq[2]
    assert s1.labels[restrict_history(s2, s2.index("1→4→3"))] == "1→4"


def test_walker_restriction(walker):
    s3 = walker.seq[3]
    assert walker.seq[2].labels[restrict_history(s3, s3.index("2→2→1→0"))] == "2→2→1"


def test_extension_examples(hopper2):
    s0, s1, s2 = hopper2.seq[0], hopper2.seq[1], hopper2.seq[2]
    assert extend_event(s0.empty(), s1).bits == 0
    assert s1.labels_of(extend_event(s0.event(["0"]), s1).bits) == ["0→0", "0→1"]
    # "site 0 at time 0" stays the same physical event one stage later
    started0 = s1.event([l for l in s1.labels if l.startswith("0")])
    assert s2.labels_of(extend_event(started0, s2).bits) == [l for l in s2.labels if l.startswith("0")]


def test_restriction_examples(hopper2):
    s1, s2 = hopper2.seq[1], hopper2.seq[2]
    assert restrict_event(s1.event(["0→0", "1→1"]), s1).bits == 0b11
    # anchored at the final time, every past is still possible
    ends0 = s2.event([l for l in s2.labels if l.endswith("0")])
    assert restrict_event(ends0, s2).bits == s1.full


@given(events(5), events(5), events(5))
def test_event_ring_laws(a, b, c):
    assert a + a == Event(0, 5, 0)
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * a == a
    assert ~a == Event(0, 5, 0b11111) + a
    assert (a * b <= a) and (a <= a + b + a * b)


@given(st.integers(0, 7), st.integers(0, 7))
def test_extension_is_a_ring_map(x, y):
    s1 = Stage(1, list("abcdef"), [0, 0, 1, 2, 2, 2])
    X, Y = Event(0, 3, x), Event(0, 3, y)
    ext = lambda E: extend_event(E, s1)
    assert ext(X + Y) == ext(X) + ext(Y)
    assert ext(X * Y) == ext(X) * ext(Y)
    assert restrict_event(ext(X), s1) == X


def test_mismatched_stages_rejected():
    with pytest.raises(StageMismatchError):
        Event(0, 2, 1) + Event(1, 2, 1)
    with pytest.raises(NoPredecessorError):
        restrict_history(Stage(0, ["a"]), 0)


def test_link_validation():
    s0 = Stage(0, ["a", "b"])
    with pytest.raises(InvalidLinkError) as info:
        validate_stage_link(s0, Stage(1, ["x", "y"], [0, 0]))
    assert info.value.orphans == (1,)
    with pytest.raises(InvalidLinkError):
        validate_stage_link(s0, Stage(1, ["x"], [2]))
    link = validate_stage_link(s0, Stage(1, ["x", "y"], [1, 0]))
    assert link.is_copy


def test_uniform_branching(hopper2, walker):
    assert all(link.uniform == 2 for link in hopper2.seq.links)
    assert all(link.uniform == 3 for link in walker.seq.links)


def test_sequence_indices():
    with pytest.raises(ValueError):
        StageSequence([Stage(1, ["a"], [0])])
    with pytest.raises(ValueError):
        Stage(0, ["a", "a"])
