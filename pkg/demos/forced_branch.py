"""Two-site hopper: which stage-2 co-events can follow (0→0)*?

The paths 0→0→1 and 0→1→1 carry amplitudes +1/2 and -1/2 into the same
endpoint, so the event containing both has measure zero. Any preclusive
co-event must deny it, and this script shows what that does to the
prolongations of (0→0)* under each scheme.
"""

from coevent import CoEvent, INITIAL, mu, step_basic, step_max_affirmative
from coevent.schemes import run_exhaustive
from coevent.systems import SystemSpec, build

system = build(SystemSpec.hopper(2), 2)
s1, s2 = system.seq[1], system.seq[2]
d2 = system.matrices[2]

cancel = s2.event(["0→0→1", "0→1→1"])
print(f"mu({{0→0→1, 0→1→1}}) = {mu(cancel, d2):.3g}")
print(f"mu({{0→0→0}})        = {mu(s2.event(['0→0→0']), d2):.3g}")

stage0 = step_basic(INITIAL, system.seq[0], system.matrices[0])
print("\nstage 0:", [p.render(system.seq[0]) for p in stage0])
print("stage 1:", [p.render(s1) for p in step_basic(stage0[0], s1, system.matrices[1])])

prev = CoEvent.classical(1, s1.n, s1.index("0→0"))
basic = step_basic(prev, s2, d2)
print(f"\nbasic scheme, successors of (0→0)*: {len(basic)}")
for phi in basic:
    print("   ", phi.render(s2))

print("\nmax-affirmative, one per support:")
for phi in step_max_affirmative(prev, s2, d2):
    print("   ", phi.render(s2))

glob = run_exhaustive(system, "global_minimal")
print("\nglobal minimal scheme, stage 2:", [p.render(s2) for p in glob.states[2].coevents])
