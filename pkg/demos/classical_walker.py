"""A three-site walker has a classical measure, so every scheme reduces
to picking one non-null path at a time."""

from coevent.schemes import WalkPolicy, run_exhaustive, run_walk
from coevent.systems import SystemSpec, build

walker = build(SystemSpec.walker(), 4)
reference = run_exhaustive(walker, "classical")
print("classical counts:", reference.counts)

for scheme in ("basic", "max_affirmative", "global_minimal"):
    result = run_exhaustive(walker, scheme)
    same = all(
        {p.key for p in a.coevents} == {p.key for p in b.coevents}
        for a, b in zip(result.states, reference.states)
    )
    print(f"{scheme:>16}: {result.counts}  identical to classical: {same}")

walk = run_walk(walker, "basic", WalkPolicy("seeded_random", seed=12))
print("\none seeded walk:", " , ".join(p.render(walker.seq[t]) for t, p in enumerate(walk.sequence)))
print("replay with choices", ",".join(map(str, walk.choices)))
