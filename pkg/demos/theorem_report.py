"""Run the theorem checks on the hopper up to stage 3.

Stage 3 of the basic scheme allows about 5e30 co-events, spread over a
few dozen supports. The checks work per support and sample co-events
within each one.
"""

import time

from coevent.oracle import check_theorems
from coevent.schemes import run_exhaustive
from coevent.systems import SystemSpec, build

hopper = build(SystemSpec.hopper(2), 3)
for scheme in ("basic", "max_affirmative", "global_minimal"):
    start = time.perf_counter()
    result = run_exhaustive(hopper, scheme)
    report = check_theorems(result)
    print(f"{scheme}: counts {[f'{c:.3g}' if c > 1e6 else c for c in result.counts]}  ({time.perf_counter() - start:.1f}s)")
    print(report.to_text())
    print()
