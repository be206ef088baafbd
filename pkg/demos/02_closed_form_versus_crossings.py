"""Closed-form index of the circular-orbit generator against the crossing count.

Each random generator ``A(a, b, c, d)`` has an index given by a short table
that depends on the signs of ``d`` and ``c d + b^2`` and on how many full
turns ``sqrt(-a d) T`` makes. The same number is recomputed here from
scratch by the crossing engine.

Run with ``python demos/02_closed_form_versus_crossings.py [samples] [seed]``.
"""

import sys
import time
from collections import Counter

from maslov_orbits.campaign import draw_samples, evaluate_sample, in_guard_band
from maslov_orbits.closed_form import classify_generator

samples = int(sys.argv[1]) if len(sys.argv) > 1 else 200
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 7

drawn = draw_samples(samples, seed)
kept = [s for s in drawn if not in_guard_band(s, 1e-6)]
start = time.perf_counter()
outcomes = [evaluate_sample(s) for s in kept]
elapsed = time.perf_counter() - start

by_case = Counter()
for o in outcomes:
    tag = classify_generator(o.sample.a, o.sample.b, o.sample.c, o.sample.d)
    by_case[(tag.d_sign.value, tag.subcase.value, o.agrees)] += 1

print(f"{len(kept)} of {len(drawn)} samples outside the guard band, checked in {elapsed:.1f} s")
for (d_sign, subcase, ok), count in sorted(by_case.items()):
    print(f"  d {d_sign:>8s}  {subcase:>12s}  {'agree' if ok else 'DISAGREE'}: {count}")

worst = [o for o in outcomes if not o.agrees]
print("all agree" if not worst else f"{len(worst)} disagreements, first: {worst[0]}")
