"""Circular orbits in the time domain: conservation, period maps and growth.

The nonlinear equations of motion are integrated from circular initial
data; the radius should not move. The linearised period map then tells
whether nearby orbits drift away exponentially, polynomially or not at all.

Run with ``python demos/04_orbit_stability.py``.
"""

import numpy as np

from maslov_orbits import ModelPoint, orbit_data, region_classify
from maslov_orbits.dynamics import circular_state, floquet, integrate_el, monodromy, power_norms

POINTS = [
    ModelPoint("euclidean", 1.0, -1.0),    # the Kepler problem
    ModelPoint("euclidean", 1.0, -2.5),
    ModelPoint("sphere", 2.0, 1.0),
    ModelPoint("hyperbolic", 0.5, -1.0),
]

for p in POINTS:
    orbit = orbit_data(p)
    label = region_classify(p)
    tr = integrate_el(p.surface, p.alpha, circular_state(p), 3 * orbit.T, 3 * 2048)
    M = monodromy(orbit.generator, orbit.T)
    fl = floquet(M)
    norms = power_norms(M, 64)
    print(f"{p.surface.value:10s} xi={p.xi:<4g} alpha={p.alpha:<5g} index {label.index}  region {label.name}")
    print(f"    radial drift over 3 periods {tr.radial_drift(p.xi):.1e}, "
          f"angular momentum drift {tr.angular_momentum_drift:.1e}")
    print(f"    |multipliers| {np.round(np.abs(fl.multipliers), 6)}  -> {fl.tag.value}"
          f" (closed-form verdict {label.stability.value})")
    print(f"    |M^n| for n = 1, 8, 64: {norms[0]:.3g}, {norms[7]:.3g}, {norms[63]:.3g}")
