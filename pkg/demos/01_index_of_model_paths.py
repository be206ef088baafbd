"""Index of a few planar symplectic paths, computed by counting crossings.

The generalized Conley-Zehnder index counts, with signs, the times at which
``gamma(t)`` has eigenvalue 1. Shears have eigenvalue 1 for every ``t``, so
the engine perturbs the path slightly and counts the crossings of the
perturbed path instead.

Run with ``python demos/01_index_of_model_paths.py``.
"""

import math

import numpy as np

from maslov_orbits import fundamental_solution, iota1
from maslov_orbits.maslov import crossing_form, zhu_index
from maslov_orbits.symplectic import GeneratorMatrix, standard_structure

J2 = standard_structure(1)
SHEAR = np.array([[0.0, 1.0], [0.0, 0.0]])

print("planar paths")
for label, A, T in [
    ("shear [[1, t], [0, 1]]", SHEAR, 3.0),
    ("shear [[1, -t], [0, 1]]", -SHEAR, 3.0),
    ("constant identity", np.zeros((2, 2)), 1.0),
    ("rotation, half turn", J2, math.pi),
    ("rotation, one turn", J2, 2 * math.pi),
    ("rotation, one and a half turns", J2, 3 * math.pi),
]:
    res = iota1(fundamental_solution(A, T))
    how = "raw crossings" if res.epsilon_used == 0 else f"perturbed by eps={res.epsilon_used:.1e}"
    print(f"  {label:34s} iota1 = {res.iota1:2d}   ({how})")

# A full turn of the rotation meets the identity at both ends; the crossing
# form there is the identity matrix, so each end counts with full weight.
m_plus, m_minus = crossing_form(fundamental_solution(J2, 2 * math.pi), 0.0)
print(f"\ncrossing form of the rotation at t = 0: {m_plus} positive, {m_minus} negative")

# For lower-block-triangular paths the index only depends on the end points.
print("\nnilpotent generators (d = 0): endpoint formula against crossing count")
for coeffs in [(1, 0, -1, 0), (1, 0, 1, 0), (1, 2, 1, 0)]:
    path = fundamental_solution(GeneratorMatrix(*coeffs), 2.0)
    print(f"  (a, b, c, d) = {coeffs}:  endpoint formula {zhu_index(path)},"
          f"  crossing count {iota1(path).clm}")
