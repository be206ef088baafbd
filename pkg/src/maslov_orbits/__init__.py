"""Maslov-type indices and circular-orbit stability on constant-curvature surfaces.

The package computes the generalized Conley-Zehnder index of the linearised
flow around circular orbits of power-law central forces on the sphere, the
hyperbolic plane and the Euclidean plane, both from a closed-form table and
from a numerical crossing count, and corroborates the stability verdicts by
direct integration.
"""

from .closed_form import CaseTag, Sign, Subcase, classify_generator, compute_k, closed_form_iota1, theorem1_iota1
from .dynamics import (
    ELState,
    FloquetResult,
    Trajectory,
    circular_state,
    floquet,
    integrate_el,
    monodromy,
    radial_geodesic,
)
from .errors import (
    DegenerateCrossingError,
    DomainError,
    EpsilonExhaustedError,
    EscapedDomainError,
    InvalidArgument,
)
from .maslov import (
    Crossing,
    IndexResult,
    SymplecticPath,
    clm_index,
    crossing_form,
    detect_crossings,
    fundamental_solution,
    iota1,
    zhu_index,
)
from .surface import (
    CircularOrbit,
    ModelPoint,
    RegionLabel,
    StabilityVerdict,
    SurfaceKind,
    boundary_curves,
    orbit_data,
    region_classify,
    riemann_distance,
    stability_verdict,
)
from .symplectic import (
    GeneratorMatrix,
    diamond_product,
    eigen_structure,
    is_symplectic,
    matrix_exponential,
    omega_product,
    standard_structure,
)

__version__ = "0.1.0"
