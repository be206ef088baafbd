import math

import numpy as np
import pytest
import scipy.optimize
import sympy as sp
from hypothesis import assume, given, strategies as st

from maslov_orbits.closed_form import closed_form_iota1
from maslov_orbits.dynamics import _rhs_factory, circular_state
from maslov_orbits.errors import DomainError, InvalidArgument
from maslov_orbits.maslov import fundamental_solution, iota1
from maslov_orbits.surface import (
    ModelPoint,
    StabilityVerdict,
    SurfaceKind,
    boundary_curves,
    conformal_factor,
    h_curve_asymptote,
    hyperbolic_band_edge,
    hyperbolic_g1,
    hyperbolic_g2,
    hyperbolic_g3,
    orbit_data,
    pipeline_coefficients,
    potential,
    region_classify,
    riemann_distance,
    riemann_distance_quadrature,
    sphere_f1,
    sphere_f2,
    sphere_f3,
    sphere_h,
    stability_verdict,
)


# ----- admissible point strategies ---------------------------------------- #

def sphere_outer():
    return st.tuples(st.just("sphere"), st.floats(1.05, 6), st.floats(0.1, 8))


def sphere_inner():
    return st.tuples(st.just("sphere"), st.floats(0.05, 0.95), st.floats(-8, -0.1))


def hyperbolic():
    return st.tuples(st.just("hyperbolic"), st.floats(0.05, 0.95), st.floats(-8, -0.1))


def euclidean():
    return st.tuples(st.just("euclidean"), st.floats(0.2, 5), st.floats(-3, -0.05))


any_point = st.one_of(sphere_outer(), sphere_inner(), hyperbolic(), euclidean())


def _point(args):
    return ModelPoint(SurfaceKind(args[0]), args[1], args[2])


# ----- profiles ----------------------------------------------------------- #

def test_profile_examples():
    assert conformal_factor("sphere", 1.0) == 0.5
    assert potential("sphere", 1.0, 2.0) == pytest.approx((math.pi / 4) ** 2)
    assert potential("hyperbolic", 0.5, -1.0) == pytest.approx(1 / math.log(3))
    assert all(conformal_factor("euclidean", x) == 1.0 for x in (0.1, 1.0, 30.0))


@pytest.mark.parametrize("surface,xi", [("hyperbolic", 1.0), ("hyperbolic", 1.5), ("sphere", 0.0), ("euclidean", -1.0)])
def test_profile_outside_domain(surface, xi):
    with pytest.raises(DomainError):
        conformal_factor(surface, xi)


def test_unknown_surface():
    with pytest.raises(InvalidArgument):
        conformal_factor("torus", 1.0)


_x, _al = sp.symbols("x alpha", positive=True)
SYMBOLIC = {
    "sphere": (2 / (1 + _x ** 2) ** 2, sp.atan(_x)),
    "hyperbolic": (2 / (1 - _x ** 2) ** 2, sp.log((1 + _x) / (1 - _x))),
    "euclidean": (sp.Integer(1), _x),
}


@given(any_point)
def test_pipeline_derivatives_against_symbolic_differentiation(args):
    surface, xi, alpha = args
    p, u = SYMBOLIC[surface]
    q = u ** alpha
    eta = p * _x ** 2
    subs = {_x: xi}
    dq = float(sp.diff(q, _x).subs(subs).evalf(30))
    deta = float(sp.diff(eta, _x).subs(subs).evalf(30))
    th2, (a, b, c, d), aux = pipeline_coefficients(surface, xi, alpha)
    assert th2 == pytest.approx(-2 * dq / deta, rel=1e-11)
    assert a == pytest.approx(1 / float(p.subs(subs)), rel=1e-12)
    assert c == pytest.approx(1 / float(eta.subs(subs)), rel=1e-12)


# ----- orbit data --------------------------------------------------------- #

def test_kepler_orbit_data():
    o = orbit_data(ModelPoint("euclidean", 1.0, -1.0))
    assert o.coeffs == pytest.approx((1.0, 2.0, 1.0, -1.0))
    assert o.T == pytest.approx(2 * math.pi)


def test_sphere_example_signs():
    o = orbit_data(ModelPoint("sphere", 2.0, 1.0))
    a, b, c, d = o.coeffs
    assert sphere_f1(2.0, 1.0) == pytest.approx(43 * math.atan(2))
    assert sphere_f2(2.0, 1.0) == pytest.approx(-7 * math.atan(2))
    assert d < 0 and c * d + b * b < 0


def test_hyperbolic_example_signs():
    o = orbit_data(ModelPoint("hyperbolic", 0.5, -1.0))
    a, b, c, d = o.coeffs
    assert hyperbolic_g1(0.5, -1.0) == pytest.approx(3.6875 * math.log(3) - 2.5)
    assert d < 0 and c * d + b * b > 0


@pytest.mark.parametrize("surface,xi,alpha,constraint", [
    ("hyperbolic", 1.2, -1.0, "xi < 1"),
    ("sphere", 0.5, 1.0, "xi > 1"),
    ("sphere", 2.0, -1.0, "xi < 1"),
    ("euclidean", 1.0, 1.0, "alpha < 0"),
    ("hyperbolic", 0.5, 0.0, "alpha != 0"),
])
def test_inadmissible_points_name_the_constraint(surface, xi, alpha, constraint):
    with pytest.raises(DomainError) as err:
        orbit_data(ModelPoint(surface, xi, alpha))
    assert constraint in err.value.constraint


@given(any_point)
def test_orbit_data_invariants(args):
    o = orbit_data(_point(args))
    a, b, c, d = o.coeffs
    assert o.theta_dot_sq > 0 and a > 0 and c > 0
    assert o.T == pytest.approx(2 * math.pi / math.sqrt(o.theta_dot_sq))
    assert math.copysign(1, o.auxiliaries["zeta0"]) == math.copysign(1, o.auxiliaries["deta0"])


def _el_jacobian(point):
    f = _rhs_factory(point.surface, point.alpha)
    y0 = circular_state(point).as_array()
    out = np.zeros((4, 4))
    for j in range(4):
        h = 1e-6 * max(1.0, abs(y0[j]))
        e = np.zeros(4)
        e[j] = h
        out[:, j] = (f(y0 + e) - f(y0 - e)) / (2 * h)
    return out


@given(any_point)
def test_radial_frequency_matches_nonlinear_linearisation(args):
    # the linearised equations of motion have spectrum {0, 0, +-sqrt(a d)}
    point = _point(args)
    a, b, c, d = orbit_data(point).coeffs
    ev = np.linalg.eigvals(_el_jacobian(point))
    top = ev[np.argsort(-np.abs(ev))][:2]
    assert np.allclose(top ** 2, a * d, rtol=1e-5, atol=1e-7 * max(1, abs(a * d)))


# ----- regions ------------------------------------------------------------ #

@pytest.mark.parametrize("surface,xi,alpha,name,index", [
    ("sphere", 2.0, 1.0, "Omega1,1^{+,-}", 3),
    ("hyperbolic", 0.5, -1.0, "Omega3,1^+", 2),
    ("euclidean", 1.0, -1.5, "Euclid,0^+", 0),
    ("euclidean", 2.3, -0.5, "Euclid,1^+", 2),
    ("euclidean", 1.0, -2.5, "Euclid^-", 0),
])
def test_region_examples(surface, xi, alpha, name, index):
    label = region_classify(ModelPoint(surface, xi, alpha))
    assert (label.name, label.index, label.boundary) == (name, index, None)


def test_sphere_example_third_function():
    assert sphere_f3(2.0, 1.0) == pytest.approx(math.sqrt(43 / 25), rel=1e-12)
    assert hyperbolic_g3(0.5, -1.0) == pytest.approx(1.584, abs=1e-3)


def test_point_on_h_curve_is_reported():
    alpha = 1 + 43 * math.atan(2) / 6
    assert abs(sphere_f1(2.0, alpha)) < 1e-9
    assert region_classify(ModelPoint("sphere", 2.0, alpha)).boundary == "h-curve"


def test_kepler_point_lies_on_a_separatrix():
    label = region_classify(ModelPoint("euclidean", 1.0, -1.0))
    assert label.boundary == "alpha=-1"
    assert label.index == 0
    assert label.stability is StabilityVerdict.UNSTABLE_JORDAN


@given(any_point)
def test_region_index_matches_table(args):
    point = _point(args)
    label = region_classify(point)
    assume(not label.on_boundary)
    o = orbit_data(point)
    assert label.index == closed_form_iota1(*o.coeffs, o.T)[0]


@pytest.mark.parametrize("seed", range(6))
def test_region_index_matches_crossing_count(seed):
    rng = np.random.default_rng(seed)
    surface = ["sphere", "hyperbolic", "euclidean"][seed % 3]
    xi = {"sphere": rng.uniform(1.1, 5), "hyperbolic": rng.uniform(0.1, 0.9), "euclidean": rng.uniform(0.3, 3)}[surface]
    alpha = rng.uniform(0.2, 7) if surface == "sphere" else rng.uniform(-2.9, -0.1)
    point = ModelPoint(surface, xi, alpha)
    label = region_classify(point)
    o = orbit_data(point)
    assert iota1(fundamental_solution(o.generator, o.T)).iota1 == label.index


@given(st.one_of(sphere_outer(), sphere_inner()))
def test_sphere_rotation_count_is_bounded(args):
    surface, xi, alpha = args
    if sphere_f1(xi, alpha) > 0:
        assert sphere_f3(xi, alpha) <= 2
    assert region_classify(_point(args)).index in {0, 1, 2, 3}


@given(hyperbolic())
def test_hyperbolic_indices_are_even(args):
    assert region_classify(_point(args)).index % 2 == 0


@given(any_point)
def test_sign_of_b_never_matters(args):
    o = orbit_data(_point(args))
    a, b, c, d = o.coeffs
    assert closed_form_iota1(a, b, c, d, o.T)[0] == closed_form_iota1(a, -b, c, d, o.T)[0]


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_hyperbolic_band_edges(level):
    x = hyperbolic_band_edge(-1.0, level)
    if level == 1:
        # g3 stays above 1 on the whole interval at alpha = -1
        assert x == pytest.approx(1e-6)
        return
    assert hyperbolic_g3(x, -1.0) == pytest.approx(level, abs=1e-9)
    assert 0.5 < x < 1


def test_hyperbolic_third_function_diverges_at_rim():
    assert hyperbolic_g3(1 - 1e-9, -1.0) > 1e3


def test_ladder_at_alpha_minus_one_starts_at_two():
    xi = np.linspace(1e-4, 0.99, 2000)
    g = hyperbolic_g3(xi, -1.0)
    assert np.all(g > 1)
    assert g[0] == pytest.approx(1, abs=1e-6)


# ----- separatrices ------------------------------------------------------- #

def test_euclidean_separatrices_are_vertical_lines():
    curves = boundary_curves("euclidean", (0.2, 3), (-3, -0.01))
    assert sorted(c.name for c in curves) == ["alpha=-1", "alpha=-2"]
    for c in curves:
        assert np.ptp(c.points[:, 1]) == 0


def test_sphere_curves_satisfy_their_equations():
    curves = boundary_curves("sphere", (1.01, 6), (0.01, 60), resolution=64)
    names = {c.name for c in curves}
    assert {"h-curve", "k-boundary"} <= names
    for c in curves:
        xi, al = c.points[:, 0], c.points[:, 1]
        if c.name == "h-curve":
            np.testing.assert_allclose(sphere_f1(xi, al), 0, atol=1e-9 * np.max(np.abs(al * xi ** 3)))
        if c.name == "k-boundary":
            np.testing.assert_allclose(sphere_f3(xi, al), 1, atol=1e-9)


def test_hyperbolic_level_curves():
    curves = boundary_curves("hyperbolic", (0.05, 0.995), (-3, -0.5), resolution=32)
    levels = [c for c in curves if c.name.startswith("g3=")]
    assert levels
    for c in levels:
        level = int(c.name.split("=")[1])
        np.testing.assert_allclose(hyperbolic_g3(c.points[:, 0], c.points[:, 1]), level, atol=1e-8)


def test_boundary_curves_validate_arguments():
    with pytest.raises(InvalidArgument):
        boundary_curves("sphere", (2, 1), (0, 1))
    with pytest.raises(InvalidArgument):
        boundary_curves("sphere", (1, 2), (0, 1), resolution=8)


def test_boundary_curves_outside_domain_are_empty():
    assert boundary_curves("hyperbolic", (0.1, 0.9), (1, 2)) == []


def test_h_curve_asymptotic_slope():
    slope, _ = h_curve_asymptote()
    assert slope == pytest.approx(1.5 * math.pi, rel=1e-6)


def test_h_curve_example():
    assert sphere_h(2.0) == pytest.approx(1 + 43 * math.atan(2) / 6)


# ----- stability ---------------------------------------------------------- #

def _sphere_stable_radius():
    return scipy.optimize.brentq(lambda x: sphere_f2(x, -1.0), 0.05, 0.95, xtol=1e-15)


def test_stability_examples():
    assert stability_verdict(1, 2, 1, -1) is StabilityVerdict.UNSTABLE_JORDAN
    assert stability_verdict(1, 2, 1, -4) is StabilityVerdict.STABLE
    assert stability_verdict(1, 0, 1, 1) is StabilityVerdict.UNSTABLE_HYPERBOLIC
    assert stability_verdict(1, 1, 1, 0) is StabilityVerdict.UNSTABLE_NILPOTENT
    assert region_classify(ModelPoint("hyperbolic", 0.5, -1)).stability is StabilityVerdict.UNSTABLE_JORDAN


def test_sphere_stable_orbit_on_f2_curve():
    xi = _sphere_stable_radius()
    o = orbit_data(ModelPoint("sphere", xi, -1.0))
    assert stability_verdict(*o.coeffs) is StabilityVerdict.STABLE
    label = region_classify(ModelPoint("sphere", xi, -1.0))
    assert label.boundary == "f2-curve" and label.name == "Omega2,0^{+,0}"


# ----- distances ---------------------------------------------------------- #

@pytest.mark.parametrize("surface,r,R,expected", [
    ("sphere", 2.0, 2.0, math.pi),
    ("hyperbolic", 1.5, 3.0, 3 * math.log(3)),
    ("euclidean", 4.2, 1.0, 4.2),
])
def test_distance_examples(surface, r, R, expected):
    assert riemann_distance(surface, r, R) == pytest.approx(expected, rel=1e-14)


@given(st.floats(0.01, 50), st.floats(0.1, 10))
def test_sphere_quadrature(r, R):
    exact = riemann_distance("sphere", r, R)
    assert riemann_distance_quadrature("sphere", r, R) == pytest.approx(exact, rel=1e-8)


@given(st.floats(0.001, 0.999), st.floats(0.1, 10))
def test_hyperbolic_quadrature(frac, R):
    exact = riemann_distance("hyperbolic", frac * R, R)
    assert riemann_distance_quadrature("hyperbolic", frac * R, R) == pytest.approx(exact, rel=1e-8)


def test_distance_domain_errors():
    with pytest.raises(DomainError):
        riemann_distance("hyperbolic", 1.0, 1.0)
    with pytest.raises(DomainError):
        riemann_distance("sphere", 1.0, 0.0)
