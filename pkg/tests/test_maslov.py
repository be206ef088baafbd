import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from maslov_orbits.closed_form import closed_form_iota1
from maslov_orbits.errors import InvalidArgument
from maslov_orbits.maslov import (
    IndexResult,
    SymplecticPath,
    _Scan,
    _perturbed_index,
    clm_index,
    crossing_form,
    detect_crossings,
    fundamental_solution,
    iota1,
    scan_crossings,
    souriau_map,
    zhu_index,
)
from maslov_orbits.symplectic import GeneratorMatrix, diamond_product, is_symplectic, standard_structure

J2 = standard_structure(1)
J4 = standard_structure(2)
SHEAR_UP = np.array([[0.0, 1.0], [0.0, 0.0]])     # t -> [[1, t], [0, 1]]
SHEAR_DOWN = np.array([[0.0, -1.0], [0.0, 0.0]])  # t -> [[1, -t], [0, 1]]


def random_planar_hamiltonian(rng, scale=1.5):
    S = rng.normal(size=(2, 2)) * scale
    return J2 @ (S + S.T) / 2


# ----- paths --------------------------------------------------------------- #

def test_zero_generator_gives_constant_identity():
    p = fundamental_solution(np.zeros((2, 2)), 1.0)
    np.testing.assert_array_equal(p.sample_values, np.broadcast_to(np.eye(2), p.sample_values.shape))


def test_rotation_generator_closes_after_full_turn():
    p = fundamental_solution(J2, 2 * math.pi)
    np.testing.assert_allclose(p.values([2 * math.pi])[0], np.eye(2), atol=1e-12)


def test_nilpotent_generator_matches_polynomial():
    a, b, c = 1.0, 2 * math.sqrt(2), 1.0
    M = fundamental_solution(GeneratorMatrix(a, b, c, 0.0), 1.0).values([1.0])[0]
    expected = np.array([[1, b, 0, 0], [0, 1, 0, 0], [a, a * b / 2, 1, 0],
                         [-a * b / 2, c - a * b * b / 6, -b, 1]])
    np.testing.assert_allclose(M, expected, rtol=1e-10, atol=1e-12)


def test_samples_are_symplectic(rng):
    for _ in range(5):
        A = GeneratorMatrix(rng.uniform(0.1, 5), *rng.uniform(-5, 5, 3)).matrix
        p = fundamental_solution(A, 3.0, steps=128)
        for M in p.sample_values:
            assert is_symplectic(M, tol=1e-8 * max(1.0, np.abs(M).max() ** 2))


@pytest.mark.parametrize("steps", [0, 10, 63, 64.5])
def test_fundamental_solution_needs_enough_steps(steps):
    with pytest.raises(InvalidArgument):
        fundamental_solution(J2, 1.0, steps=steps)


def test_non_finite_generator_is_rejected():
    with pytest.raises(InvalidArgument):
        fundamental_solution(np.array([[np.inf, 0], [0, 0]]), 1.0)


def test_non_hamiltonian_generator_is_rejected():
    with pytest.raises(InvalidArgument):
        fundamental_solution(np.eye(2), 1.0)


def test_samples_must_start_at_identity():
    with pytest.raises(InvalidArgument):
        SymplecticPath.from_samples([0.0, 1.0], [2 * np.eye(2), np.eye(2)])


def test_samples_must_be_symplectic():
    with pytest.raises(InvalidArgument):
        SymplecticPath.from_samples([0.0, 1.0], [np.eye(2), np.diag([2.0, 2.0])])


def test_sample_times_must_increase():
    with pytest.raises(InvalidArgument):
        SymplecticPath.from_samples([0.0, 1.0, 1.0], [np.eye(2)] * 3)


def test_souriau_map_of_diagonal_is_identity():
    Z = np.vstack([np.eye(2), np.eye(2)]) / math.sqrt(2)
    np.testing.assert_allclose(souriau_map(Z[None])[0], np.eye(2), atol=1e-15)


def test_souriau_map_is_unitary(rng):
    A = random_planar_hamiltonian(rng)
    W = souriau_map(fundamental_solution(A, 2.0).graph_frames(np.linspace(0, 2, 7)))
    for w in W:
        np.testing.assert_allclose(w @ w.conj().T, np.eye(2), atol=1e-12)


# ----- crossings ----------------------------------------------------------- #

def test_rotation_crossings_at_both_ends():
    cs = detect_crossings(fundamental_solution(J2, 2 * math.pi))
    assert [(c.location, c.kernel_dim) for c in cs] == [("start", 2), ("end", 2)]
    assert cs[-1].t == pytest.approx(2 * math.pi)


def test_shear_has_a_continuous_crossing():
    scan = scan_crossings(fundamental_solution(SHEAR_UP, 1.0))
    assert scan.persistent_kernel == 1
    assert not scan.regular


def test_kepler_generator_crosses_at_full_turn():
    cs = detect_crossings(fundamental_solution(GeneratorMatrix(1, 2, 1, -1), 10.0))
    interior = [c for c in cs if c.location == "interior"]
    assert len(interior) == 1
    assert interior[0].t == pytest.approx(2 * math.pi, abs=1e-9)
    assert (cs[0].kernel_dim, cs[0].m_plus, cs[0].m_minus) == (4, 2, 1)
    assert (interior[0].kernel_dim, interior[0].m_plus, interior[0].m_minus) == (3, 2, 0)


@pytest.mark.parametrize("a,d,T", [(1.0, -1.0, 20.0), (2.0, -0.5, 15.0), (0.3, -3.0, 14.0)])
def test_interior_crossings_sit_at_full_turns(a, d, T):
    w = math.sqrt(-a * d)
    cs = detect_crossings(fundamental_solution(GeneratorMatrix(a, 1.0, 1.0, d), T))
    times = [c.t for c in cs if c.location == "interior"]
    expected = [2 * math.pi * m / w for m in range(1, int(w * T / (2 * math.pi)) + 1)]
    np.testing.assert_allclose(times, expected, atol=1e-8)


def test_crossing_form_of_rotation_at_start():
    assert crossing_form(fundamental_solution(J2, 1.0), 0.0) == (2, 0)


def test_crossing_form_of_hyperbolic_path_at_start():
    s = 0.8
    A = np.diag([s, -s])
    assert crossing_form(fundamental_solution(A, 1.0), 0.0) == (1, 1)


def test_crossing_form_of_shears_at_start():
    # -J A is diag(0, 1) for the downward shear and diag(0, -1) for the upward one
    assert crossing_form(fundamental_solution(SHEAR_DOWN, 1.0), 0.0) == (1, 0)
    assert crossing_form(fundamental_solution(SHEAR_UP, 1.0), 0.0) == (0, 1)


def test_crossing_form_rejects_non_crossing():
    with pytest.raises(InvalidArgument):
        crossing_form(fundamental_solution(J2, 4.0), 1.0)
    with pytest.raises(InvalidArgument):
        crossing_form(fundamental_solution(J2, 4.0), 5.0)


def test_crossing_form_on_sampled_path_uses_interpolant():
    ts = np.linspace(0, 2 * math.pi, 201)
    vals = scipy.linalg.expm(J2[None] * ts[:, None, None])
    p = SymplecticPath.from_samples(ts, vals)
    assert crossing_form(p, 0.0) == (2, 0)


# ----- indices ------------------------------------------------------------- #

@pytest.mark.parametrize("A,T,expected", [
    (SHEAR_UP, 2.0, -1),
    (SHEAR_DOWN, 2.0, 0),
    (np.zeros((2, 2)), 1.0, -1),
    (J2, math.pi, 1),
    (J2, 2 * math.pi, 1),
    (J2, 3 * math.pi, 3),
    (J2, 4 * math.pi, 3),
])
def test_model_path_indices(A, T, expected):
    assert iota1(fundamental_solution(A, T)).iota1 == expected


@pytest.mark.parametrize("A,T,expected", [(np.zeros((2, 2)), 5.0, 0), (J2, 2 * math.pi, 2)])
def test_intersection_index_examples(A, T, expected):
    assert clm_index(fundamental_solution(A, T)) == expected


def test_index_result_enforces_shift():
    with pytest.raises(AssertionError):
        IndexResult(clm=2, iota1=2, n=1)


def test_function_path_with_and_without_derivative():
    f = lambda t: scipy.linalg.expm(J2 * t)  # noqa: E731
    df = lambda t: J2 @ scipy.linalg.expm(J2 * t)  # noqa: E731
    for T, expected in [(3.0, 1), (9.0, 3)]:
        assert iota1(SymplecticPath.from_function(f, T, derivative=df, steps=256)).iota1 == expected
        assert iota1(SymplecticPath.from_function(f, T, steps=256)).iota1 == expected


def test_sampled_path_agrees_with_generator():
    g = GeneratorMatrix(1, 2, 1, -1)
    ts = np.linspace(0, 10.0, 401)
    vals = scipy.linalg.expm(g.matrix[None] * ts[:, None, None])
    assert iota1(SymplecticPath.from_samples(ts, vals)).iota1 == iota1(fundamental_solution(g, 10.0)).iota1


def _random_symplectic(rng, scale=0.3):
    S = rng.normal(size=(4, 4))
    return scipy.linalg.expm(J4 @ (S + S.T) / 2 * scale)


@pytest.mark.parametrize("seed", range(8))
def test_conjugation_invariance(seed):
    rng = np.random.default_rng(seed)
    A = diamond_product(random_planar_hamiltonian(rng), random_planar_hamiltonian(rng))
    P = _random_symplectic(rng)
    T = rng.uniform(0.5, 6)
    assert iota1(fundamental_solution(np.linalg.solve(P, A @ P), T)).iota1 == \
        iota1(fundamental_solution(A, T)).iota1


@pytest.mark.parametrize("seed", range(8))
def test_interleaved_sum_additivity(seed):
    rng = np.random.default_rng(100 + seed)
    A1, A2 = random_planar_hamiltonian(rng), random_planar_hamiltonian(rng)
    T = rng.uniform(0.5, 8)
    i1 = iota1(fundamental_solution(A1, T)).iota1
    i2 = iota1(fundamental_solution(A2, T)).iota1
    assert iota1(fundamental_solution(diamond_product(A1, A2), T)).iota1 == i1 + i2


@pytest.mark.parametrize("coeffs,T", [((1, 2, 1, -1), 10.0), ((1, 0, 1, 0), 3.0), ((2, 1, -1, 0.5), 2.0)])
def test_perturbed_count_is_stable_over_eps_range(coeffs, T):
    path = fundamental_solution(GeneratorMatrix(*coeffs), T)
    scan = _Scan(path)
    value, _, eps_star = _perturbed_index(scan, path)
    for eps in np.linspace(eps_star, 4 * eps_star, 7):
        assert int(scan.flows(2 * eps)[0].sum()) == value


@given(st.floats(0.1, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.5, 20))
def test_shift_identity_holds(a, b, c, d, T):
    res = iota1(fundamental_solution(GeneratorMatrix(a, b, c, d), T))
    assert res.clm - res.n == res.iota1


# ----- lower block triangular paths --------------------------------------- #

@pytest.mark.parametrize("coeffs,expected", [
    ((1.0, 0.0, -1.0, 0.0), 1),
    ((1.0, 0.0, 1.0, 0.0), 2),
    ((1.0, 2.0, 1.0, 0.0), 2),
])
def test_zhu_formula_on_nilpotent_cases(coeffs, expected):
    path = fundamental_solution(GeneratorMatrix(*coeffs), 2.0)
    assert zhu_index(path) == expected
    assert clm_index(path) == expected


@pytest.mark.parametrize("seed", range(12))
def test_zhu_formula_matches_crossing_count(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 3))
    X = rng.normal(size=(n, n))
    Y = rng.normal(size=(n, n))
    A = np.block([[X, np.zeros((n, n))], [Y + Y.T, -X.T]])
    path = fundamental_solution(A, rng.uniform(0.5, 3))
    assert zhu_index(path) == clm_index(path)


@given(st.floats(0.1, 4), st.floats(-4, 4), st.floats(0.5, 6))
def test_zhu_formula_on_random_nilpotent_generators(b, c, T):
    path = fundamental_solution(GeneratorMatrix(1.0, b, c, 0.0), T)
    assert zhu_index(path) == clm_index(path) == closed_form_iota1(1.0, b, c, 0.0, T)[0] + 2


def test_zhu_rejects_non_triangular_path():
    with pytest.raises(InvalidArgument):
        zhu_index(fundamental_solution(J2, 1.0))


# ----- badly scaled generators -------------------------------------------- #

@pytest.mark.parametrize("coeffs,T", [
    # huge coefficients on a very short interval
    ((0.49985538601256563, 6727262101.357428, 3456.230266698377, 1.5388111440288378e16), 1.5537326108995386e-07),
    # tiny coefficients on a very long interval with many turns
    ((7.405181639968263e-05, 0.02045650527277136, 7.496411343776599e-05, -1.1995090874762737), 100956.36399850032),
    ((1.0, 0.0011285954492034945, 0.010002561052854367, 3.0884739403351864e-05), 1113.5947497555792),
])
def test_badly_scaled_generators_match_closed_form(coeffs, T):
    expected, _ = closed_form_iota1(*coeffs, T)
    assert iota1(fundamental_solution(GeneratorMatrix(*coeffs), T)).iota1 == expected


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-6, 6))
def test_index_ignores_diagonal_scaling_and_time_units(x1, x2, log_T):
    A = GeneratorMatrix(1.3, -0.7, 2.1, -1.9).matrix
    d = np.exp([x1, x2, -x1, -x2])
    B = d[:, None] * A / d[None, :]
    T = 4.0
    base = iota1(fundamental_solution(A, T)).iota1
    s = math.exp(log_T)
    assert iota1(fundamental_solution(B / s, T * s)).iota1 == base


def test_crossing_times_are_reported_in_original_units():
    res = iota1(fundamental_solution(J2 * 0.5, 6 * math.pi))
    times = sorted(c.t for c in res.crossings)
    assert times[0] == pytest.approx(0.0, abs=1e-9)
    assert times[1] == pytest.approx(4 * math.pi, rel=1e-8)
