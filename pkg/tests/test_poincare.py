import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from piforge.corpus import glued_lines, path, weighted_line, weighted_line_parts
from piforge.oracles import modulus_bruteforce
from piforge.poincare import (NonHomogeneousForm, UpperGradientError, check_ainfty,
                              check_nonhomogeneous_pi, check_upper_gradient, default_family,
                              modulus, modulus_lower_bounds, monotone, pi_scan,
                              rho_test_function, weighted_space)
from piforge.space import FiniteMetricMeasureSpace, doubling_constant, lip_field
from strategies import small_spaces

P5 = path(5)


def test_lip_field_examples():
    assert np.all(lip_field(P5, np.ones(5)) == 0)
    assert np.all(lip_field(P5, np.arange(5.0)) == 1)
    assert list(lip_field(P5, np.eye(5)[2])) == [0, 1, 1, 1, 0]


def test_pi_scan_linear_full_ball():
    rep = pi_scan(P5, 2, 1.0, family=[np.arange(5.0)], radii=[2.5], centers=[2])
    assert rep.C_PI_hat == pytest.approx(0.48)


def test_pi_scan_constant_contributes_zero():
    rep = pi_scan(P5, 2, 1.0, family=[np.full(5, 3.0)])
    assert rep.C_PI_hat == 0.0 and not rep.zero_gradient_violations


def test_pi_scan_flags_zero_gradient():
    S = FiniteMetricMeasureSpace.from_matrix([[0, 1], [1, 0]])
    rep = pi_scan(S, 2, 1.0, family=[np.array([0.0, 1.0])], radii=[2.0])
    assert rep.zero_gradient_violations and math.isinf(rep.C_PI_hat)


def test_glued_junction_exceeds_single_copy():
    glued = pi_scan(glued_lines(9), 1, 1.0, centers=[0]).C_PI_hat
    single = pi_scan(path(9), 1, 1.0, centers=[0]).C_PI_hat
    assert glued > single
    assert math.isfinite(pi_scan(glued_lines(9), 2, 1.0, centers=[0]).C_PI_hat)


@given(small_spaces(), st.integers(0, 100), st.floats(-3, 3).filter(lambda a: abs(a) > 0.1),
       st.floats(-5, 5))
def test_pi_scan_affine_invariance(space, seed, a, b):
    f = np.random.default_rng(seed).normal(size=space.n)
    r1 = pi_scan(space, 2, 1.0, family=[f]).C_PI_hat
    r2 = pi_scan(space, 2, 1.0, family=[a * f + b]).C_PI_hat
    assert r2 == pytest.approx(r1, rel=1e-9, abs=1e-12)


def test_pi_scan_large_p_is_stable():
    rep = pi_scan(P5, 400, 1.0, family=[np.arange(5.0)])
    assert math.isfinite(rep.C_PI_hat) and rep.C_PI_hat > 0


def test_rho_no_obstacle_is_scaled_distance():
    rho, g = rho_test_function(P5, 0, (), 2.0)
    assert np.allclose(rho, P5.dist[0] / 4) and np.allclose(g, 0.5)


def test_rho_middle_obstacle():
    rho, g = rho_test_function(P5, 0, [2], 2.0)
    assert rho[4] == pytest.approx(2.0)


def test_rho_rejects_small_B():
    with pytest.raises(ValueError):
        rho_test_function(P5, 0, (), 0.5)


@given(small_spaces(), st.data())
def test_rho_upper_gradient_and_lipschitz(space, data):
    x = data.draw(st.integers(0, space.n - 1))
    E = data.draw(st.sets(st.integers(0, space.n - 1), max_size=3))
    B = data.draw(st.sampled_from([1.0, 2.0, 5.0]))
    rho, g = rho_test_function(space, x, E, B)
    assert check_upper_gradient(space, rho, g) is None
    L = 1 / (2 * B) + 1
    assert np.all(np.abs(rho[:, None] - rho[None, :]) <= L * space.dist + 1e-9)


def test_modulus_two_vertices():
    for r, p in [(1.0, 2.0), (2.5, 3.0), (0.5, 1.5)]:
        S = FiniteMetricMeasureSpace.from_edges(2, [(0, 1, r)])
        m = modulus(S, 0, 1, 1.0, p, 2 * r)
        assert abs(m.value - r ** -p) <= 1e-9


def test_modulus_unreachable():
    S = FiniteMetricMeasureSpace.from_matrix([[0, 1], [1, 0]])
    m = modulus(S, 0, 1, 1.0, 2.0, 2.0)
    assert m.value == 0.0 and "no-admissible-path" in m.flags


def test_modulus_p5_geodesic():
    m = modulus(P5, 0, 4, 1.0, 2.0, 4.0)
    assert m.value == pytest.approx(1 / 13)
    assert np.allclose(m.rho, np.array([2, 4, 4, 4, 0]) / 13)
    assert abs(m.value - modulus_bruteforce(P5, 0, 4, 1.0, 2.0, 4.0)) <= 1e-4


def test_modulus_rejects_p_one():
    with pytest.raises(ValueError):
        modulus(P5, 0, 4, 1.0, 1.0, 4.0)


@given(small_spaces(max_n=6), st.data())
def test_modulus_matches_bruteforce(space, data):
    x, y = 0, space.n - 1
    C = data.draw(st.sampled_from([1.0, 1.5, 2.0]))
    p = data.draw(st.sampled_from([1.5, 2.0, 3.0]))
    s = C * space.dist[x, y] + data.draw(st.sampled_from([0.25, 1.0]))
    m = modulus(space, x, y, C, p, s)
    assert abs(m.value - modulus_bruteforce(space, x, y, C, p, s)) <= 1e-4


@given(small_spaces(max_n=6), st.sampled_from([1.5, 2.0]))
def test_modulus_nondecreasing_in_C(space, p):
    x, y = 0, space.n - 1
    s = 3 * space.dist[x, y] + 1
    vals = [modulus(space, x, y, C, p, s).value for C in (1.0, 1.5, 3.0)]
    assert vals[0] <= vals[1] + 1e-7 and vals[1] <= vals[2] + 1e-7


def test_modulus_lower_bound_forms():
    b = modulus_lower_bounds(2.0, 4.0, 2.0)
    assert b["stated"] == pytest.approx(1.0) and b["argument"] == pytest.approx(1 / 128)


def test_nonhomogeneous_power_form_matches_scan():
    fam = default_family(P5)
    rep = pi_scan(P5, 2, 1.0, family=fam)
    form = NonHomogeneousForm.parse("power:2", f"scaled_power:{rep.C_PI_hat!r}:0.5")
    pairs = [(f, lip_field(P5, f)) for f in fam]
    out = check_nonhomogeneous_pi(P5, form, 1.0, pairs, radii=rep.radii)
    assert abs(out.worst_margin) <= 1e-9


def test_nonhomogeneous_constant_function():
    form = NonHomogeneousForm.parse("identity", "identity")
    out = check_nonhomogeneous_pi(P5, form, 1.0, [(np.ones(5), np.zeros(5))])
    assert out.holds and out.worst_margin >= 0


def test_nonhomogeneous_adversary_B():
    form = NonHomogeneousForm.parse("identity", "identity")
    assert form.adversary_B(3.0, 2.0) == pytest.approx(1280)
    assert form.adversary_B(5000.0, 2.0) == 5000.0


def test_nonhomogeneous_rejects_bad_gradient():
    form = NonHomogeneousForm.parse("identity", "identity")
    with pytest.raises(UpperGradientError):
        check_nonhomogeneous_pi(P5, form, 1.0, [(np.arange(5.0), np.zeros(5))])


def test_tabulated_form_inverses():
    m = monotone([(0, 0), (1, 2), (2, 2), (3, 5)])
    for t in [0.0, 0.5, 1.0, 2.5, 3.0, 6.0]:
        assert m.lower_inv(float(m(t))) <= t + 1e-12
        assert float(m(m.upper_inv(t))) <= t + 1e-12
    with pytest.raises(ValueError):
        monotone([(0, 0), (1, -1)])


def test_ainfty_unit_weight():
    assert check_ainfty(P5, np.ones(5), 0.3, 0.4, [1.5, 3.0]).holds


def test_ainfty_weighted_line():
    base, w = weighted_line_parts(21, 0.5)
    v = check_ainfty(base, w, 0.1, 0.5, [0.5, 1.0])
    assert v.holds and v.worst_margin == pytest.approx(0.2857142857, abs=1e-9)


def test_ainfty_singleton_witness():
    w = np.array([1.0, 1e-6 * 2 / 3, 1.0])  # vertex 1 has half the mass and 1e-6 of nu
    S = FiniteMetricMeasureSpace.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)], [0.5, 2.0, 1.5])
    v = check_ainfty(S, w, 0.01, 0.4, [5.0])
    assert not v.holds and v.violations[0][2] == [1]


@given(st.lists(st.floats(0.2, 5), min_size=5, max_size=5), st.sampled_from([0.1, 0.3]),
       st.sampled_from([0.3, 0.6]))
def test_ainfty_exact_against_subsets(w, delta, eps):
    import itertools
    w = np.array(w)
    radii = [1.5, 3.0]
    v = check_ainfty(P5, w, delta, eps, radii)
    brute = True
    for x in range(5):
        for r in radii:
            mem = [u for u in range(5) if P5.dist[x, u] < r]
            nuB = sum(w[u] for u in mem)
            for k in range(len(mem) + 1):
                for E in itertools.combinations(mem, k):
                    if sum(w[u] for u in E) <= delta * nuB and len(E) > eps * len(mem) + 1e-9:
                        brute = False
    assert v.holds == brute


def test_weighted_space_examples():
    assert np.array_equal(weighted_space(P5, np.ones(5)).weights, P5.weights)
    assert doubling_constant(weighted_space(P5, 2 * np.ones(5))) == doubling_constant(P5)
    assert math.isfinite(doubling_constant(weighted_line(21, 0.5)))


def test_modulus_large_exponent_stays_feasible():
    res = modulus(path(12), 0, 7, 300.0, 25.0, 28.0)
    assert res.admissible and 0 < res.value < 1e-15
    assert res.dual_bound == pytest.approx(res.value, rel=1e-6)
