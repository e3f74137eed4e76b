import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from piforge.corpus import path
from piforge.fragments import (GAP, SOLID, CurveFragment, FragmentError, Leg, concatenate,
                               concatenation_params, dilate_gaps, fragment_integral, length,
                               normalize, oscillation_check, pareto_fragments, undef)
from piforge.oracles import enumerate_fragments, pareto_front_bruteforce
from piforge.space import lip_field, lipschitz_constant
from strategies import small_spaces

P5 = path(5)
DETOUR = CurveFragment.from_legs([(SOLID, 0, 1), (GAP, 1, 3), (SOLID, 3, 4)])


def test_normalize_drops_self_loop():
    f = CurveFragment.from_legs([(SOLID, 0, 1), (SOLID, 1, 1), (SOLID, 1, 2)])
    g = normalize(P5, f)
    assert len(g.legs) == 2 and length(P5, g) == length(P5, f)


def test_normalize_merges_gaps():
    f = CurveFragment.from_legs([(GAP, 0, 2), (GAP, 2, 3)])
    g = normalize(P5, f)
    assert g.legs == (Leg(GAP, 0, 3),) and undef(P5, g) <= undef(P5, f)


def test_normalize_idempotent_on_normal():
    assert normalize(P5, DETOUR) == DETOUR


def test_broken_chaining_rejected():
    with pytest.raises(FragmentError):
        CurveFragment.from_legs([(SOLID, 0, 1), (SOLID, 2, 3)])


def test_dilate_no_gaps():
    f = CurveFragment.path([0, 1, 2])
    assert dilate_gaps(P5, f, [])[1] == 2


def test_dilate_tight_bound():
    f = CurveFragment.from_legs([(SOLID, 0, 1), (GAP, 1, 3), (SOLID, 3, 4), (SOLID, 4, 3)])
    assert dilate_gaps(P5, f, [1.5], C=1.5)[1] == pytest.approx(6.0)


def test_dilate_two_gaps():
    f = CurveFragment.from_legs([(GAP, 0, 1), (SOLID, 1, 1), (GAP, 1, 2)])
    assert dilate_gaps(P5, f, [2, 2], C=2)[1] == pytest.approx(4.0)


def test_dilate_factor_out_of_range():
    with pytest.raises(FragmentError):
        dilate_gaps(P5, DETOUR, [3.0], C=2.0)


def test_concatenate_single_and_pair():
    f = CurveFragment.path([0, 1])
    assert concatenate([0, 1], [f]) == f
    g = concatenate([0, 1, 2], [f, CurveFragment.path([1, 2])])
    assert length(P5, g) == 2 and undef(P5, g) == 0


def test_concatenate_endpoint_mismatch():
    with pytest.raises(FragmentError):
        concatenate([0, 1, 2], [CurveFragment.path([0, 1]), CurveFragment.path([2, 3])])


def test_concatenation_params_case_four():
    C0 = 3.0
    C, delta, e = concatenation_params(2 ** 15, 2 ** 20 * C0, 2.0 ** -30, 1.0, 3, 2.0)
    assert C == pytest.approx(2 ** 35 * C0)
    assert delta == pytest.approx(2.0 ** -14)
    # e = (2D)^expo with the base 2D = 2; the link parameter already carries (2D)^(-1000-log2 C0)
    expo = math.log2(e)
    assert expo == pytest.approx(-30 - 15 - math.log2(3) - 20 - math.log2(C0) - 6)
    assert -1000 - math.log2(C0) + expo >= -2000 - 2 * math.log2(C0)


def test_pareto_same_point():
    front = pareto_fragments(P5, 2, 2)
    assert front.pairs() == [(0.0, 0.0)]


def test_pareto_direct_path():
    assert pareto_fragments(P5, 0, 4, (), 4).pairs() == [(4.0, 0.0)]


def test_pareto_blocked_middle():
    front = pareto_fragments(P5, 0, 4, (2,), 4)
    assert front.pairs() == [(4.0, 2.0)]
    assert front.entries[0][2] == DETOUR


def test_pareto_budget_below_distance():
    assert pareto_fragments(P5, 0, 4, (), 3.5).entries == []


@given(small_spaces(max_n=6), st.data())
def test_pareto_matches_enumeration(space, data):
    x = data.draw(st.integers(0, space.n - 1))
    y = data.draw(st.integers(0, space.n - 1))
    E = data.draw(st.sets(st.integers(0, space.n - 1), max_size=2))
    C = data.draw(st.sampled_from([1.0, 1.5, 2.5]))
    budget = C * space.dist[x, y]
    got = pareto_fragments(space, x, y, E, budget)
    want = pareto_front_bruteforce(space, x, y, E, budget)
    assert np.allclose(sorted(got.pairs()), want) if want else got.entries == []
    for l, u, frag in got.entries:
        assert length(space, frag) == pytest.approx(l)
        assert undef(space, frag) == pytest.approx(u)
        assert not set(frag.vertices()[1:-1]) & (set(E) - {x, y})


@given(small_spaces(max_n=6), st.integers(0, 5), st.integers(0, 5))
def test_pareto_front_strictly_monotone(space, x, y):
    x, y = x % space.n, y % space.n
    pairs = pareto_fragments(space, x, y, (), 3 * space.dist[x, y]).pairs()
    for (l1, u1), (l2, u2) in zip(pairs, pairs[1:]):
        assert l2 > l1 and u2 < u1


def test_integral_examples():
    frag = CurveFragment.path([0, 1, 2, 3, 4])
    assert fragment_integral(P5, frag, np.zeros(5)) == 0
    assert fragment_integral(P5, frag, np.eye(5)[2]) == pytest.approx(1.0)
    f = CurveFragment.from_legs([(SOLID, 0, 1), (GAP, 1, 3), (SOLID, 3, 4), (SOLID, 4, 3)])
    assert fragment_integral(P5, f, np.ones(5)) == pytest.approx(3.0)


def test_oscillation_examples():
    f = np.arange(5.0)
    lhs, rhs, ok = oscillation_check(P5, CurveFragment.path([0, 1, 2, 3, 4]), f, 1.0)
    assert (lhs, rhs, ok) == (4.0, 4.0, True)
    lhs, rhs, ok = oscillation_check(P5, DETOUR, f, 1.0)
    assert (lhs, rhs, ok) == (4.0, 4.0, True)
    assert oscillation_check(P5, DETOUR, np.ones(5), 0.0)[2]


def test_oscillation_rejects_small_lip():
    with pytest.raises(ValueError):
        oscillation_check(P5, DETOUR, np.arange(5.0), 0.5)


@st.composite
def fragments_on(draw, space):
    k = draw(st.integers(1, 5))
    seq = [draw(st.integers(0, space.n - 1))]
    legs = []
    for _ in range(k):
        v = seq[-1]
        nbrs = sorted(space.adjacency[v])
        if nbrs and draw(st.booleans()):
            w = draw(st.sampled_from(nbrs))
            legs.append((SOLID, v, w))
        else:
            w = draw(st.integers(0, space.n - 1))
            legs.append((GAP, v, w))
        seq.append(w)
    return normalize(space, CurveFragment.from_legs(legs))


@given(st.data())
def test_normalize_idempotent_and_undef_nonincreasing(data):
    space = data.draw(small_spaces())
    frag = data.draw(fragments_on(space))
    assert normalize(space, frag) == frag


@given(st.data())
def test_oscillation_property(data):
    space = data.draw(small_spaces())
    frag = data.draw(fragments_on(space))
    seeds = data.draw(st.lists(st.integers(0, space.n - 1), min_size=1, max_size=3))
    f = space.dist[seeds].min(axis=0) * data.draw(st.sampled_from([0.5, 1.0, 2.0]))
    assert oscillation_check(space, frag, f, lipschitz_constant(space, f))[2]


def test_enumeration_counts_direct_and_detour():
    recs = enumerate_fragments(P5, 0, 4, 4)
    assert (4.0, 0.0) in {(l, u) for l, u, _ in recs}
