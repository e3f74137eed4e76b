"""Hypothesis strategies for small weighted graphs."""
from hypothesis import strategies as st

from piforge.space import FiniteMetricMeasureSpace


@st.composite
def small_spaces(draw, min_n=2, max_n=7, lengths=(0.5, 1.0, 1.5, 2.0), unit_weights=False):
    """Connected weighted graphs: a random spanning tree plus a few extra edges."""
    n = draw(st.integers(min_n, max_n))
    edges = []
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges.append((u, v, draw(st.sampled_from(lengths))))
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1),
                                    st.sampled_from(lengths)), max_size=3))
    edges += [(u, v, l) for u, v, l in extra if u != v]
    if unit_weights:
        weights = [1.0] * n
    else:
        weights = draw(st.lists(st.sampled_from([0.5, 1.0, 2.0, 3.0]), min_size=n, max_size=n))
    return FiniteMetricMeasureSpace.from_edges(n, edges, weights)
