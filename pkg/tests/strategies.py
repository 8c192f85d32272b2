"""Hypothesis strategies built on the package's own random generators."""

from hypothesis import strategies as st

from hypermon.verify import FormulaGenerator, location_names, random_trace


@st.composite
def formulas(draw, prenex=False, allow_min=False, depth=5, fixpoints=2):
    rng = draw(st.randoms(use_true_random=False))
    return FormulaGenerator(rng, "ab", depth, fixpoints, prenex=prenex,
                            allow_min=allow_min).formula()


@st.composite
def traces(draw, max_locations=3, max_prefix=2, max_loop=3):
    rng = draw(st.randoms(use_true_random=False))
    n = draw(st.integers(1, max_locations))
    return random_trace(rng, location_names(n), ["a", "b"], max_prefix, max_loop)
