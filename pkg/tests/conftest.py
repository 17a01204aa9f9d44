from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from chargenet.core import LevelSet, NeuronSpec

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

F = Fraction


def rationals(lo=-20, hi=20, max_den=64):
    return st.builds(
        lambda n, d: F(n, d),
        st.integers(lo * max_den, hi * max_den),
        st.integers(1, max_den),
    ).filter(lambda q: lo <= q <= hi)


@st.composite
def level_sets(draw, max_size=7):
    n_neg = draw(st.integers(0, 3))
    n_pos = draw(st.integers(0 if n_neg else 1, 4))
    gaps = st.builds(F, st.integers(1, 12), st.integers(1, 4))
    neg, q = [], F(0)
    for _ in range(n_neg):
        q -= draw(gaps)
        neg.append(q)
    pos, q = [], F(0)
    for _ in range(n_pos):
        q += draw(gaps)
        pos.append(q)
    return LevelSet(sorted(neg) + [F(0)] + pos)


capacitances = st.builds(F, st.integers(1, 9), st.integers(1, 4))


@st.composite
def neuron_specs(draw):
    levels = draw(level_sets())
    C = draw(capacitances)
    if draw(st.booleans()):
        sigma = {q: q for q in levels}
    else:
        sigma = {q: draw(rationals(-5, 5, 8)) for q in levels}
    return NeuronSpec("n", C, levels, sigma)


@pytest.fixture
def unit():
    return NeuronSpec.unit("n1")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
