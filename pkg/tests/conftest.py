import pytest

from hypermon.formula import parse
from hypermon.model import uniform_trace

AB = ("a", "b")
L3 = ("l1", "l2", "l3")
L2 = ("l1", "l2")

PHI_A = "forall p. max x. (<b@p>x \\/ exists q. (q != p /\\ <a@q>x))"
PHI_E = "exists p. max x. ([a@p]<a@p>x /\\ [b@p]<a@p>x)"
DIFFERENT_STARTS = "exists p. exists q. ([a@p]ff /\\ [b@q]ff)"


@pytest.fixture
def phi_a():
    return parse(PHI_A)


@pytest.fixture
def phi_e():
    return parse(PHI_E)


@pytest.fixture
def different_starts():
    return parse(DIFFERENT_STARTS)


def words(locs, shapes):
    return uniform_trace(locs, AB, dict(zip(locs, shapes)))


@pytest.fixture
def t1():
    # l1 = a^w, l2 = b a^w, l3 = (ba)^w
    return words(L3, [("", "a"), ("b", "a"), ("", "ba")])


@pytest.fixture
def t2():
    # l1 = a^w, l2 = (ab)^w, l3 = (ba)^w
    return words(L3, [("", "a"), ("", "ab"), ("", "ba")])


@pytest.fixture
def t_good():
    return words(L2, [("", "a"), ("", "ab")])


@pytest.fixture
def t_bad():
    return words(L2, [("", "b"), ("", "ab")])


# one line per acceptance criterion, printed after the test summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
