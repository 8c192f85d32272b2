from hypothesis import given, settings, strategies as st

from hypermon.central import synth_central
from hypermon.decentral import synth_dec
from hypermon.formula import parse
from hypermon.model import END, NO, YES
from hypermon.terms import (
    END_M, NO_M, YES_M, Choice, ParAnd, ParOr, alpha_equal_terms, balanced,
    normalize, normalize_group, parse_dmon, parse_term, show, term_verdicts,
)
from hypermon.verify import location_names

from strategies import formulas


def test_verdict_rules():
    assert term_verdicts(ParOr(YES_M, NO_M)) == {YES}
    assert term_verdicts(ParAnd(YES_M, NO_M)) == {NO}
    assert term_verdicts(ParAnd(END_M, END_M)) == {END}
    assert term_verdicts(parse_term("a@l1.yes")) == set()
    assert term_verdicts(Choice(YES_M, NO_M)) == {YES, NO}


def test_show_parse_round_trip_examples():
    for text in ["a@l1.yes + b@l1.no", "rec x. a@l1.x (x) b@l2.yes",
                 "(yes (+) no) (x) end"]:
        assert show(parse_term(text)) == show(parse_term(show(parse_term(text))))


def test_alpha_equivalence_of_terms():
    assert alpha_equal_terms(parse_term("rec x. a@l1.x"), parse_term("rec y. a@l1.y"))
    assert not alpha_equal_terms(parse_term("rec x. a@l1.x"), parse_term("rec y. b@l1.y"))


def test_balanced_depth():
    t = balanced(ParAnd, [YES_M] * 8)
    assert t == ParAnd(ParAnd(ParAnd(YES_M, YES_M), ParAnd(YES_M, YES_M)),
                       ParAnd(ParAnd(YES_M, YES_M), ParAnd(YES_M, YES_M)))


def test_normalize_lattice_laws():
    a, b = parse_term("a@l1.yes"), parse_term("b@l1.no")
    assert normalize(ParAnd(a, ParAnd(b, a))) == normalize(ParAnd(b, a))
    assert normalize(ParOr(a, ParAnd(a, b))) == a
    assert normalize(ParAnd(YES_M, a)) == a
    assert normalize(ParOr(NO_M, a)) == a
    assert normalize(ParOr(YES_M, a)) == YES_M


def test_normalize_group_keeps_positions():
    a, b = parse_term("a@l1.yes"), parse_term("b@l1.no")
    assert normalize_group((ParAnd(a, a),)) == (normalize(ParAnd(a, a)),)
    assert len(normalize_group((a, b))) == 2


@st.composite
def closed_monitors(draw):
    f = draw(formulas(depth=4))
    n = draw(st.integers(1, 2))
    return synth_central(f, {}, location_names(n), "ab")


@settings(max_examples=150, deadline=None)
@given(closed_monitors())
def test_printed_monitor_reparses(m):
    assert parse_term(show(m)) == m


@settings(max_examples=80, deadline=None)
@given(formulas(prenex=True, depth=4))
def test_printed_dmon_reparses(f):
    d = synth_dec(f, {}, ["l1", "l2"], "ab")
    assert parse_dmon(show(d)) == d


@settings(max_examples=150, deadline=None)
@given(closed_monitors())
def test_normalize_keeps_verdicts_and_is_idempotent(m):
    n = normalize(m)
    assert normalize(n) == n
    before, after = term_verdicts(m), term_verdicts(n)
    assert (YES in before) == (YES in after)
    assert (NO in before) == (NO in after)


def test_synthesized_print_is_stable():
    f = parse("forall p. [a@p]tt \\/ <b@p>ff")
    assert show(synth_central(f, {}, ["l2", "l1"], "ba")) == show(synth_central(f, {}, ["l1", "l2"], "ab"))
