import pytest
from hypothesis import given, settings

from hypermon.formula import (
    And, Box, Diamond, Exists, FF, Forall, Fragment, Max, Rec, TT,
    FormulaSyntaxError, WellFormednessError, alpha_equal, check_closed,
    check_well_formed, classify, free_vars, load_formula, parse, substitute,
    to_text,
)
from hypermon.verify import admissible_for

from conftest import PHI_A, PHI_E
from strategies import formulas


def test_parse_fixpoint_body():
    assert parse("max X. ([a@p] X /\\ [b@p] X)") == Max(
        "X", And(Box("a", "p", Rec("X")), Box("b", "p", Rec("X"))))


def test_parse_wolper_property():
    expected = Exists("p", Max("x", And(Box("a", "p", Diamond("a", "p", Rec("x"))),
                                        Box("b", "p", Diamond("a", "p", Rec("x"))))))
    assert parse(PHI_E) == expected


def test_shadowing_binder_renamed():
    f = parse("forall p. exists p. tt")
    assert f == Forall("p", Exists("p1", TT))


def test_conjunction_binds_tighter():
    assert to_text(parse("tt \\/ ff /\\ tt")) == "tt \\/ ff /\\ tt"
    assert parse("tt \\/ ff /\\ tt").right == And(FF, TT)


def test_binders_extend_right():
    f = parse("exists p. [a@p]tt /\\ [b@p]ff")
    assert isinstance(f, Exists) and isinstance(f.body, And)


@pytest.mark.parametrize("text", ["", "tt /\\", "[a@p tt", "max . tt", "exists p tt", "tt )"])
def test_syntax_errors(text):
    with pytest.raises(FormulaSyntaxError):
        parse(text)


def test_unguarded_rejected():
    with pytest.raises(WellFormednessError, match="unguarded"):
        check_well_formed(parse("max X. X"))


def test_guarded_accepted():
    check_well_formed(parse("max X. [a@p] X"))


def test_consensus_property_well_formed():
    check_well_formed(parse(PHI_A))


def test_free_location_detected():
    with pytest.raises(WellFormednessError):
        check_closed(parse("[a@p]tt"))
    check_closed(parse("[a@p]tt"), {"p": "l1"})


def test_classify_consensus_property():
    frags = classify(parse(PHI_A))
    assert {Fragment.HYPER_REC, Fragment.HYPER_MAX} <= frags
    assert Fragment.P_HYPER_REC not in frags


def test_classify_wolper_property():
    assert Fragment.P_HYPER_MAX in classify(parse(PHI_E))


def test_classify_least_fixpoint():
    frags = classify(parse("exists p. min X. [a@p]X"))
    assert Fragment.P_HYPER_REC in frags
    assert Fragment.P_HYPER_MAX not in frags


def test_classify_quantifier_free():
    assert Fragment.QF in classify(parse("[a@p]tt"))


def test_substitute_variable():
    assert substitute(Rec("X"), "X", TT) == TT


def test_substitute_avoids_capture():
    got = substitute(parse("max Y. X"), "X", Rec("Y"))
    assert isinstance(got, Max) and got.var != "Y" and got.body == Rec("Y")


def test_one_unfolding_of_wolper_body():
    f = parse(PHI_E).body
    unfolded = substitute(f.body, f.var, f)
    expected = And(Box("a", "p", Diamond("a", "p", f)), Box("b", "p", Diamond("a", "p", f)))
    assert unfolded == expected


def test_free_vars():
    assert free_vars(TT) == (frozenset(), frozenset())
    assert free_vars(Box("a", "p", Rec("X"))) == ({"p"}, {"X"})


def test_non_interference_closed():
    f = load_formula("tests/data/gmni.hml")
    assert free_vars(f) == (frozenset(), frozenset())
    assert Fragment.P_HYPER_MAX in classify(f)


def test_alpha_equal():
    assert alpha_equal(parse("exists p. [a@p]tt"), parse("exists q. [a@q]tt"))
    assert not alpha_equal(parse("exists p. [a@p]tt"), parse("exists q. [b@q]tt"))


@settings(max_examples=200, deadline=None)
@given(formulas(allow_min=True))
def test_print_parse_round_trip(f):
    assert alpha_equal(parse(to_text(f)), f)


@settings(max_examples=200, deadline=None)
@given(formulas(allow_min=True))
def test_fragment_inclusions(f):
    frags = classify(f)
    if Fragment.P_HYPER_MAX in frags:
        assert Fragment.P_HYPER_REC in frags and Fragment.HYPER_MAX in frags
    assert Fragment.HYPER_REC in frags


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_substitute_without_free_variable_is_identity(f):
    assert substitute(f, "Z", TT) == f


@settings(max_examples=200, deadline=None)
@given(formulas(allow_min=True))
def test_generated_formulas_well_formed(f):
    check_well_formed(f)
    check_closed(f)


@settings(max_examples=200, deadline=None)
@given(formulas(prenex=True))
def test_prenex_generator_stays_in_fragment(f):
    assert admissible_for(Fragment.P_HYPER_MAX)(f)
    assert Fragment.P_HYPER_MAX in classify(f)


@settings(max_examples=100, deadline=None)
@given(formulas())
def test_plain_generator_stays_in_fragment(f):
    assert Fragment.HYPER_MAX in classify(f)
