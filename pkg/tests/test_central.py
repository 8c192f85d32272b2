import pytest
from hypothesis import given, settings

from hypermon.central import (
    SynthesisError, cmon_step, cmon_verdicts, productive_successor, run_central, synth_central,
)
from hypermon.formula import Eq, TT, parse
from hypermon.model import NO, YES, BudgetExceeded, ActionMap, all_action_maps
from hypermon.semantics import satisfies
from hypermon.terms import END_M, NO_M, YES_M, alpha_equal_terms, parse_term

from conftest import PHI_A, PHI_E
from strategies import formulas, traces

A_AT_L1 = ActionMap({"l1": "a", "l2": "a"})


def test_tt_is_yes():
    assert synth_central(TT, {}, ["l1"], "ab") == YES_M


def test_location_equality():
    assert synth_central(Eq("p", "q"), {"p": "l1", "q": "l1"}, ["l1", "l2"], "ab") == YES_M
    assert synth_central(Eq("p", "q"), {"p": "l1", "q": "l2"}, ["l1", "l2"], "ab") == NO_M


def test_wolper_monitor_matches_displayed_term():
    m = synth_central(parse(PHI_E), {}, ["1", "2"], "ab")
    with open("tests/data/wolper_central.golden") as fh:
        assert alpha_equal_terms(m, parse_term(fh.read()))


def test_least_fixpoint_rejected():
    with pytest.raises(SynthesisError):
        synth_central(parse("exists p. min X. [a@p]X"), {}, ["l1"], "ab")


def test_verdict_steps_to_itself():
    assert cmon_step(YES_M, A_AT_L1) == {YES_M}


def test_prefix_step():
    m = parse_term("a@l1.no")
    assert cmon_step(m, A_AT_L1) == {NO_M}
    assert cmon_step(parse_term("b@l1.no"), A_AT_L1) == {END_M}


def test_sum_takes_both_rules():
    m = parse_term("a@l1.no + b@l1.yes")
    assert cmon_step(m, A_AT_L1) == {NO_M, END_M}
    assert cmon_step(m, A_AT_L1, productive=True) == {NO_M}
    assert productive_successor(m, A_AT_L1) == NO_M


def test_verdicts():
    assert cmon_verdicts(parse_term("yes (+) no")) == {YES}
    assert cmon_verdicts(parse_term("yes (x) no")) == {NO}


def test_wolper_runs(t_good, t_bad):
    m = synth_central(parse(PHI_E), {}, ["l1", "l2"], "ab")
    good = run_central(m, t_good)
    assert not good.reachable_no
    bad = run_central(m, t_bad)
    assert bad.reachable_no and bad.steps_to_first_no == 2


def test_consensus_runs(t1, t2):
    m = synth_central(parse(PHI_A), {}, ["l1", "l2", "l3"], "ab")
    assert run_central(m, t1).reachable_no
    assert not run_central(m, t2).reachable_no


def test_yes_monitor_run(t1):
    out = run_central(YES_M, t1)
    assert out.reachable_yes and out.steps_to_first_yes == 0


def test_budget_is_explicit(t1):
    m = synth_central(parse(PHI_A), {}, ["l1", "l2", "l3"], "ab")
    with pytest.raises(BudgetExceeded):
        run_central(m, t1, max_states=1)


def test_budget_from_environment(t1, monkeypatch):
    monkeypatch.setenv("HYPERMON_MAX_STATES", "1")
    m = synth_central(parse(PHI_A), {}, ["l1", "l2", "l3"], "ab")
    with pytest.raises(BudgetExceeded):
        run_central(m, t1)


@settings(max_examples=100, deadline=None)
@given(formulas(depth=5), traces(max_locations=2))
def test_reactive_and_productively_deterministic(f, t):
    m = synth_central(f, {}, t.locations, t.alphabet)
    for a_map in all_action_maps(t.alphabet, t.locations):
        assert cmon_step(m, a_map)
        assert len(cmon_step(m, a_map, productive=True)) == 1


@settings(max_examples=50, deadline=None)
@given(traces())
def test_verdicts_persist(t):
    for v in (YES_M, NO_M, END_M):
        assert cmon_verdicts(v) == {v.verdict}
        for a_map in all_action_maps(t.alphabet, t.locations):
            assert cmon_step(v, a_map) == {v}


@settings(max_examples=150, deadline=None)
@given(formulas(depth=5), traces())
def test_sound_and_violation_complete(f, t):
    out = run_central(synth_central(f, {}, t.locations, t.alphabet), t)
    sat = satisfies(f, t)
    assert out.reachable_no == (not sat)
    if out.reachable_yes:
        assert sat
