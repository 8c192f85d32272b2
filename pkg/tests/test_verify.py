import random

import pytest
from hypothesis import given, settings, strategies as st

from hypermon.formula import Diamond, Fragment, TT, parse, subformulas
from hypermon.verify import (
    GenConfig, PROPERTIES, admissible_for, check_principled, check_weak_bisim,
    confluence_suite, differential, differential_suite, oracle_suite, random_case,
    shrink, soundness_suite,
)

from conftest import DIFFERENT_STARTS, PHI_E

SMALL = GenConfig(sample_count=15, seed=3)


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(alphabet_size=1)
    with pytest.raises(ValueError):
        GenConfig(max_loop=0)
    assert GenConfig(max_prefix=2, max_loop=3).horizon() == 12


def test_bisim_on_tt():
    report = check_weak_bisim(TT, {}, ["l1", "l2"], "ab")
    assert report.passed and report.pairs_checked == 1


@pytest.mark.parametrize("text", [PHI_E, DIFFERENT_STARTS])
def test_bisim_on_examples(text):
    report = check_weak_bisim(parse(text), {}, ["1", "2"], "ab")
    assert report.passed, report.condition_failures
    assert report.sampled_rounds == 0


@pytest.mark.parametrize("text", [PHI_E, DIFFERENT_STARTS])
def test_principled_on_examples(text):
    report = check_principled(parse(text), {}, ["1", "2"], "ab", horizon=6)
    assert set(report.results) == set(PROPERTIES)
    assert report.passed, report.results


def test_principled_reports_failures():
    # a least fixed point cannot be synthesized at all
    with pytest.raises(Exception):
        check_principled(parse("exists p. min X. [a@p]X"), {}, ["1"], "ab", horizon=2)


def test_differential_on_wolper(t_bad, t_good):
    bad = differential(parse(PHI_E), t_bad)
    assert bad["match"] and bad["central"]["reachable_no"] and bad["decentralized"]["reachable_no"]
    assert differential(parse(PHI_E), t_good)["match"]


def test_differential_on_tt(t1):
    record = differential(TT, t1)
    assert record["central"]["reachable_yes"] and record["decentralized"]["reachable_yes"]


def test_confluence_on_examples(t_bad):
    for text in (PHI_E, DIFFERENT_STARTS):
        f = parse(text)
        report = confluence_suite(f, t_bad, 10)
        assert report["ok"] and report["boundaries"] > 0, report["divergences"]


def test_small_suites_pass():
    for report in (soundness_suite(SMALL, "central"), soundness_suite(SMALL, "dec"),
                   differential_suite(SMALL), oracle_suite(SMALL)):
        assert report.ok and report.samples == 15, report.to_json()


def test_suites_are_reproducible():
    a = differential_suite(SMALL).to_json()
    b = differential_suite(SMALL).to_json()
    a.pop("seconds"), b.pop("seconds")
    assert a == b


def has_diamond_b(f, t):
    return any(isinstance(g, Diamond) and g.action == "b" for g in subformulas(f))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_shrinking_keeps_the_failure(seed):
    rng = random.Random(seed)
    f, t = random_case(rng, GenConfig())
    if not has_diamond_b(f, t):
        return
    ok = admissible_for(Fragment.HYPER_MAX)
    g, u = shrink(f, t, has_diamond_b, ok)
    assert has_diamond_b(g, u) and ok(g)
    assert len(list(subformulas(g))) <= len(list(subformulas(f)))
    assert u.size <= t.size
