"""The ten acceptance criteria, each at its stated size and time limit."""

import contextlib
import time

from hypermon.central import run_central, synth_central
from hypermon.decentral import (
    LocatedSend, can_communicate, dmon_action_step, dmon_sends, dmon_verdicts, saturate,
    synth_dec,
)
from hypermon.formula import parse
from hypermon.model import NO, ActionMap
from hypermon.semantics import satisfies
from hypermon.terms import alpha_equal_terms, parse_dmon, parse_term
from hypermon.verify import (
    GenConfig, bisim_suite, check_weak_bisim, differential_suite, oracle_suite,
    principled_suite, random_confluence_suite, soundness_suite,
)

from conftest import ACCEPTANCE, DIFFERENT_STARTS, PHI_A, PHI_E


@contextlib.contextmanager
def criterion(number, title, limit):
    started = time.perf_counter()
    status, note = "FAIL", ""
    try:
        yield
        elapsed = time.perf_counter() - started
        if elapsed > limit:
            note = f" (over the {limit:g}s limit)"
            raise AssertionError(f"took {elapsed:.1f}s, limit {limit:g}s")
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - started
        ACCEPTANCE.append(f"{status} {number:2d}. {title} [{elapsed:.2f}s]{note}")


def suite_line(report):
    assert report.ok, report.failures[:3]
    assert report.skipped == 0, report.details
    assert report.passed == report.samples


def test_01_consensus_oracle(t1, t2):
    with criterion(1, "consensus property: T1 unsat, T2 sat", 1):
        f = parse(PHI_A)
        assert not satisfies(f, t1)
        assert satisfies(f, t2)


def test_02_wolper_centralized(t_good, t_bad):
    with criterion(2, "Wolper property, centralized runs and displayed monitor", 1):
        m = synth_central(parse(PHI_E), {}, ["l1", "l2"], "ab")
        assert not run_central(m, t_good).reachable_no
        bad = run_central(m, t_bad)
        assert bad.reachable_no and bad.steps_to_first_no == 2
        with open("tests/data/wolper_central.golden") as fh:
            shown = parse_term(fh.read())
        assert alpha_equal_terms(synth_central(parse(PHI_E), {}, ["1", "2"], "ab"), shown)


def test_03_different_starts_decentralized():
    with criterion(3, "different-starts formula, decentralized monitor golden", 1):
        d = synth_dec(parse(DIFFERENT_STARTS), {}, ["1", "2"], "ab")
        with open("tests/data/different_starts_dec.golden") as fh:
            assert d == parse_dmon(fh.read())


def test_04_four_location_run():
    with criterion(4, "four-location toy run, step by step", 1):
        toy = parse_dmon("""
            [a.!{l2,l3}:a.yes]@l1 /\\ [b.?{l1}:a.yes]@l2
            /\\ [a.?{l1}:a.no]@l3 /\\ [b.yes]@l4
        """)
        a_map = ActionMap({"l1": "a", "l2": "b", "l3": "a", "l4": "a"})
        (after,) = dmon_action_step(toy, a_map)
        assert after == parse_dmon(
            "[!{l2,l3}:a.yes]@l1 /\\ [?{l1}:a.yes]@l2 /\\ [?{l1}:a.no]@l3 /\\ [end]@l4")
        assert can_communicate(after)
        ((label, nxt),) = dmon_sends(after)
        assert label == LocatedSend("l1", frozenset({"l2", "l3"}), "a")
        assert nxt == parse_dmon("[yes]@l1 /\\ [yes]@l2 /\\ [no]@l3 /\\ [end]@l4")
        assert not can_communicate(nxt)
        assert saturate(after) == (nxt, [label])
        assert dmon_verdicts(nxt) == {NO}


def test_05_soundness_and_completeness():
    with criterion(5, "soundness and violation completeness, 500 cases", 300):
        suite_line(soundness_suite(GenConfig(sample_count=500), "central"))


def test_06_differential():
    with criterion(6, "centralized vs decentralized verdicts, 200 cases", 300):
        suite_line(differential_suite(GenConfig(sample_count=200)))


def test_07_principled():
    with criterion(7, "principled synthesis properties, 50 formulas", 600):
        suite_line(principled_suite(GenConfig(sample_count=50)))


def test_08_confluence():
    with criterion(8, "scheduler confluence, 50 cases x 11 schedulers", 300):
        suite_line(random_confluence_suite(GenConfig(sample_count=50), 10))


def test_09_oracle_self_check():
    with criterion(9, "Kleene iteration equals subset enumeration", 300):
        suite_line(oracle_suite(GenConfig(sample_count=500), max_positions=4, max_fixpoints=1))


def test_10_weak_bisimulation():
    with criterion(10, "weak bisimulation, 2 examples + 30 formulas", 300):
        for text in (PHI_E, DIFFERENT_STARTS):
            report = check_weak_bisim(parse(text), {}, ["1", "2"], "ab")
            assert report.passed, report.condition_failures
        suite_line(bisim_suite(GenConfig(sample_count=30), max_locations=2))
