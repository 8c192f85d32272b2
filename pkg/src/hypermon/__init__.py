"""Runtime monitors for hyperproperties written in a recursive
Hennessy-Milner logic with location quantifiers."""

from hypermon.central import RunOutcome, run_central, synth_central
from hypermon.decentral import Scheduler, run_dec, saturate, synth_dec
from hypermon.formula import Fragment, classify, parse, to_text
from hypermon.model import BudgetExceeded, HypermonError, LassoHypertrace, Verdict
from hypermon.semantics import eval_positions, satisfies
from hypermon.terms import parse_dmon, parse_term, show

__all__ = [
    "BudgetExceeded", "Fragment", "HypermonError", "LassoHypertrace", "RunOutcome",
    "Scheduler", "Verdict", "classify", "eval_positions", "parse", "parse_dmon",
    "parse_term", "run_central", "run_dec", "satisfies", "saturate", "show",
    "synth_central", "synth_dec", "to_text",
]
