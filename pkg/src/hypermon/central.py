"""Centralized monitors: synthesis, small-step semantics, verdicts and
exhaustive instrumentation over lasso hypertraces."""

import dataclasses
import functools
import os
from collections import deque

from hypermon.formula import (
    And, Box, Diamond, Eq, Exists, Ff, Forall, Max, Min, Neq, Or, Rec, Tt,
    check_closed, check_well_formed,
)
from hypermon.model import BudgetExceeded, HypermonError, NO, YES
from hypermon.terms import (
    END_M, NO_M, YES_M, Choice, ParAnd, ParOr, Prefix, RecM, VarM, VerdictM,
    fold, normalize, term_verdicts, unfold,
)

DEFAULT_MAX_STATES = 1_000_000


class SynthesisError(HypermonError):
    pass


def default_budget():
    raw = os.environ.get("HYPERMON_MAX_STATES")
    if raw is None:
        return DEFAULT_MAX_STATES
    try:
        value = int(raw)
    except ValueError:
        raise HypermonError(f"HYPERMON_MAX_STATES must be an integer, got {raw!r}") from None
    if value < 1:
        raise HypermonError("HYPERMON_MAX_STATES must be positive")
    return value


@dataclasses.dataclass
class RunOutcome:
    reachable_yes: bool
    reachable_no: bool
    steps_to_first_yes: object
    steps_to_first_no: object
    explored_states: int
    conflicting_verdicts: bool = False
    log: list = dataclasses.field(default_factory=list)

    def verdicts(self):
        return (self.reachable_yes, self.reachable_no)

    def to_json(self, with_log=False):
        data = dataclasses.asdict(self)
        if not with_log:
            data.pop("log")
        return data


# --------------------------------------------------------------- synthesis

def synth_central(f, sigma, locations, alphabet):
    """The centralized monitor of a Hyper-maxHML formula under ``sigma``."""
    check_well_formed(f)
    check_closed(f, sigma)
    locations = sorted(locations)
    alphabet = sorted(alphabet)
    for var, loc in sigma.items():
        if loc not in locations:
            raise SynthesisError(f"{var} is mapped to unknown location {loc!r}")
    return _synth(f, dict(sigma), locations, alphabet)


def _synth(f, sigma, locations, alphabet):
    if isinstance(f, Tt):
        return YES_M
    if isinstance(f, Ff):
        return NO_M
    if isinstance(f, Rec):
        return VarM(f.var)
    if isinstance(f, Max):
        return RecM(f.var, _synth(f.body, sigma, locations, alphabet))
    if isinstance(f, Min):
        raise SynthesisError("least fixed point not monitorable")
    if isinstance(f, And):
        return ParAnd(_synth(f.left, sigma, locations, alphabet),
                      _synth(f.right, sigma, locations, alphabet))
    if isinstance(f, Or):
        return ParOr(_synth(f.left, sigma, locations, alphabet),
                     _synth(f.right, sigma, locations, alphabet))
    if isinstance(f, (Forall, Exists)):
        parts = [_synth(f.body, {**sigma, f.var: loc}, locations, alphabet)
                 for loc in locations]
        return fold(ParAnd if isinstance(f, Forall) else ParOr, parts)
    if isinstance(f, (Eq, Neq)):
        same = sigma[f.left] == sigma[f.right]
        return YES_M if same == isinstance(f, Eq) else NO_M
    if isinstance(f, (Box, Diamond)):
        loc = sigma[f.var]
        other = YES_M if isinstance(f, Box) else NO_M
        branches = [Prefix(f.action, loc, _synth(f.body, sigma, locations, alphabet))]
        branches += [Prefix(b, loc, other) for b in alphabet if b != f.action]
        return fold(Choice, branches)
    raise TypeError(f"not a formula: {f!r}")


# ----------------------------------------------------------------- stepping

def cmon_step(m, action_map, productive=False):
    """All ``m'`` with ``m -A-> m'``.

    With ``productive`` the rule sending a mismatching prefix to ``end`` is
    disabled; for synthesized monitors exactly one successor remains.
    """
    return _step(m, action_map, productive)


@functools.lru_cache(maxsize=1 << 18)
def _step(m, a_map, productive):
    if isinstance(m, VerdictM):
        return frozenset([m])
    if isinstance(m, Prefix):
        if a_map[m.loc] == m.action:
            return frozenset([m.cont])
        return frozenset() if productive else frozenset([END_M])
    if isinstance(m, Choice):
        return _step(m.left, a_map, productive) | _step(m.right, a_map, productive)
    if isinstance(m, (ParAnd, ParOr)):
        op = type(m)
        rights = _step(m.right, a_map, productive)
        return frozenset(op(x, y) for x in _step(m.left, a_map, productive) for y in rights)
    if isinstance(m, RecM):
        return _step(unfold(m), a_map, productive)
    if isinstance(m, VarM):
        raise HypermonError(f"cannot step open term with free variable {m.var}")
    raise TypeError(f"not a centralized monitor: {m!r}")


def productive_successor(m, action_map):
    """The unique successor of a synthesized monitor that avoids junk ``end``s."""
    succ = cmon_step(m, action_map, productive=True)
    if len(succ) != 1:
        raise HypermonError(f"expected one productive successor, found {len(succ)}")
    return next(iter(succ))


def cmon_verdicts(m):
    return term_verdicts(m)


# ---------------------------------------------------------- instrumentation

def run_central(m, t, max_states=None):
    """Exhaustively explore ``m`` instrumented on ``t``.

    Configurations are (normalized term, position) pairs explored breadth
    first, so the recorded step counts are the least numbers of action steps
    after which a verdict can be emitted.  A step of a sum to ``end`` is not
    explored when the sum has another successor: an ``end`` operand can
    only lose ``yes``/``no`` verdicts compared to any alternative.
    """
    budget = default_budget() if max_states is None else max_states
    start = (normalize(m), 0)
    seen = {start}
    queue = deque([(start, 0)])
    first = {}
    conflict = False
    while queue:
        (term, pos), depth = queue.popleft()
        verdicts = term_verdicts(term)
        if len(verdicts) > 1:
            conflict = True
        for v in verdicts:
            first.setdefault(v, depth)
        a_map = t.maps[pos]
        nxt = t.successor(pos)
        for succ in _explore_step(term, a_map):
            key = (normalize(succ), nxt)
            if key not in seen:
                seen.add(key)
                if len(seen) > budget:
                    raise BudgetExceeded(f"state budget of {budget} configurations exhausted")
                queue.append((key, depth + 1))
    return RunOutcome(
        reachable_yes=YES in first,
        reachable_no=NO in first,
        steps_to_first_yes=first.get(YES),
        steps_to_first_no=first.get(NO),
        explored_states=len(seen),
        conflicting_verdicts=conflict,
    )


@functools.lru_cache(maxsize=1 << 18)
def _explore_step(m, a_map):
    if isinstance(m, (ParAnd, ParOr)):
        op = type(m)
        rights = _explore_step(m.right, a_map)
        return frozenset(op(x, y) for x in _explore_step(m.left, a_map) for y in rights)
    if isinstance(m, RecM):
        return _explore_step(unfold(m), a_map)
    succ = _step(m, a_map, False)
    if END_M in succ and len(succ) > 1:
        succ = succ - {END_M}
    return succ
