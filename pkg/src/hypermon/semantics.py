"""Decision procedure for formula satisfaction on lasso hypertraces.

Every clause of the semantics only inspects suffixes of the trace, so a
formula denotes a set of trace positions.  Fixpoints are computed by Kleene
iteration; ``eval_positions_bruteforce`` computes them by enumerating all
subsets instead and serves as an independent cross-check.
"""

import itertools

from hypermon.formula import (
    And, Box, Diamond, Eq, Exists, Ff, Forall, Max, Min, Neq, Or, Rec, Tt,
    check_closed,
)
from hypermon.model import HypermonError


def eval_positions(f, t, sigma=None, rho=None):
    """The set of positions of ``t`` whose suffix satisfies ``f``."""
    return _Evaluator(t, _kleene).run(f, dict(sigma or {}), dict(rho or {}))


def eval_positions_bruteforce(f, t, sigma=None, rho=None):
    """Same as ``eval_positions`` but fixpoints come from subset enumeration."""
    return _Evaluator(t, _by_subsets).run(f, dict(sigma or {}), dict(rho or {}))


def satisfies(f, t):
    check_closed(f)
    return 0 in eval_positions(f, t)


def _kleene(step, universe, greatest):
    current = universe if greatest else frozenset()
    while True:
        nxt = step(current)
        if nxt == current:
            return current
        current = nxt


def _by_subsets(step, universe, greatest):
    members = sorted(universe)
    subsets = [frozenset(c) for r in range(len(members) + 1)
               for c in itertools.combinations(members, r)]
    if greatest:
        result = frozenset()
        for s in subsets:
            if s <= step(s):
                result |= s
        return result
    result = universe
    for s in subsets:
        if step(s) <= s:
            result &= s
    return result


class _Evaluator:
    def __init__(self, t, fixpoint):
        self.t = t
        self.fixpoint = fixpoint
        self.universe = frozenset(t.positions())

    def run(self, f, sigma, rho):
        for name, loc in sigma.items():
            if loc not in self.t.locations:
                raise HypermonError(f"location {loc!r} of {name} is not in the trace")
        return self.eval(f, sigma, rho)

    def eval(self, f, sigma, rho):
        t = self.t
        if isinstance(f, Tt):
            return self.universe
        if isinstance(f, Ff):
            return frozenset()
        if isinstance(f, And):
            return self.eval(f.left, sigma, rho) & self.eval(f.right, sigma, rho)
        if isinstance(f, Or):
            return self.eval(f.left, sigma, rho) | self.eval(f.right, sigma, rho)
        if isinstance(f, (Eq, Neq)):
            same = _lookup(sigma, f.left) == _lookup(sigma, f.right)
            return self.universe if same == isinstance(f, Eq) else frozenset()
        if isinstance(f, Box):
            loc = _lookup(sigma, f.var)
            after = self.eval(f.body, sigma, rho)
            return frozenset(i for i in self.universe
                             if t.maps[i][loc] != f.action or t.successor(i) in after)
        if isinstance(f, Diamond):
            loc = _lookup(sigma, f.var)
            after = self.eval(f.body, sigma, rho)
            return frozenset(i for i in self.universe
                             if t.maps[i][loc] == f.action and t.successor(i) in after)
        if isinstance(f, Exists):
            result = frozenset()
            for loc in t.locations:
                result |= self.eval(f.body, {**sigma, f.var: loc}, rho)
            return result
        if isinstance(f, Forall):
            result = self.universe
            for loc in t.locations:
                result &= self.eval(f.body, {**sigma, f.var: loc}, rho)
            return result
        if isinstance(f, (Max, Min)):
            def step(s):
                return self.eval(f.body, sigma, {**rho, f.var: s})
            return self.fixpoint(step, self.universe, isinstance(f, Max))
        if isinstance(f, Rec):
            if f.var not in rho:
                raise HypermonError(f"unbound recursion variable {f.var}")
            return rho[f.var]
        raise TypeError(f"not a formula: {f!r}")


def _lookup(sigma, var):
    if var not in sigma:
        raise HypermonError(f"unbound location variable {var}")
    return sigma[var]
