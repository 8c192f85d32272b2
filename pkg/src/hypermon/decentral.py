"""Decentralized monitors: located local monitors that exchange observed
actions by multicast, their synthesis, semantics and instrumentation."""

import functools
import random
from collections import deque

from hypermon._node import Node
from hypermon.central import (
    RunOutcome, SynthesisError, default_budget, _synth as _synth_central,
)
from hypermon.formula import (
    And, Box, Diamond, Eq, Exists, Ff, Forall, Max, Min, Neq, Or, Rec, Tt,
    check_closed, check_well_formed, is_prenex_shaped, is_quantifier_free,
)
from hypermon.model import NO, YES, BudgetExceeded, HypermonError
from hypermon.terms import (
    END_M, NO_M, YES_M, ActPrefix, Choice, Located, MAnd, MOr, ParAnd, ParOr,
    RecM, RecvPrefix, SendPrefix, VarM, VerdictM, combine_and, combine_or, fold,
    Prefix, normalize_group, recv, send, show, term_verdicts, unfold,
)


class NotStable(HypermonError):
    """An action step was attempted while some component still has to communicate."""


class AmbiguousReceive(HypermonError):
    """A component has several distinct ways to receive the same message."""


class Send(Node):
    __slots__ = fields = ("group", "const")

    def __str__(self):
        return f"(!{{{','.join(sorted(self.group))}}},{self.const})"


class Receive(Node):
    __slots__ = fields = ("loc", "const")

    def __str__(self):
        return f"(?{self.loc},{self.const})"


class LocatedSend(Node):
    __slots__ = fields = ("loc", "group", "const")

    def __str__(self):
        return f"{self.loc}:(!{{{','.join(sorted(self.group))}}},{self.const})"

    def sort_key(self):
        return (self.loc, self.const, tuple(sorted(self.group)))


# ------------------------------------------------------ local monitors

@functools.lru_cache(maxsize=1 << 18)
def _act(m, a):
    if isinstance(m, VerdictM):
        return frozenset([m])
    if isinstance(m, ActPrefix):
        return frozenset([m.cont]) if m.action == a else frozenset()
    if isinstance(m, (SendPrefix, RecvPrefix)):
        return frozenset()
    if isinstance(m, Choice):
        return _act(m.left, a) | _act(m.right, a)
    if isinstance(m, (ParAnd, ParOr)):
        op = type(m)
        rights = _act(m.right, a)
        return frozenset(op(x, y) for x in _act(m.left, a) for y in rights)
    if isinstance(m, RecM):
        return _act(unfold(m), a)
    if isinstance(m, VarM):
        raise HypermonError(f"cannot step open term with free variable {m.var}")
    raise TypeError(f"not a local monitor: {m!r}")


@functools.lru_cache(maxsize=1 << 18)
def _recv(m, loc, const):
    if isinstance(m, RecvPrefix):
        return frozenset([m.cont]) if loc in m.group and m.const == const else frozenset()
    if isinstance(m, Choice):
        return _recv(m.left, loc, const) | _recv(m.right, loc, const)
    if isinstance(m, (ParAnd, ParOr)):
        op = type(m)
        lefts = _recv(m.left, loc, const)
        rights = _recv(m.right, loc, const)
        if lefts and rights:
            return frozenset(op(x, y) for x in lefts for y in rights)
        if lefts:
            return frozenset(op(x, m.right) for x in lefts)
        if rights:
            return frozenset(op(m.left, y) for y in rights)
        return frozenset()
    if isinstance(m, RecM):
        return _recv(unfold(m), loc, const)
    return frozenset()


@functools.lru_cache(maxsize=1 << 18)
def _sends(m):
    if isinstance(m, SendPrefix):
        return frozenset([(Send(m.group, m.const), m.cont)])
    if isinstance(m, Choice):
        return _sends(m.left) | _sends(m.right)
    if isinstance(m, (ParAnd, ParOr)):
        op = type(m)
        out = {(c, op(x, m.right)) for c, x in _sends(m.left)}
        out |= {(c, op(m.left, y)) for c, y in _sends(m.right)}
        return frozenset(out)
    if isinstance(m, RecM):
        return _sends(unfold(m))
    return frozenset()


@functools.lru_cache(maxsize=1 << 18)
def _receivable(m):
    """The messages ``(sender, constant)`` that ``m`` could receive."""
    if isinstance(m, RecvPrefix):
        return frozenset((loc, m.const) for loc in m.group)
    if isinstance(m, (Choice, ParAnd, ParOr)):
        return _receivable(m.left) | _receivable(m.right)
    if isinstance(m, RecM):
        return _receivable(unfold(m))
    return frozenset()


def lmon_step(m, label):
    """Successors of a local monitor under an action (a string), a ``Send``
    label or a ``Receive`` label."""
    if isinstance(label, Receive):
        return _recv(m, label.loc, label.const)
    if isinstance(label, Send):
        return frozenset(n for c, n in _sends(m) if c is label)
    return _act(m, label)


def local_can_communicate(m):
    return bool(_sends(m)) or bool(_receivable(m))


def send_count(m):
    """Number of pending send prefixes in the active part of ``m``."""
    if isinstance(m, SendPrefix):
        return 1 + send_count(m.cont)
    if isinstance(m, (ParAnd, ParOr)):
        return send_count(m.left) + send_count(m.right)
    if isinstance(m, Choice):
        return max(send_count(m.left), send_count(m.right))
    if isinstance(m, Located):
        return send_count(m.mon)
    if isinstance(m, (MAnd, MOr)):
        return send_count(m.left) + send_count(m.right)
    return 0


# ---------------------------------------------------- decentralized monitors

@functools.lru_cache(maxsize=1 << 16)
def components(d):
    """The located monitors of ``d``, left to right."""
    if isinstance(d, Located):
        return (d,)
    return components(d.left) + components(d.right)


@functools.lru_cache(maxsize=1 << 18)
def dmon_receive(d, group, sender, const):
    """The unique ``N`` with ``d ~G:(?sender,const)~> N``."""
    if not group & _locations(d):
        return d
    if isinstance(d, Located):
        succ = _recv(d.mon, sender, const)
        if not succ:
            return d
        if len(succ) > 1:
            raise AmbiguousReceive(f"[{show(d.mon)}]@{d.loc} can receive "
                                   f"({sender},{const}) in {len(succ)} ways")
        return Located(next(iter(succ)), d.loc)
    return type(d)(dmon_receive(d.left, group, sender, const),
                   dmon_receive(d.right, group, sender, const))


@functools.lru_cache(maxsize=1 << 16)
def _locations(d):
    if isinstance(d, Located):
        return frozenset([d.loc])
    return _locations(d.left) | _locations(d.right)


def dmon_sends(d):
    """Every enabled multicast as ``(LocatedSend, successor)`` pairs."""
    return frozenset((label, fire(d, key)) for label, key in send_options(d))


def send_options(d):
    """Enabled multicasts as ``(label, key)`` pairs in scheduling order.

    ``key`` is the sender's component index and its local successor; it
    tells apart equal labels sent by different copies and is what ``fire``
    takes.
    """
    return sorted(_send_options(d), key=lambda e: (e[0].sort_key(), e[1][0], e[1][1]))


@functools.lru_cache(maxsize=1 << 16)
def _send_options(d):
    if isinstance(d, Located):
        return tuple((LocatedSend(d.loc, msg.group, msg.const), (0, j, n))
                     for j, (msg, n) in enumerate(_ordered_sends(d.mon)))
    left = _send_options(d.left)
    right = _send_options(d.right)
    if not right:
        return left
    shift = _size(d.left)
    return left + tuple((label, (i + shift, j, n)) for label, (i, j, n) in right)


@functools.lru_cache(maxsize=1 << 16)
def _ordered_sends(m):
    sends = _sends(m)
    if len(sends) < 2:
        return tuple(sends)
    return tuple(sorted(sends, key=lambda e: (e[0].const, sorted(e[0].group), show(e[1]))))


def fire(d, key):
    """Perform the multicast chosen by ``key`` (from ``send_options``)."""
    index, _, local = key
    sender = components(d)[index]
    label = None
    for msg, n in _sends(sender.mon):
        if n is local:
            label = msg
            break
    if label is None:
        raise HypermonError("the chosen send is not enabled")
    return _fire(d, index, Located(local, sender.loc), label.group, sender.loc, label.const)


def _fire(d, index, replacement, group, sender, const):
    if isinstance(d, Located):
        return replacement if index == 0 else dmon_receive(d, group, sender, const)
    size = _size(d.left)
    if index < size:
        return type(d)(_fire(d.left, index, replacement, group, sender, const),
                       dmon_receive(d.right, group, sender, const))
    return type(d)(dmon_receive(d.left, group, sender, const),
                   _fire(d.right, index - size, replacement, group, sender, const))


@functools.lru_cache(maxsize=1 << 16)
def _size(d):
    return 1 if isinstance(d, Located) else _size(d.left) + _size(d.right)


@functools.lru_cache(maxsize=1 << 16)
def can_communicate(d):
    return any(local_can_communicate(c.mon) for c in components(d))


def dmon_action_step(d, action_map, strict=True):
    """All ``N`` with ``d -A-> N``.

    A component that can neither perform its action nor communicate moves to
    ``end``.  A component that cannot act but can still communicate blocks
    the step; with ``strict`` this raises ``NotStable``.
    """
    succ = _dmon_act(d, action_map)
    if strict and not succ:
        raise NotStable("not in a stable state: a component must communicate first")
    return succ


@functools.lru_cache(maxsize=1 << 16)
def _dmon_act(d, a_map):
    if isinstance(d, Located):
        succ = _act(d.mon, a_map[d.loc])
        if succ:
            return frozenset(Located(n, d.loc) for n in succ)
        if local_can_communicate(d.mon):
            return frozenset()
        return frozenset([Located(END_M, d.loc)])
    op = type(d)
    rights = _dmon_act(d.right, a_map)
    return frozenset(op(x, y) for x in _dmon_act(d.left, a_map) for y in rights)


def acting_maps_exist(d, alphabet):
    """Whether ``d`` has an action step under some action map."""
    allowed = {}
    for c in components(d):
        if not local_can_communicate(c.mon):
            continue
        ok = allowed.get(c.loc, frozenset(alphabet))
        ok = frozenset(a for a in ok if _act(c.mon, a))
        if not ok:
            return False
        allowed[c.loc] = ok
    return True


def can_act(d, action_map):
    """Whether ``d`` has some ``action_map`` step, without building it."""
    return all(_act(c.mon, action_map[c.loc]) or not local_can_communicate(c.mon)
               for c in components(d))


def mixed_components(d, action_map):
    """Components that could both act and communicate; the action is allowed."""
    return [c for c in components(d)
            if _act(c.mon, action_map[c.loc]) and local_can_communicate(c.mon)]


@functools.lru_cache(maxsize=1 << 16)
def dmon_verdicts(d):
    if isinstance(d, Located):
        return term_verdicts(d.mon)
    left, right = dmon_verdicts(d.left), dmon_verdicts(d.right)
    return combine_and(left, right) if isinstance(d, MAnd) else combine_or(left, right)


def normalize_dmon(d):
    """Normalize the local monitors of a stable ``d``; the located structure
    is kept.  Components that may exchange messages are normalized jointly
    (see ``normalize_group``)."""
    return _normalize_dmon(d)


@functools.lru_cache(maxsize=1 << 16)
def _normalize_dmon(d):
    leaves = list(components(d))
    new = list(leaves)
    for group in partner_groups(d):
        terms = normalize_group(tuple(leaves[i].mon for i in group))
        for i, m in zip(group, terms):
            new[i] = Located(m, leaves[i].loc)
    return _replace_leaves(d, iter(new))


def _replace_leaves(d, it):
    if isinstance(d, Located):
        return next(it)
    left = _replace_leaves(d.left, it)
    return type(d)(left, _replace_leaves(d.right, it))


def partner_groups(d):
    """Indices (left to right) of components that may talk to each other.

    Candidates are the maximal subtrees whose components sit at pairwise
    distinct locations; inside one, components are linked when either
    mentions the other's location in a send or receive.
    """
    leaves = list(components(d))
    out = []
    for span in _distinct_spans(d, 0)[1]:
        out.extend(_linked(span, leaves))
    return out


def _distinct_spans(d, offset):
    """(locations of d's components, list of index spans) for the subtree."""
    if isinstance(d, Located):
        return [d.loc], [[offset]]
    locs_l, spans_l = _distinct_spans(d.left, offset)
    locs_r, spans_r = _distinct_spans(d.right, offset + len(locs_l))
    locs = locs_l + locs_r
    if len(set(locs)) == len(locs):
        return locs, [list(range(offset, offset + len(locs)))]
    return locs, spans_l + spans_r


def _linked(span, leaves):
    parent = {i: i for i in span}

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i

    for x, i in enumerate(span):
        for j in span[x + 1:]:
            a, b = leaves[i], leaves[j]
            if b.loc in mentions(a.mon) or a.loc in mentions(b.mon):
                parent[find(i)] = find(j)
    groups = {}
    for i in span:
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


@functools.lru_cache(maxsize=1 << 16)
def mentions(m):
    """Locations named by any send or receive in ``m``, recursion included."""
    if isinstance(m, (SendPrefix, RecvPrefix)):
        return m.group | mentions(m.cont)
    if isinstance(m, (Prefix, ActPrefix)):
        return mentions(m.cont)
    if isinstance(m, (Choice, ParAnd, ParOr)):
        return mentions(m.left) | mentions(m.right)
    if isinstance(m, RecM):
        return mentions(m.body)
    return frozenset()


# ---------------------------------------------------------------- schedulers

class Scheduler:
    """Chooses which enabled multicast fires next.

    ``Scheduler()`` always picks the least send in (location, constant,
    group) order; ``Scheduler(seed=k)`` picks uniformly with a seeded RNG.
    """

    def __init__(self, seed=None):
        self.seed = seed
        self.rng = None if seed is None else random.Random(seed)

    @classmethod
    def parse(cls, text):
        if text in (None, "lex"):
            return cls()
        if text.startswith("seed:"):
            try:
                return cls(int(text[5:]))
            except ValueError:
                pass
        raise HypermonError(f"unknown scheduler {text!r}; use lex or seed:N")

    def __str__(self):
        return "lex" if self.seed is None else f"seed:{self.seed}"

    def pick(self, enabled):
        """Choose from ``send_options`` output, which is already ordered."""
        if self.rng is None:
            return enabled[0]
        return self.rng.choice(enabled)


class SaturationError(HypermonError):
    pass


def saturate(d, scheduler=None, on_state=None):
    """Fire multicasts chosen by ``scheduler`` until none is enabled.

    Returns the final monitor and the list of fired sends.  ``on_state`` is
    called with every intermediate monitor, including the first and last.
    """
    scheduler = scheduler or Scheduler()
    cap = send_count(d) + 1
    fired = []
    if on_state:
        on_state(d)
    while True:
        enabled = send_options(d)
        if not enabled:
            return d, fired
        if len(fired) >= cap:
            raise SaturationError(f"saturation did not stop after {cap} sends")
        label, key = scheduler.pick(enabled)
        d = fire(d, key)
        fired.append(label)
        if on_state:
            on_state(d)


# ---------------------------------------------------------------- synthesis

def synth_dec(f, sigma, locations, alphabet):
    """The decentralized monitor of a PHyper-maxHML formula under ``sigma``."""
    check_well_formed(f)
    check_closed(f, sigma)
    if not is_prenex_shaped(f):
        raise SynthesisError("not in PHyper-maxHML: a quantifier occurs under a "
                             "fixed point or modality")
    locations = sorted(locations)
    alphabet = sorted(alphabet)
    for var, loc in sigma.items():
        if loc not in locations:
            raise SynthesisError(f"{var} is mapped to unknown location {loc!r}")
    return _synth_dmon(f, dict(sigma), locations, alphabet)


def _synth_dmon(f, sigma, locations, alphabet):
    if is_quantifier_free(f):
        if not sigma:
            verdicts = term_verdicts(_synth_central(f, sigma, locations, alphabet))
            if len(verdicts) != 1:
                raise SynthesisError(f"closed body {f} does not evaluate to a verdict")
            return Located(VerdictM(next(iter(verdicts))), locations[0])
        owners = sorted(set(sigma.values()))
        return fold(MOr, [Located(synth_local(f, loc, sigma, alphabet), loc)
                          for loc in owners])
    if isinstance(f, (Forall, Exists)):
        parts = [_synth_dmon(f.body, {**sigma, f.var: loc}, locations, alphabet)
                 for loc in locations]
        return fold(MAnd if isinstance(f, Forall) else MOr, parts)
    if isinstance(f, And):
        return MAnd(_synth_dmon(f.left, sigma, locations, alphabet),
                    _synth_dmon(f.right, sigma, locations, alphabet))
    if isinstance(f, Or):
        return MOr(_synth_dmon(f.left, sigma, locations, alphabet),
                   _synth_dmon(f.right, sigma, locations, alphabet))
    raise SynthesisError(f"not in PHyper-maxHML: {f}")


def synth_local(f, here, sigma, alphabet):
    """The local monitor placed at location ``here`` for a quantifier-free body."""
    if isinstance(f, Tt):
        return YES_M
    if isinstance(f, Ff):
        return NO_M
    if isinstance(f, Rec):
        return VarM(f.var)
    if isinstance(f, Max):
        return RecM(f.var, synth_local(f.body, here, sigma, alphabet))
    if isinstance(f, Min):
        raise SynthesisError("least fixed point not monitorable")
    if isinstance(f, And):
        return ParAnd(synth_local(f.left, here, sigma, alphabet),
                      synth_local(f.right, here, sigma, alphabet))
    if isinstance(f, Or):
        return ParOr(synth_local(f.left, here, sigma, alphabet),
                     synth_local(f.right, here, sigma, alphabet))
    if isinstance(f, (Eq, Neq)):
        same = sigma[f.left] == sigma[f.right]
        return YES_M if same == isinstance(f, Eq) else NO_M
    if isinstance(f, (Box, Diamond)):
        owner = sigma[f.var]
        other = YES_M if isinstance(f, Box) else NO_M
        cont = synth_local(f.body, here, sigma, alphabet)
        rest = [b for b in alphabet if b != f.action]
        if here == owner:
            group = set(sigma.values()) - {owner}
            branches = [ActPrefix(f.action, send(group, f.action, cont))]
            branches += [ActPrefix(b, send(group, b, other)) for b in rest]
            return fold(Choice, branches)
        inner = fold(Choice, [recv({owner}, f.action, cont)]
                     + [recv({owner}, c, other) for c in rest])
        return fold(Choice, [ActPrefix(b, inner) for b in alphabet])
    raise SynthesisError(f"not quantifier free: {f}")


# ---------------------------------------------------------- instrumentation

def run_dec(d, t, scheduler=None, max_states=None, with_log=False, on_transition=None):
    """Explore ``d`` instrumented on ``t``: action steps alternate with
    saturation, verdicts are checked at every intermediate monitor.

    ``on_transition(config, action_map, after_action, stable)`` is called for
    every action step, with ``stable`` the saturated (not yet normalized)
    monitor; the confluence checks use it.
    """
    scheduler = scheduler or Scheduler()
    budget = default_budget() if max_states is None else max_states
    first = {}
    conflict = [False]
    log = []
    notes = []

    def note_verdicts(depth):
        def seen_state(m):
            vs = dmon_verdicts(m)
            if len(vs) > 1:
                conflict[0] = True
            for v in vs:
                first.setdefault(v, depth)
        return seen_state

    initial, fired = saturate(d, scheduler, note_verdicts(0))
    if with_log and fired:
        log.append({"step": 0, "pos": 0, "sends": [str(c) for c in fired]})
    start = (normalize_dmon(initial), 0)
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        (mon, pos), depth = queue.popleft()
        a_map = t.maps[pos]
        nxt = t.successor(pos)
        mixed = mixed_components(mon, a_map)
        if mixed:
            notes.append(f"step {depth + 1}: action taken by a component that could "
                         f"also communicate: {', '.join(show(c) for c in mixed)}")
        for after in _dmon_act(mon, a_map):
            stable, fired = saturate(after, scheduler, note_verdicts(depth + 1))
            if on_transition:
                on_transition((mon, pos), a_map, after, stable)
            if with_log:
                log.append({"step": depth + 1, "pos": pos, "action_map": dict(a_map),
                            "sends": [str(c) for c in fired]})
            key = (normalize_dmon(stable), nxt)
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
        conflicting_verdicts=conflict[0],
        log=log + [{"note": n} for n in notes],
    )
