"""Actions, locations, action maps and lasso-shaped hypertraces."""

import enum
import itertools
import json
import math
import re
from collections.abc import Mapping

TOKEN = re.compile(r"[A-Za-z0-9_']+\Z")
ACTION_TOKEN = re.compile(r"[a-z0-9_]+\Z")


class HypermonError(Exception):
    """Base class for user-facing errors."""


class TraceError(HypermonError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class BudgetExceeded(HypermonError):
    """Raised when an exhaustive search visits more states than allowed."""


class Verdict(str, enum.Enum):
    YES = "yes"
    NO = "no"
    END = "end"

    def __str__(self):
        return self.value


YES, NO, END = Verdict.YES, Verdict.NO, Verdict.END


def check_alphabet(alphabet):
    alphabet = tuple(sorted(set(alphabet)))
    if len(alphabet) < 2:
        raise HypermonError("the action alphabet needs at least two actions")
    for a in alphabet:
        if not ACTION_TOKEN.match(a):
            raise HypermonError(f"bad action name {a!r}")
    return alphabet


def check_locations(locations):
    locations = tuple(sorted(set(locations)))
    if not locations:
        raise HypermonError("the location set must be non-empty")
    for loc in locations:
        if not TOKEN.match(loc):
            raise HypermonError(f"bad location name {loc!r}")
    return locations


class ActionMap(Mapping):
    """An immutable, hashable map from locations to actions."""

    __slots__ = ("_items", "_dict", "_hash")

    def __init__(self, assignment):
        items = tuple(sorted(dict(assignment).items()))
        self._items = items
        self._dict = dict(items)
        self._hash = hash(items)

    def __getitem__(self, loc):
        return self._dict[loc]

    def __iter__(self):
        return iter(self._dict)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if isinstance(other, ActionMap):
            return self._items == other._items
        return isinstance(other, Mapping) and dict(self._items) == dict(other)

    def __lt__(self, other):
        return self._items < other._items

    def __repr__(self):
        body = ", ".join(f"{k}:{v}" for k, v in self._items)
        return "{" + body + "}"

    def __reduce__(self):
        return (ActionMap, (self._dict,))


def all_action_maps(alphabet, locations):
    """Every total map from ``locations`` to ``alphabet``, lexicographically."""
    alphabet = sorted(alphabet)
    locations = sorted(locations)
    if not alphabet or not locations:
        raise HypermonError("alphabet and locations must be non-empty")
    return [ActionMap(zip(locations, combo))
            for combo in itertools.product(alphabet, repeat=len(locations))]


class LassoHypertrace:
    """A finite prefix followed by a loop repeated forever.

    Positions are integers in ``range(len(prefix) + len(loop))``; the position
    after the last loop element wraps back to ``len(prefix)``.
    """

    def __init__(self, locations, alphabet, prefix, loop):
        self.locations = tuple(sorted(locations))
        self.alphabet = tuple(sorted(alphabet))
        self.prefix = tuple(ActionMap(m) for m in prefix)
        self.loop = tuple(ActionMap(m) for m in loop)
        validate_trace(self)
        self.maps = self.prefix + self.loop

    @property
    def size(self):
        return len(self.prefix) + len(self.loop)

    def positions(self):
        return range(self.size)

    def successor(self, pos):
        return pos + 1 if pos + 1 < self.size else len(self.prefix)

    def __eq__(self, other):
        return (isinstance(other, LassoHypertrace)
                and (self.locations, self.alphabet, self.prefix, self.loop)
                == (other.locations, other.alphabet, other.prefix, other.loop))

    def __hash__(self):
        return hash((self.locations, self.alphabet, self.prefix, self.loop))

    def __repr__(self):
        return f"LassoHypertrace(prefix={list(self.prefix)}, loop={list(self.loop)})"

    def to_json(self):
        return {
            "locations": list(self.locations),
            "actions": list(self.alphabet),
            "prefix": [dict(m) for m in self.prefix],
            "loop": [dict(m) for m in self.loop],
        }


def head_tail(t, pos):
    """The action map at ``pos`` and the position of the remaining suffix."""
    return t.maps[pos], t.successor(pos)


def trace_problems(locations, alphabet, prefix, loop):
    problems = []
    if not locations:
        problems.append("no locations declared")
    if len(set(alphabet)) < 2:
        problems.append("alphabet needs at least two actions")
    if not loop:
        problems.append("empty loop")
    locs = set(locations)
    acts = set(alphabet)
    for part, maps in (("prefix", prefix), ("loop", loop)):
        for i, m in enumerate(maps):
            keys = set(m)
            if keys - locs:
                problems.append(f"{part}[{i}]: unknown location(s) {sorted(keys - locs)}")
            if locs - keys:
                problems.append(f"{part}[{i}]: partial action map, missing {sorted(locs - keys)}")
            bad = sorted({a for a in m.values() if a not in acts})
            if bad:
                problems.append(f"{part}[{i}]: unknown action(s) {bad}")
    return problems


def validate_trace(t):
    problems = trace_problems(t.locations, t.alphabet, t.prefix, t.loop)
    if problems:
        raise TraceError(problems)


def trace_from_json(data):
    try:
        locations = data["locations"]
        alphabet = data["actions"]
        prefix = data.get("prefix", [])
        loop = data["loop"]
    except (KeyError, TypeError, AttributeError) as exc:
        raise TraceError([f"malformed trace document: missing {exc}"]) from None
    if not all(isinstance(m, dict) for m in list(prefix) + list(loop)):
        raise TraceError(["action maps must be JSON objects"])
    return LassoHypertrace(locations, alphabet, prefix, loop)


def load_trace(path):
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TraceError([f"invalid JSON: {exc}"]) from None
    return trace_from_json(data)


def uniform_trace(locations, alphabet, words):
    """Build a lasso from per-location words given as ``(prefix, loop)``.

    ``words`` maps each location to a pair of strings of single-character
    actions, e.g. ``{"1": ("", "a"), "2": ("", "ab")}`` for a^ω and (ab)^ω.
    Prefix and loop lengths are aligned by unrolling.
    """
    p = max(len(pre) for pre, _ in words.values())
    q = math.lcm(*(len(lp) for _, lp in words.values()))

    def at(loc, i):
        pre, lp = words[loc]
        return pre[i] if i < len(pre) else lp[(i - len(pre)) % len(lp)]

    prefix = [{loc: at(loc, i) for loc in locations} for i in range(p)]
    loop = [{loc: at(loc, i) for loc in locations} for i in range(p, p + q)]
    return LassoHypertrace(locations, alphabet, prefix, loop)

