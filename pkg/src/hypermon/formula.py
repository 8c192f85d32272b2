"""Hyper-recHML formulas: syntax tree, concrete grammar, well-formedness,
substitution and fragment classification."""

import enum
import functools
import re

from hypermon._node import Node
from hypermon.model import HypermonError


class FormulaSyntaxError(HypermonError):
    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__(f"{message} at line {line}, column {column}")


class WellFormednessError(HypermonError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class Formula(Node):
    __slots__ = ()

    def __str__(self):
        return to_text(self)


class Tt(Formula):
    __slots__ = ()


class Ff(Formula):
    __slots__ = ()


class And(Formula):
    __slots__ = fields = ("left", "right")


class Or(Formula):
    __slots__ = fields = ("left", "right")


class Max(Formula):
    __slots__ = fields = ("var", "body")


class Min(Formula):
    __slots__ = fields = ("var", "body")


class Rec(Formula):
    __slots__ = fields = ("var",)


class Exists(Formula):
    __slots__ = fields = ("var", "body")


class Forall(Formula):
    __slots__ = fields = ("var", "body")


class Eq(Formula):
    __slots__ = fields = ("left", "right")


class Neq(Formula):
    __slots__ = fields = ("left", "right")


class Box(Formula):
    __slots__ = fields = ("action", "var", "body")


class Diamond(Formula):
    __slots__ = fields = ("action", "var", "body")


TT = Tt()
FF = Ff()

FIXPOINTS = (Max, Min)
QUANTIFIERS = (Exists, Forall)
MODALITIES = (Box, Diamond)
BINARY = (And, Or)


def conj(parts):
    """Left-nested conjunction; ``tt`` when empty."""
    parts = list(parts)
    return functools.reduce(And, parts) if parts else TT


def disj(parts):
    """Left-nested disjunction; ``ff`` when empty."""
    parts = list(parts)
    return functools.reduce(Or, parts) if parts else FF


class Fragment(str, enum.Enum):
    HYPER_REC = "Hyper-recHML"
    HYPER_MAX = "Hyper-maxHML"
    P_HYPER_REC = "PHyper-recHML"
    P_HYPER_MAX = "PHyper-maxHML"
    QF = "Qf"

    def __str__(self):
        return self.value


# ---------------------------------------------------------------- traversal

def children(f):
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, FIXPOINTS + QUANTIFIERS + MODALITIES):
        return (f.body,)
    return ()


def rebuild(f, kids):
    if isinstance(f, BINARY):
        return type(f)(*kids)
    if isinstance(f, FIXPOINTS + QUANTIFIERS):
        return type(f)(f.var, kids[0])
    if isinstance(f, MODALITIES):
        return type(f)(f.action, f.var, kids[0])
    return f


def subformulas(f):
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(children(g))


def free_vars(f):
    """Free location variables and free recursion variables of ``f``."""
    return _free_vars(f)


@functools.lru_cache(maxsize=1 << 16)
def _free_vars(f):
    if isinstance(f, Rec):
        return frozenset(), frozenset([f.var])
    if isinstance(f, (Eq, Neq)):
        return frozenset([f.left, f.right]), frozenset()
    locs, recs = frozenset(), frozenset()
    for kid in children(f):
        kl, kr = _free_vars(kid)
        locs |= kl
        recs |= kr
    if isinstance(f, QUANTIFIERS):
        locs -= {f.var}
    elif isinstance(f, FIXPOINTS):
        recs -= {f.var}
    elif isinstance(f, MODALITIES):
        locs |= {f.var}
    return locs, recs


def all_names(f):
    names = set()
    for g in subformulas(f):
        if isinstance(g, (Rec,) + FIXPOINTS + QUANTIFIERS + MODALITIES):
            names.add(g.var)
        elif isinstance(g, (Eq, Neq)):
            names.update((g.left, g.right))
    return names


def fresh_name(base, used):
    i = 1
    while f"{base}{i}" in used:
        i += 1
    return f"{base}{i}"


# ------------------------------------------------------------ substitution

def rename_loc(f, old, new):
    """Replace free occurrences of location variable ``old`` by ``new``."""
    if isinstance(f, (Eq, Neq)):
        return type(f)(new if f.left == old else f.left,
                       new if f.right == old else f.right)
    if isinstance(f, QUANTIFIERS) and f.var == old:
        return f
    if isinstance(f, MODALITIES):
        return type(f)(f.action, new if f.var == old else f.var,
                       rename_loc(f.body, old, new))
    kids = children(f)
    if not kids:
        return f
    return rebuild(f, [rename_loc(k, old, new) for k in kids])


def substitute(f, x, g):
    """Capture-avoiding replacement of the free recursion variable ``x`` by ``g``."""
    g_locs, g_recs = free_vars(g)
    used = all_names(f) | all_names(g)
    return _subst(f, x, g, g_locs, g_recs, used)


def _subst(f, x, g, g_locs, g_recs, used):
    if x not in free_vars(f)[1]:
        return f
    if isinstance(f, Rec):
        return g
    if isinstance(f, FIXPOINTS):
        var, body = f.var, f.body
        if var in g_recs:
            new = _prime(var, used)
            used.add(new)
            body = _subst(body, var, Rec(new), frozenset(), frozenset([new]), used)
            var = new
        return type(f)(var, _subst(body, x, g, g_locs, g_recs, used))
    if isinstance(f, QUANTIFIERS):
        var, body = f.var, f.body
        if var in g_locs:
            new = _prime(var, used)
            used.add(new)
            body = rename_loc(body, var, new)
            var = new
        return type(f)(var, _subst(body, x, g, g_locs, g_recs, used))
    return rebuild(f, [_subst(k, x, g, g_locs, g_recs, used) for k in children(f)])


def _prime(name, used):
    new = name + "'"
    while new in used:
        new += "'"
    return new


# ---------------------------------------------------------- normalization

def normalize(f, keep=()):
    """Alpha-rename binders so that all bound variables are pairwise distinct
    and distinct from free ones.  Clashing binders get fresh names ``p1, p2, …``
    (location variables) or ``X1, X2, …`` (recursion variables); ``keep`` lists
    extra names to avoid, e.g. the domain of a location environment."""
    locs, recs = free_vars(f)
    used = set(locs) | set(recs) | all_names(f) | set(keep)
    taken = set(locs) | set(recs) | set(keep)
    return _normalize(f, {}, used, taken)


def _normalize(f, env, used, taken):
    if isinstance(f, Rec):
        return Rec(env.get(f.var, f.var))
    if isinstance(f, (Eq, Neq)):
        return type(f)(env.get(f.left, f.left), env.get(f.right, f.right))
    if isinstance(f, MODALITIES):
        return type(f)(f.action, env.get(f.var, f.var),
                       _normalize(f.body, env, used, taken))
    if isinstance(f, FIXPOINTS + QUANTIFIERS):
        var = f.var
        if var in taken:
            var = fresh_name("X" if isinstance(f, FIXPOINTS) else "p", used)
            used.add(var)
        taken.add(var)
        inner = dict(env)
        inner[f.var] = var
        return type(f)(var, _normalize(f.body, inner, used, taken))
    kids = children(f)
    if not kids:
        return f
    return rebuild(f, [_normalize(k, env, used, taken) for k in kids])


def canonical(f):
    """Rename every binder positionally; two formulas are alpha-equivalent
    iff their canonical forms are identical."""
    counter = [0]

    def go(g, env):
        if isinstance(g, Rec):
            return Rec(env.get(g.var, g.var))
        if isinstance(g, (Eq, Neq)):
            return type(g)(env.get(g.left, g.left), env.get(g.right, g.right))
        if isinstance(g, MODALITIES):
            return type(g)(g.action, env.get(g.var, g.var), go(g.body, env))
        if isinstance(g, FIXPOINTS + QUANTIFIERS):
            counter[0] += 1
            name = f"_{counter[0]}"
            return type(g)(name, go(g.body, {**env, g.var: name}))
        kids = children(g)
        return rebuild(g, [go(k, env) for k in kids]) if kids else g

    return go(f, {})


def alpha_equal(f, g):
    return canonical(f) is canonical(g)


# --------------------------------------------------------- well-formedness

def check_well_formed(f):
    """Raise ``WellFormednessError`` listing every unguarded recursion variable."""
    problems = []

    def go(g, unguarded):
        if isinstance(g, Rec):
            if g.var in unguarded:
                problems.append(f"unguarded variable {g.var} in '{to_text(unguarded[g.var])}'")
        elif isinstance(g, FIXPOINTS):
            go(g.body, {**unguarded, g.var: g})
        elif isinstance(g, MODALITIES):
            go(g.body, {})
        else:
            for kid in children(g):
                go(kid, unguarded)

    go(f, {})
    if problems:
        raise WellFormednessError(problems)


def is_guarded(f):
    try:
        check_well_formed(f)
    except WellFormednessError:
        return False
    return True


def check_closed(f, sigma_domain=()):
    locs, recs = free_vars(f)
    problems = []
    missing = sorted(locs - set(sigma_domain))
    if missing:
        problems.append(f"unbound location variable(s) {', '.join(missing)}")
    if recs:
        problems.append(f"unbound recursion variable(s) {', '.join(sorted(recs))}")
    if problems:
        raise WellFormednessError(problems)


def check_alphabet_use(f, alphabet):
    bad = sorted({g.action for g in subformulas(f)
                  if isinstance(g, MODALITIES) and g.action not in alphabet})
    if bad:
        raise WellFormednessError([f"unknown action(s) {', '.join(bad)}"])


# ------------------------------------------------------------ fragments

def has_min(f):
    return any(isinstance(g, Min) for g in subformulas(f))


def is_quantifier_free(f):
    return not any(isinstance(g, QUANTIFIERS) for g in subformulas(f))


def is_prenex_shaped(f):
    """Quantifiers occur only under quantifiers and boolean connectives."""
    if isinstance(f, QUANTIFIERS):
        return is_prenex_shaped(f.body)
    if isinstance(f, BINARY):
        return is_prenex_shaped(f.left) and is_prenex_shaped(f.right)
    return is_quantifier_free(f)


def classify(f):
    frags = {Fragment.HYPER_REC}
    no_min = not has_min(f)
    if no_min:
        frags.add(Fragment.HYPER_MAX)
    if is_prenex_shaped(f):
        frags.add(Fragment.P_HYPER_REC)
        if no_min:
            frags.add(Fragment.P_HYPER_MAX)
    if is_quantifier_free(f):
        frags.add(Fragment.QF)
    return frags


# --------------------------------------------------------------- printing

def to_text(f):
    return f.cached_text(lambda g: _text(g, 0, True))


_OR, _AND, _UNARY = 0, 1, 2


def _text(f, prec, tail):
    if isinstance(f, Tt):
        return "tt"
    if isinstance(f, Ff):
        return "ff"
    if isinstance(f, Rec):
        return f.var
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, Neq):
        return f"{f.left} != {f.right}"
    if isinstance(f, Box):
        return f"[{f.action}@{f.var}]" + _text(f.body, _UNARY, tail)
    if isinstance(f, Diamond):
        return f"<{f.action}@{f.var}>" + _text(f.body, _UNARY, tail)
    if isinstance(f, FIXPOINTS + QUANTIFIERS):
        word = {Max: "max", Min: "min", Exists: "exists", Forall: "forall"}[type(f)]
        s = f"{word} {f.var}. " + _text(f.body, _OR, True)
        return s if tail else f"({s})"
    if isinstance(f, Or):
        if prec > _OR:
            return "(" + _text(f, _OR, True) + ")"
        return _text(f.left, _OR, False) + " \\/ " + _text(f.right, _AND, tail)
    if isinstance(f, And):
        if prec > _AND:
            return "(" + _text(f, _AND, True) + ")"
        return _text(f.left, _AND, False) + " /\\ " + _text(f.right, _UNARY, tail)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<sym>/\\|\\/|!=|[()\[\]<>@.=,{}:!?+])
  | (?P<ident>[A-Za-z0-9_][A-Za-z0-9_']*)
""", re.VERBOSE)

KEYWORDS = {"tt", "ff", "max", "min", "exists", "forall"}


def tokenize(text, regex=_TOKEN_RE):
    """Yield ``(kind, value, line, column)``; kind is 'sym', 'ident' or 'eof'."""
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = regex.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind in ("sym", "ident"):
                yield kind, value, line, col
            col += len(value)
        pos = m.end()
    yield "eof", "", line, col


class TokenStream:
    def __init__(self, text, regex=_TOKEN_RE):
        self.tokens = list(tokenize(text, regex))
        self.i = 0

    def peek(self, k=0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def at(self, value, k=0):
        kind, v, _, _ = self.peek(k)
        return kind != "eof" and v == value

    def error(self, message, tok=None):
        _, value, line, col = tok or self.peek()
        found = repr(value) if value else "end of input"
        return FormulaSyntaxError(f"{message}, found {found}", line, col)

    def expect(self, value):
        if not self.at(value):
            raise self.error(f"expected {value!r}")
        return self.next()

    def ident(self, what):
        tok = self.peek()
        if tok[0] != "ident":
            raise self.error(f"expected {what}")
        return self.next()[1]

    def done(self):
        if self.peek()[0] != "eof":
            raise self.error("unexpected trailing input")


def parse(text, alphabet=None, locations=None):
    """Parse a formula and alpha-normalize its binders.

    ``alphabet``, when given, restricts the actions allowed in modalities.
    ``locations`` is accepted for interface symmetry; location variables are
    checked against a location environment only when monitors are built.
    """
    ts = TokenStream(text)
    f = _parse_or(ts)
    ts.done()
    if alphabet is not None:
        for g in subformulas(f):
            if isinstance(g, MODALITIES) and g.action not in alphabet:
                raise HypermonError(f"unknown action {g.action!r}")
    return normalize(f)


def _parse_or(ts):
    f = _parse_and(ts)
    while ts.at("\\/"):
        ts.next()
        f = Or(f, _parse_and(ts))
    return f


def _parse_and(ts):
    f = _parse_unary(ts)
    while ts.at("/\\"):
        ts.next()
        f = And(f, _parse_unary(ts))
    return f


def _parse_unary(ts):
    kind, value, line, col = ts.peek()
    if kind == "ident" and value in ("max", "min", "exists", "forall"):
        ts.next()
        var = _binder_name(ts)
        ts.expect(".")
        body = _parse_or(ts)
        return {"max": Max, "min": Min, "exists": Exists, "forall": Forall}[value](var, body)
    if value in ("[", "<") and kind == "sym":
        ts.next()
        action = ts.ident("an action")
        ts.expect("@")
        var = _binder_name(ts)
        ts.expect("]" if value == "[" else ">")
        body = _parse_unary(ts)
        return (Box if value == "[" else Diamond)(action, var, body)
    if value == "(" and kind == "sym":
        ts.next()
        f = _parse_or(ts)
        ts.expect(")")
        return f
    if kind == "ident":
        ts.next()
        if value == "tt":
            return TT
        if value == "ff":
            return FF
        if value in KEYWORDS:
            raise ts.error("unexpected keyword", (kind, value, line, col))
        if ts.at("=") or ts.at("!="):
            op = ts.next()[1]
            other = _binder_name(ts)
            return (Eq if op == "=" else Neq)(value, other)
        return Rec(value)
    raise ts.error("expected a formula")


def _binder_name(ts):
    kind, value, _, _ = ts.peek()
    if kind != "ident" or value in KEYWORDS:
        raise ts.error("expected a variable name")
    return ts.next()[1]


def load_formula(path, alphabet=None, locations=None):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), alphabet, locations)
