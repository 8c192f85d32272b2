"""Monitor terms shared by the centralized and decentralized monitors,
together with their printer, parser and skeleton normalization.

Centralized terms use ``Prefix`` (an action observed at a location); local
terms of decentralized monitors use ``ActPrefix``, ``SendPrefix`` and
``RecvPrefix``.  Verdicts, choice, the parallel operators and recursion are
common to both.
"""

import functools
import re

from hypermon._node import Node
from hypermon.formula import FormulaSyntaxError, TokenStream
from hypermon.model import END, NO, YES, HypermonError, Verdict

RANK = {NO: 0, END: 1, YES: 2}


class Term(Node):
    __slots__ = ()

    def __str__(self):
        return show(self)


class VerdictM(Term):
    __slots__ = fields = ("verdict",)


class Prefix(Term):
    __slots__ = fields = ("action", "loc", "cont")


class ActPrefix(Term):
    __slots__ = fields = ("action", "cont")


class SendPrefix(Term):
    __slots__ = fields = ("group", "const", "cont")


class RecvPrefix(Term):
    __slots__ = fields = ("group", "const", "cont")


class Choice(Term):
    __slots__ = fields = ("left", "right")


class ParOr(Term):
    __slots__ = fields = ("left", "right")


class ParAnd(Term):
    __slots__ = fields = ("left", "right")


class RecM(Term):
    __slots__ = fields = ("var", "body")


class VarM(Term):
    __slots__ = fields = ("var",)


class DMon(Node):
    __slots__ = ()

    def __str__(self):
        return show(self)


class Located(DMon):
    __slots__ = fields = ("mon", "loc")


class MAnd(DMon):
    __slots__ = fields = ("left", "right")


class MOr(DMon):
    __slots__ = fields = ("left", "right")


YES_M = VerdictM(YES)
NO_M = VerdictM(NO)
END_M = VerdictM(END)

PREFIXES = (Prefix, ActPrefix, SendPrefix, RecvPrefix)
BINOPS = (Choice, ParOr, ParAnd)


def verdict_term(v):
    return VerdictM(Verdict(v))


def fold(op, parts):
    """Left-nested application of a binary constructor."""
    parts = list(parts)
    if not parts:
        raise ValueError("cannot fold an empty list")
    return functools.reduce(op, parts)


def balanced(op, parts):
    """Like ``fold`` but with logarithmic nesting depth."""
    parts = list(parts)
    if not parts:
        raise ValueError("cannot fold an empty list")
    while len(parts) > 1:
        paired = [op(parts[i], parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            paired.append(parts[-1])
        parts = paired
    return parts[0]


def send(group, const, cont):
    return SendPrefix(frozenset(group), const, cont)


def recv(group, const, cont):
    return RecvPrefix(frozenset(group), const, cont)


# ------------------------------------------------------------ substitution

@functools.lru_cache(maxsize=1 << 16)
def free_rec_vars(m):
    if isinstance(m, VarM):
        return frozenset([m.var])
    if isinstance(m, VerdictM):
        return frozenset()
    if isinstance(m, PREFIXES):
        return free_rec_vars(m.cont)
    if isinstance(m, BINOPS):
        return free_rec_vars(m.left) | free_rec_vars(m.right)
    if isinstance(m, RecM):
        return free_rec_vars(m.body) - {m.var}
    raise TypeError(f"not a monitor term: {m!r}")


def substitute(m, x, r):
    """Replace free ``x`` in ``m`` by the closed term ``r``."""
    if x not in free_rec_vars(m):
        return m
    if isinstance(m, VarM):
        return r
    if isinstance(m, PREFIXES):
        return type(m)(*m.args()[:-1], substitute(m.cont, x, r))
    if isinstance(m, BINOPS):
        return type(m)(substitute(m.left, x, r), substitute(m.right, x, r))
    if isinstance(m, RecM):
        return RecM(m.var, substitute(m.body, x, r))
    return m


@functools.lru_cache(maxsize=1 << 16)
def unfold(m):
    """``rec x.b`` becomes ``b{rec x.b / x}``; other terms are returned as is."""
    while isinstance(m, RecM):
        m = substitute(m.body, m.var, m)
    return m


def canonical_binders(m, env=None):
    """Rename every ``rec`` binder to ``x1``, ``x2``, ... by nesting depth."""
    env = env or {}
    if isinstance(m, VarM):
        return VarM(env.get(m.var, m.var))
    if isinstance(m, VerdictM):
        return m
    if isinstance(m, PREFIXES):
        return type(m)(*m.args()[:-1], canonical_binders(m.cont, env))
    if isinstance(m, BINOPS):
        return type(m)(canonical_binders(m.left, env), canonical_binders(m.right, env))
    if isinstance(m, RecM):
        name = f"x{len(env) + 1}"
        return RecM(name, canonical_binders(m.body, {**env, m.var: name}))
    raise TypeError(f"not a monitor term: {m!r}")


def alpha_equal_terms(m, n):
    return canonical_binders(m) == canonical_binders(n)


# ---------------------------------------------------------------- verdicts

def combine_and(left, right):
    """Verdicts of ``m (x) n`` (or ``M /\\ N``) from those of the operands."""
    out = set()
    if NO in left or NO in right:
        out.add(NO)
    for a in left:
        for b in right:
            out.add(a if RANK[a] <= RANK[b] else b)
    return frozenset(out)


def combine_or(left, right):
    out = set()
    if YES in left or YES in right:
        out.add(YES)
    for a in left:
        for b in right:
            out.add(a if RANK[a] >= RANK[b] else b)
    return frozenset(out)


class UnguardedTerm(HypermonError):
    pass


@functools.lru_cache(maxsize=1 << 18)
def term_verdicts(m):
    """All verdicts ``v`` with ``m => v``; prefixes derive nothing."""
    if isinstance(m, VerdictM):
        return frozenset([m.verdict])
    if isinstance(m, PREFIXES):
        return frozenset()
    if isinstance(m, Choice):
        return term_verdicts(m.left) | term_verdicts(m.right)
    if isinstance(m, ParAnd):
        return combine_and(term_verdicts(m.left), term_verdicts(m.right))
    if isinstance(m, ParOr):
        return combine_or(term_verdicts(m.left), term_verdicts(m.right))
    if isinstance(m, RecM):
        # under guardedness the bound variable is never reached here
        return term_verdicts(m.body)
    if isinstance(m, VarM):
        raise UnguardedTerm(f"unguarded or free variable {m.var}")
    raise TypeError(f"not a monitor term: {m!r}")


def is_guarded_term(m, unguarded=frozenset()):
    if isinstance(m, VarM):
        return m.var not in unguarded
    if isinstance(m, VerdictM):
        return True
    if isinstance(m, PREFIXES):
        return is_guarded_term(m.cont)
    if isinstance(m, BINOPS):
        return is_guarded_term(m.left, unguarded) and is_guarded_term(m.right, unguarded)
    if isinstance(m, RecM):
        return is_guarded_term(m.body, unguarded | {m.var})
    raise TypeError(f"not a monitor term: {m!r}")


# ----------------------------------------------------------- normalization

def sort_key(m):
    return show(m)


def normalize(m):
    """Lattice normal form of the active skeleton of ``m``.

    See ``normalize_group``; this is the one-term case.
    """
    return normalize_group((m,))[0]


FLAT_LIMIT = 48


@functools.lru_cache(maxsize=1 << 16)
def normalize_group(terms):
    """Jointly rewrite a tuple of terms into a lattice normal form.

    The active skeleton (the ``(+)``/``(x)`` structure above prefixes, with
    recursion unfolded) is read as a lattice expression over atoms: sums,
    prefixes and ``end``; ``yes`` is the top and ``no`` the bottom.  Nested
    operators are flattened, operands deduplicated and sorted, and absorbed
    operands (``x (+) (x (x) y)`` and dually) removed.  If the result still
    has more than ``FLAT_LIMIT`` atom occurrences, the disjunctive normal
    form is used instead, so terms stay bounded and the reachable state
    space finite.  Whether ``yes`` (or ``no``) is derivable is a lattice
    homomorphism of the verdicts of the atoms, so these rewrites preserve,
    at every future step, which of the two verdicts can be reached.

    Terms of a tuple are zipped position by position and rewritten
    together; local monitors that exchange messages must be normalized in
    one group so that a copy dropped at one location is dropped at its
    partners too.  Where the skeletons disagree the tuple is kept as an atom.
    """
    terms = tuple(terms)
    expr = _flat(terms)
    if _atom_count(expr) > FLAT_LIMIT:
        expr = _from_dnf(_dnf(terms))
    keys = {}
    return tuple(_render(expr, i, keys) for i in range(len(terms)))


_TOP, _BOT = ("top",), ("bot",)


def _flat(terms):
    terms = tuple(_unfold_active(t) for t in terms)
    if all(t is YES_M for t in terms):
        return _TOP
    if all(t is NO_M for t in terms):
        return _BOT
    op = type(terms[0])
    if op in (ParAnd, ParOr) and all(type(t) is op for t in terms):
        kind = "and" if op is ParAnd else "or"
        return _make(kind, [_flat(o) for o in _joint_operands(terms, op)])
    return ("atom", terms)


def _joint_operands(terms, op):
    if all(type(t) is op for t in terms):
        return (_joint_operands(tuple(t.left for t in terms), op)
                + _joint_operands(tuple(t.right for t in terms), op))
    return [terms]


def _make(kind, children):
    unit, zero = (_TOP, _BOT) if kind == "and" else (_BOT, _TOP)
    items = set()
    for c in children:
        if c is zero or c == zero:
            return zero
        if c == unit:
            continue
        if c[0] == kind:
            items.update(c[1])
        else:
            items.add(c)
    dual = "or" if kind == "and" else "and"

    def parts(c):
        return c[1] if c[0] == dual else frozenset([c])

    kept = [c for c in items
            if not (c[0] == dual and any(d is not c and parts(d) <= c[1] for d in items))]
    if not kept:
        return unit
    if len(kept) == 1:
        return kept[0]
    return (kind, frozenset(kept))


def _from_dnf(dnf):
    return _make("or", [_make("and", [("atom", a) for a in conj]) for conj in dnf])


def _atom_count(expr):
    if expr[0] == "atom":
        return 1
    if expr[0] in ("and", "or"):
        return sum(_atom_count(c) for c in expr[1])
    return 0


def _expr_key(expr, keys):
    if expr not in keys:
        if expr[0] == "atom":
            keys[expr] = (0, _atom_key(expr[1]))
        elif expr[0] in ("and", "or"):
            keys[expr] = (1 if expr[0] == "and" else 2,
                          tuple(sorted(_expr_key(c, keys) for c in expr[1])))
        else:
            keys[expr] = (3, expr[0])
    return keys[expr]


def _render(expr, i, keys):
    if expr == _TOP:
        return YES_M
    if expr == _BOT:
        return NO_M
    if expr[0] == "atom":
        return expr[1][i]
    op = ParAnd if expr[0] == "and" else ParOr
    children = sorted(expr[1], key=lambda c: _expr_key(c, keys))
    return balanced(op, [_render(c, i, keys) for c in children])


def _atom_key(atom):
    return tuple(show(t) for t in atom)


def _conj_key(conj):
    return sorted(_atom_key(a) for a in conj)


def _dnf(terms):
    """A tuple of terms as a sorted tuple of conjunctions (frozensets of atoms)."""
    terms = tuple(_unfold_active(t) for t in terms)
    first = terms[0]
    if all(t is YES_M for t in terms):
        return (frozenset(),)
    if all(t is NO_M for t in terms):
        return ()
    op = type(first)
    if op in (ParAnd, ParOr) and all(type(t) is op for t in terms):
        left = _dnf(tuple(t.left for t in terms))
        right = _dnf(tuple(t.right for t in terms))
        if op is ParOr:
            return _minimal(list(left) + list(right))
        return _minimal([a | b for a in left for b in right])
    return (frozenset([terms]),)


def _unfold_active(m):
    for _ in range(1000):
        if not isinstance(m, RecM):
            return m
        m = substitute(m.body, m.var, m)
    raise UnguardedTerm("recursion does not reach a prefix")


def _minimal(conjs):
    unique = sorted(set(conjs), key=len)
    kept = []
    for c in unique:
        if not any(k <= c for k in kept):
            kept.append(c)
    return tuple(sorted(kept, key=_conj_key))


# ---------------------------------------------------------------- printing

_CHOICE, _POR, _PAND, _UNARY = 0, 1, 2, 3
_OPS = {Choice: (" + ", _CHOICE), ParOr: (" (+) ", _POR), ParAnd: (" (x) ", _PAND)}


def show(m):
    """Render a monitor term (centralized, local or decentralized)."""
    if isinstance(m, DMon):
        return m.cached_text(lambda n: _show_dmon(n, 0))
    return m.cached_text(lambda n: _show(n, _CHOICE, True))


def _group(g):
    return "{" + ",".join(sorted(g)) + "}"


def _show(m, prec, tail):
    if isinstance(m, VerdictM):
        return m.verdict.value
    if isinstance(m, VarM):
        return m.var
    if isinstance(m, Prefix):
        return f"{m.action}@{m.loc}." + _show(m.cont, _UNARY, tail)
    if isinstance(m, ActPrefix):
        return f"{m.action}." + _show(m.cont, _UNARY, tail)
    if isinstance(m, SendPrefix):
        return f"!{_group(m.group)}:{m.const}." + _show(m.cont, _UNARY, tail)
    if isinstance(m, RecvPrefix):
        return f"?{_group(m.group)}:{m.const}." + _show(m.cont, _UNARY, tail)
    if isinstance(m, RecM):
        s = f"rec {m.var}. " + _show(m.body, _CHOICE, True)
        return s if tail else f"({s})"
    if isinstance(m, BINOPS):
        sym, level = _OPS[type(m)]
        if prec > level:
            return "(" + _show(m, level, True) + ")"
        return _show(m.left, level, False) + sym + _show(m.right, level + 1, tail)
    raise TypeError(f"not a monitor term: {m!r}")


def _show_dmon(d, prec):
    if isinstance(d, Located):
        return f"[{show(d.mon)}]@{d.loc}"
    if isinstance(d, MOr):
        s = _show_dmon(d.left, 0) + " \\/ " + _show_dmon(d.right, 1)
        return s if prec <= 0 else f"({s})"
    if isinstance(d, MAnd):
        s = _show_dmon(d.left, 1) + " /\\ " + _show_dmon(d.right, 2)
        return s if prec <= 1 else f"({s})"
    raise TypeError(f"not a decentralized monitor: {d!r}")


# ----------------------------------------------------------------- parsing

_MON_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<sym>\(\+\)|\(x\)|/\\|\\/|[()\[\]@.,{}:!?+])
  | (?P<ident>[A-Za-z0-9_][A-Za-z0-9_']*)
""", re.VERBOSE)

_VERDICT_WORDS = {"yes": YES_M, "no": NO_M, "end": END_M}


def parse_term(text):
    """Parse a centralized or local monitor term."""
    ts = TokenStream(text, _MON_TOKEN_RE)
    m = _p_choice(ts)
    ts.done()
    return m


def parse_dmon(text):
    """Parse a decentralized monitor such as ``[a.yes]@l1 \\/ [no]@l2``."""
    ts = TokenStream(text, _MON_TOKEN_RE)
    d = _p_dor(ts)
    ts.done()
    return d


def _p_binary(ts, sym, op, sub):
    m = sub(ts)
    while ts.at(sym):
        ts.next()
        m = op(m, sub(ts))
    return m


def _p_choice(ts):
    return _p_binary(ts, "+", Choice, _p_por)


def _p_por(ts):
    return _p_binary(ts, "(+)", ParOr, _p_pand)


def _p_pand(ts):
    return _p_binary(ts, "(x)", ParAnd, _p_unary)


def _p_unary(ts):
    kind, value, line, col = ts.peek()
    if kind == "sym" and value == "(":
        ts.next()
        m = _p_choice(ts)
        ts.expect(")")
        return m
    if kind == "sym" and value in ("!", "?"):
        ts.next()
        ts.expect("{")
        group = []
        if not ts.at("}"):
            group.append(ts.ident("a location"))
            while ts.at(","):
                ts.next()
                group.append(ts.ident("a location"))
        ts.expect("}")
        ts.expect(":")
        const = ts.ident("a constant")
        ts.expect(".")
        cont = _p_unary(ts)
        return (send if value == "!" else recv)(group, const, cont)
    if kind == "ident":
        ts.next()
        if value == "rec":
            var = ts.ident("a variable")
            ts.expect(".")
            return RecM(var, _p_choice(ts))
        if value in _VERDICT_WORDS:
            return _VERDICT_WORDS[value]
        if ts.at("@"):
            ts.next()
            loc = ts.ident("a location")
            ts.expect(".")
            return Prefix(value, loc, _p_unary(ts))
        if ts.at("."):
            ts.next()
            return ActPrefix(value, _p_unary(ts))
        return VarM(value)
    raise FormulaSyntaxError("expected a monitor term", line, col)


def _p_dor(ts):
    return _p_binary(ts, "\\/", MOr, _p_dand)


def _p_dand(ts):
    return _p_binary(ts, "/\\", MAnd, _p_dunary)


def _p_dunary(ts):
    if ts.at("("):
        ts.next()
        d = _p_dor(ts)
        ts.expect(")")
        return d
    ts.expect("[")
    m = _p_choice(ts)
    ts.expect("]")
    ts.expect("@")
    return Located(m, ts.ident("a location"))
