"""Executable checks of the monitor metatheory on small instances.

Random formulas and lasso traces are drawn from a seeded ``random.Random``;
every suite returns a plain report object that can be serialized to JSON.
"""

import dataclasses
import random
import time
from collections import deque

from hypermon.central import cmon_step, run_central, synth_central
from hypermon.decentral import (
    Scheduler, _dmon_act, acting_maps_exist, can_act, can_communicate, dmon_sends, dmon_verdicts, fire,
    normalize_dmon, run_dec, saturate, send_count, send_options, synth_dec,
)
from hypermon.formula import (
    And, Box, Diamond, Eq, Exists, FF, Forall, Fragment, Max, Min, Neq, Or,
    Rec, TT, children, classify, free_vars, is_guarded, rebuild, to_text,
)
from hypermon.model import BudgetExceeded, LassoHypertrace, all_action_maps
from hypermon.semantics import eval_positions, eval_positions_bruteforce, satisfies
from hypermon.terms import normalize, show, term_verdicts


@dataclasses.dataclass
class GenConfig:
    max_formula_depth: int = 6
    max_fixpoints: int = 2
    alphabet_size: int = 2
    location_count: int = 3
    max_prefix: int = 2
    max_loop: int = 3
    sample_count: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise ValueError("alphabet_size must be at least 2")
        if self.location_count < 1:
            raise ValueError("location_count must be at least 1")
        if self.max_loop < 1:
            raise ValueError("max_loop must be at least 1")

    def alphabet(self):
        return [chr(ord("a") + i) for i in range(self.alphabet_size)]

    def horizon(self):
        return 2 * (self.max_prefix + self.max_loop) + 2


def location_names(n):
    return [f"l{i}" for i in range(1, n + 1)]


# --------------------------------------------------------------- generators

MODALITY_BIAS = 0.4


class FormulaGenerator:
    """Random closed, guarded formulas.

    ``prenex`` keeps quantifiers out of fixed points and modalities;
    ``allow_min`` admits least fixed points.  Quantifiers do not consume
    depth but are capped at ``max_quantifiers``.
    """

    def __init__(self, rng, alphabet, max_depth=6, max_fixpoints=2,
                 prenex=False, allow_min=False, max_quantifiers=3):
        self.rng = rng
        self.alphabet = list(alphabet)
        self.max_depth = max_depth
        self.max_fixpoints = max_fixpoints
        self.prenex = prenex
        self.allow_min = allow_min
        self.max_quantifiers = max_quantifiers

    def formula(self):
        self.fixpoints = 0
        self.quantifiers = 0
        self.names = 0
        if self.prenex:
            return self._top(self.max_depth, [], first=True)
        return self._any(self.max_depth, [], {}, quantifiers=True)

    def _fresh(self, base):
        self.names += 1
        return f"{base}{self.names}"

    def _can_quantify(self):
        return self.quantifiers < self.max_quantifiers

    def _quantifier(self, depth, locs, body):
        self.quantifiers += 1
        var = self._fresh("p")
        cls = self.rng.choice([Exists, Forall])
        return cls(var, body(depth, locs + [var]))

    def _top(self, depth, locs, first=False):
        rng = self.rng
        if first or (self._can_quantify() and rng.random() < 0.45):
            return self._quantifier(depth, locs, self._top)
        if depth > 2 and rng.random() < 0.2:
            cls = rng.choice([And, Or])
            return cls(self._top(depth - 1, locs), self._top(depth - 1, locs))
        return self._any(depth, locs, {}, quantifiers=False)

    def _leaf(self, locs, recs):
        rng = self.rng
        guarded = [x for x, ok in recs.items() if ok]
        if guarded and rng.random() < 0.7:
            return Rec(rng.choice(guarded))
        if len(locs) > 1 and rng.random() < 0.3:
            left, right = rng.sample(locs, 2)
            return rng.choice([Eq, Neq])(left, right)
        return rng.choice([TT, FF])

    def _any(self, depth, locs, recs, quantifiers):
        rng = self.rng
        if depth <= 1:
            return self._leaf(locs, recs)
        unguarded = any(not ok for ok in recs.values())
        bias = 0.75 if unguarded else MODALITY_BIAS
        if locs and rng.random() < bias:
            cls = rng.choice([Box, Diamond])
            body = self._any(depth - 1, locs, {x: True for x in recs}, quantifiers)
            return cls(rng.choice(self.alphabet), rng.choice(locs), body)
        kinds = ["and", "or", "and", "or", "leaf"]
        if self.fixpoints < self.max_fixpoints:
            kinds += ["fix", "fix"]
        if quantifiers and self._can_quantify():
            kinds += ["quant"] if locs else ["quant"] * 6
        kind = rng.choice(kinds)
        if kind == "leaf":
            return self._leaf(locs, recs)
        if kind in ("and", "or"):
            cls = And if kind == "and" else Or
            return cls(self._any(depth - 1, locs, recs, quantifiers),
                       self._any(depth - 1, locs, recs, quantifiers))
        if kind == "fix":
            self.fixpoints += 1
            var = self._fresh("X")
            cls = Min if self.allow_min and rng.random() < 0.4 else Max
            return cls(var, self._any(depth - 1, locs, {**recs, var: False}, quantifiers))
        return self._quantifier(
            depth, locs, lambda d, ls: self._any(d, ls, recs, quantifiers))


def random_trace(rng, locations, alphabet, max_prefix, max_loop):
    p = rng.randint(0, max_prefix)
    q = rng.randint(1, max_loop)

    def amap():
        return {loc: rng.choice(alphabet) for loc in locations}

    return LassoHypertrace(locations, alphabet,
                           [amap() for _ in range(p)], [amap() for _ in range(q)])


def random_case(rng, cfg, prenex=False, allow_min=False, max_fixpoints=None,
                max_locations=None, max_positions=None):
    n = rng.randint(1, max_locations or cfg.location_count)
    locations = location_names(n)
    alphabet = cfg.alphabet()
    gen = FormulaGenerator(rng, alphabet, cfg.max_formula_depth,
                           cfg.max_fixpoints if max_fixpoints is None else max_fixpoints,
                           prenex=prenex, allow_min=allow_min)
    f = gen.formula()
    max_prefix, max_loop = cfg.max_prefix, cfg.max_loop
    t = random_trace(rng, locations, alphabet, max_prefix, max_loop)
    if max_positions is not None:
        while t.size > max_positions:
            t = random_trace(rng, locations, alphabet, max_prefix, max_loop)
    return f, t


# ---------------------------------------------------------------- shrinking

def formula_variants(f):
    """Formulas obtained by replacing one subformula with something smaller."""
    for repl in [TT, FF] + list(children(f)):
        if repl is not f:
            yield repl
    kids = children(f)
    for i, kid in enumerate(kids):
        for variant in formula_variants(kid):
            new = list(kids)
            new[i] = variant
            yield rebuild(f, new)


def trace_variants(t):
    if t.prefix:
        for i in range(len(t.prefix)):
            yield LassoHypertrace(t.locations, t.alphabet,
                                  t.prefix[:i] + t.prefix[i + 1:], t.loop)
    if len(t.loop) > 1:
        for i in range(len(t.loop)):
            yield LassoHypertrace(t.locations, t.alphabet, t.prefix,
                                  t.loop[:i] + t.loop[i + 1:])


def shrink(f, t, fails, admissible, max_rounds=200):
    """Greedily shrink a failing case while ``fails(f, t)`` keeps holding."""
    for _ in range(max_rounds):
        for g in formula_variants(f):
            if admissible(g) and _still_fails(fails, g, t):
                f = g
                break
        else:
            for u in trace_variants(t):
                if _still_fails(fails, f, u):
                    t = u
                    break
            else:
                return f, t
    return f, t


def _still_fails(fails, f, t):
    try:
        return bool(fails(f, t))
    except BudgetExceeded:
        return False


def admissible_for(fragment):
    def ok(f):
        locs, recs = free_vars(f)
        return not locs and not recs and is_guarded(f) and fragment in classify(f)
    return ok


# ------------------------------------------------------------ suite reports

@dataclasses.dataclass
class SuiteReport:
    suite: str
    samples: int = 0
    passed: int = 0
    skipped: int = 0
    failures: list = dataclasses.field(default_factory=list)
    details: dict = dataclasses.field(default_factory=dict)
    seconds: float = 0.0

    @property
    def ok(self):
        return not self.failures

    def to_json(self):
        data = dataclasses.asdict(self)
        data["ok"] = self.ok
        return data

    def summary(self):
        status = "PASS" if self.ok else "FAIL"
        extra = f", {self.skipped} skipped" if self.skipped else ""
        return (f"{self.suite}: {status} {self.passed}/{self.samples} cases passed"
                f"{extra} in {self.seconds:.1f}s")


def _case_json(f, t):
    return {"formula": to_text(f), "trace": t.to_json()}


# ------------------------------------------------- soundness and completeness

def central_verdict_problems(f, t, max_states=None):
    """Theorem violations of the centralized monitor of ``f`` on ``t``."""
    m = synth_central(f, {}, t.locations, t.alphabet)
    out = run_central(m, t, max_states)
    sat = satisfies(f, t)
    return _verdict_problems(out, sat), out, sat


def dec_verdict_problems(f, t, max_states=None):
    d = synth_dec(f, {}, t.locations, t.alphabet)
    out = run_dec(d, t, max_states=max_states)
    sat = satisfies(f, t)
    return _verdict_problems(out, sat), out, sat


def _verdict_problems(out, sat):
    problems = []
    if out.reachable_no and sat:
        problems.append("soundness: no reachable on a satisfying trace")
    if out.reachable_yes and not sat:
        problems.append("soundness: yes reachable on a violating trace")
    if not sat and not out.reachable_no:
        problems.append("completeness: violation not detected")
    if out.reachable_yes and out.reachable_no:
        problems.append("both yes and no reachable")
    return problems


def soundness_suite(cfg, monitor="central", checks=("soundness", "completeness"),
                    max_states=None, minimize=True):
    """Compare monitor verdicts with the oracle on random formulas and traces."""
    rng = random.Random(cfg.seed)
    report = SuiteReport(f"{'/'.join(checks)} ({monitor})")
    started = time.perf_counter()
    prenex = monitor == "dec"
    fragment = Fragment.P_HYPER_MAX if prenex else Fragment.HYPER_MAX
    check = dec_verdict_problems if prenex else central_verdict_problems
    counts = {"sat": 0, "unsat": 0, "yes_reached": 0, "no_reached": 0}

    def relevant(problems):
        return [p for p in problems if p.split(":")[0] in checks or ":" not in p]

    for _ in range(cfg.sample_count):
        f, t = random_case(rng, cfg, prenex=prenex)
        report.samples += 1
        try:
            problems, out, sat = check(f, t, max_states)
        except BudgetExceeded as exc:
            report.skipped += 1
            report.details.setdefault("budget", []).append(
                {**_case_json(f, t), "error": str(exc)})
            continue
        counts["sat" if sat else "unsat"] += 1
        counts["yes_reached"] += out.reachable_yes
        counts["no_reached"] += out.reachable_no
        problems = relevant(problems)
        if not problems:
            report.passed += 1
            continue
        case = {**_case_json(f, t), "problems": problems}
        if minimize:
            sf, st = shrink(f, t, lambda g, u: relevant(check(g, u, max_states)[0]),
                            admissible_for(fragment))
            case["minimized"] = _case_json(sf, st)
        report.failures.append(case)
    report.details["counts"] = counts
    report.seconds = time.perf_counter() - started
    return report


# ------------------------------------------------------------- differential

def differential(f, t, max_states=None):
    """Run both monitors of ``f`` on ``t`` and compare reachable verdicts."""
    m = synth_central(f, {}, t.locations, t.alphabet)
    d = synth_dec(f, {}, t.locations, t.alphabet)
    central = run_central(m, t, max_states)
    dec = run_dec(d, t, max_states=max_states)
    record = {
        "formula": to_text(f),
        "central": central.to_json(),
        "decentralized": dec.to_json(),
        "match": central.verdicts() == dec.verdicts(),
    }
    if not record["match"]:
        record["multicast_log"] = run_dec(d, t, max_states=max_states, with_log=True).log
        record["central_monitor"] = show(m)
    return record


def differential_suite(cfg, max_states=None):
    rng = random.Random(cfg.seed)
    report = SuiteReport("differential")
    started = time.perf_counter()
    for _ in range(cfg.sample_count):
        f, t = random_case(rng, cfg, prenex=True)
        report.samples += 1
        try:
            record = differential(f, t, max_states)
        except BudgetExceeded as exc:
            report.skipped += 1
            report.details.setdefault("budget", []).append(
                {**_case_json(f, t), "error": str(exc)})
            continue
        if record["match"]:
            report.passed += 1
        else:
            report.failures.append({**_case_json(f, t), "record": record})
    report.seconds = time.perf_counter() - started
    return report


# --------------------------------------------------------------- confluence

def confluence_suite(f, t, k=10, max_states=None):
    """Saturate every action-derived monitor met by ``run_dec`` with the
    lexicographic scheduler and with ``k`` seeded ones; all stable results
    and run outcomes must coincide."""
    d = synth_dec(f, {}, t.locations, t.alphabet)
    baseline = {}

    def record(table):
        def hook(config, a_map, after, stable):
            table[(config, a_map)] = (after, stable)
        return hook

    lex_out = run_dec(d, t, Scheduler(), max_states, on_transition=record(baseline))
    divergences = []
    for seed in range(1, k + 1):
        table = {}
        out = run_dec(d, t, Scheduler(seed), max_states, on_transition=record(table))
        if out.to_json() != lex_out.to_json():
            divergences.append({"seed": seed, "kind": "outcome",
                                "lex": lex_out.to_json(), "seeded": out.to_json()})
        if table.keys() != baseline.keys():
            divergences.append({"seed": seed, "kind": "visited configurations differ"})
        for key, (after, stable) in baseline.items():
            other = table.get(key)
            if other is not None and other[1] is not stable:
                divergences.append({"seed": seed, "kind": "stable state",
                                    "lex": show(stable), "seeded": show(other[1])})
            # replay the same action-derived monitor with a fresh seeded scheduler
            again, _ = saturate(after, Scheduler(seed * 7919))
            if again is not stable:
                divergences.append({"seed": seed, "kind": "replayed saturation",
                                    "lex": show(stable), "seeded": show(again)})
    return {"formula": to_text(f), "boundaries": len(baseline),
            "divergences": divergences, "ok": not divergences}


def random_confluence_suite(cfg, k=10, max_states=None):
    rng = random.Random(cfg.seed)
    report = SuiteReport("confluence")
    started = time.perf_counter()
    boundaries = 0
    for _ in range(cfg.sample_count):
        f, t = random_case(rng, cfg, prenex=True)
        report.samples += 1
        try:
            result = confluence_suite(f, t, k, max_states)
        except BudgetExceeded:
            report.skipped += 1
            continue
        boundaries += result["boundaries"]
        if result["ok"]:
            report.passed += 1
        else:
            report.failures.append({**_case_json(f, t), "divergences": result["divergences"][:5]})
    report.details["action_boundaries_checked"] = boundaries
    report.seconds = time.perf_counter() - started
    return report


# ------------------------------------------------------------ oracle check

def oracle_suite(cfg, max_positions=4, max_fixpoints=1):
    """Kleene iteration against subset enumeration on small traces."""
    rng = random.Random(cfg.seed)
    report = SuiteReport("oracle self-check")
    started = time.perf_counter()
    for _ in range(cfg.sample_count):
        f, t = random_case(rng, cfg, allow_min=True, max_fixpoints=max_fixpoints,
                           max_positions=max_positions)
        report.samples += 1
        fast = eval_positions(f, t)
        slow = eval_positions_bruteforce(f, t)
        if fast == slow:
            report.passed += 1
        else:
            report.failures.append({**_case_json(f, t), "kleene": sorted(fast),
                                    "subsets": sorted(slow)})
    report.seconds = time.perf_counter() - started
    return report


# ------------------------------------------------- communication exploration

COMM_STATE_CAP = 50000


def communication_graph(start, cap=COMM_STATE_CAP):
    """All monitors reachable from ``start`` by multicasts, with the edges.

    Raises ``BudgetExceeded`` when more than ``cap`` states are reachable.
    """
    states = {start: []}
    queue = deque([start])
    while queue:
        d = queue.popleft()
        for label, nxt in dmon_sends(d):
            states[d].append((label, nxt))
            if nxt not in states:
                states[nxt] = []
                if len(states) > cap:
                    raise BudgetExceeded(f"more than {cap} communication states")
                queue.append(nxt)
    return states


def sampled_graph(start, orders):
    """The part of the communication graph visited by the lexicographic
    scheduler and ``orders - 1`` seeded ones."""
    graph = {start: set()}
    for k in range(orders):
        scheduler = Scheduler() if k == 0 else Scheduler(seed=k)
        d = start
        for _ in range(send_count(start) + 1):
            enabled = send_options(d)
            if not enabled:
                break
            label, key = scheduler.pick(enabled)
            nxt = fire(d, key)
            graph[d].add((label, nxt))
            graph.setdefault(nxt, set())
            d = nxt
    return {d: sorted(edges, key=lambda e: e[0].sort_key()) for d, edges in graph.items()}


class Round:
    """Every send order from one monitor: the graph, which stable monitors
    each node can reach, and whether sends can go on forever."""

    def __init__(self, start, cap=COMM_STATE_CAP, sample_orders=0):
        self.start = start
        self.sampled = False
        self.cyclic = False
        # k pending sends give at most 2^k states; skip hopeless searches
        hopeless = sample_orders and 2 ** send_count(start) > cap
        try:
            if hopeless:
                raise BudgetExceeded("too many pending sends")
            self.graph = communication_graph(start, cap)
        except BudgetExceeded:
            if not sample_orders:
                raise
            self.graph = sampled_graph(start, sample_orders)
            self.sampled = True
        self._analyse()

    def _analyse(self):
        self.stable = {}
        for node in self._post_order():
            edges = self.graph[node]
            if not edges:
                self.stable[node] = frozenset([node])
            else:
                self.stable[node] = frozenset().union(
                    *(self.stable.get(n, frozenset()) for _, n in edges))

    def _post_order(self):
        order, colour = [], {self.start: 1}
        stack = [(self.start, iter(self.graph[self.start]))]
        while stack:
            node, edges = stack[-1]
            for _, nxt in edges:
                mark = colour.get(nxt)
                if mark == 1:
                    self.cyclic = True
                elif mark is None:
                    colour[nxt] = 1
                    stack.append((nxt, iter(self.graph[nxt])))
                    break
            else:
                colour[node] = 2
                order.append(node)
                stack.pop()
        return order

    def terminals(self):
        return [d for d, edges in self.graph.items() if not edges]

    def reachable_verdicts(self, node):
        out = set()
        for s in self.stable[node]:
            out |= dmon_verdicts(s)
        return frozenset(out)


_ROUNDS = {}

# Rounds with more states than this are explored along sampled send orders.
ROUND_STATE_CAP = 20000
PRINCIPLED_ROUND_CAP = 2000
SAMPLED_ORDERS = 11


def round_from(start, cap=ROUND_STATE_CAP, sample_orders=SAMPLED_ORDERS):
    key = (start, cap, sample_orders)
    rnd = _ROUNDS.get(key)
    if rnd is None:
        if len(_ROUNDS) > 4096:
            _ROUNDS.clear()
        rnd = _ROUNDS[key] = Round(start, cap, sample_orders)
    return rnd


# ---------------------------------------------------------- principled check

PROPERTIES = (
    "VerdictAgreement",
    "VerdictIrrevocability",
    "Reactivity",
    "BoundedCommunication",
    "ProcessingCommunicationAlternation",
    "FormulaConvergence(operational)",
)


@dataclasses.dataclass
class PrincipledReport:
    formula: str
    horizon: int
    results: dict
    pairs_explored: int = 0
    rounds: int = 0
    sampled_rounds: int = 0

    @property
    def passed(self):
        return all(r["passed"] for r in self.results.values())

    def to_json(self):
        return {"formula": self.formula, "horizon": self.horizon,
                "pairs_explored": self.pairs_explored, "passed": self.passed,
                "rounds": self.rounds, "sampled_rounds": self.sampled_rounds,
                "results": self.results}


def check_principled(f, sigma, locations, alphabet, horizon, max_pairs=200000,
                     round_cap=PRINCIPLED_ROUND_CAP):
    """Check the six principled-synthesis properties on every configuration
    reachable within ``horizon`` action steps, over all action maps.

    Every stable decentralized monitor met on the way stands for the
    synthesis of some residual formula, so each property is checked at each
    of them.  Formula convergence is checked operationally: after each
    action, all send orders must end in one and the same stable monitor,
    unable to communicate, whose verdicts agree with those of the
    centralized monitor's productive successor, pair by pair, along the
    whole exploration.
    """
    results = {name: {"passed": True, "counterexample": None} for name in PROPERTIES}
    results["FormulaConvergence(operational)"]["note"] = (
        "checked as: unique stable monitor after each action, paired with the "
        "centralized productive successor, with agreeing verdicts at every pair")

    def fail(name, path, detail):
        if results[name]["passed"]:
            results[name] = {**results[name], "passed": False,
                             "counterexample": {"actions": [dict(a) for a in path],
                                                "detail": detail}}

    d0 = synth_dec(f, sigma, locations, alphabet)
    m0 = synth_central(f, sigma, locations, alphabet)
    maps = all_action_maps(alphabet, locations)
    if dmon_verdicts(d0) != term_verdicts(m0):
        fail("VerdictAgreement", [], f"{sorted(dmon_verdicts(d0))} vs {sorted(term_verdicts(m0))}")
    if can_communicate(d0):
        fail("ProcessingCommunicationAlternation", [], "initial monitor can communicate")

    start = (normalize_dmon(d0), normalize(m0))
    seen = {start}
    tally = []
    frontier = [(start, [])]
    for _ in range(horizon):
        nxt_frontier = []
        for (d, m), path in frontier:
            if can_communicate(d):
                fail("ProcessingCommunicationAlternation", path,
                     f"stable monitor can communicate: {show(d)}")
            if dmon_verdicts(d) != term_verdicts(m):
                fail("VerdictAgreement", path,
                     f"{sorted(dmon_verdicts(d))} vs {sorted(term_verdicts(m))}")
            for a_map in maps:
                here = path + [a_map]
                succ = _dmon_act(d, a_map)
                if not succ:
                    fail("Reactivity", here, f"no action step from {show(d)}")
                    continue
                central = cmon_step(m, a_map, productive=True)
                if len(central) != 1:
                    fail("FormulaConvergence(operational)", here,
                         f"{len(central)} productive centralized successors")
                    continue
                m1 = normalize(next(iter(central)))
                for after in succ:
                    stable = _check_round(after, maps, here, fail, tally, round_cap)
                    if stable is None:
                        continue
                    if dmon_verdicts(stable) != term_verdicts(m1):
                        fail("FormulaConvergence(operational)", here,
                             f"stable monitor derives {sorted(dmon_verdicts(stable))}, "
                             f"centralized successor {sorted(term_verdicts(m1))}")
                    key = (normalize_dmon(stable), m1)
                    if key not in seen:
                        seen.add(key)
                        if len(seen) > max_pairs:
                            raise BudgetExceeded(f"more than {max_pairs} pairs")
                        nxt_frontier.append((key, here))
        frontier = nxt_frontier
    return PrincipledReport(to_text(f), horizon, results, len(seen),
                            len(tally), sum(tally))


def _check_round(after, maps, path, fail, tally, cap):
    """Explore every send order from an action-derived monitor; return the
    unique stable monitor or None after reporting a failure."""
    try:
        rnd = round_from(after, cap)
        tally.append(rnd.sampled)
    except BudgetExceeded as exc:
        fail("BoundedCommunication", path, str(exc))
        return None
    if rnd.cyclic:
        fail("BoundedCommunication", path, "a cycle of multicasts")
        return None
    alphabet = sorted({a for m in maps for a in m.values()})
    for d, edges in rnd.graph.items():
        if edges and acting_maps_exist(d, alphabet):
            fail("ProcessingCommunicationAlternation", path,
                 f"{show(d)} can both communicate and act")
        for label, nxt in edges:
            lost = dmon_verdicts(d) - dmon_verdicts(nxt)
            if lost:
                fail("VerdictIrrevocability", path,
                     f"verdicts {sorted(lost)} lost by {label}")
    terminals = rnd.terminals()
    for d in terminals:
        if can_communicate(d):
            fail("BoundedCommunication", path, f"stuck: {show(d)} waits for a message")
            return None
    if len(terminals) != 1:
        fail("FormulaConvergence(operational)", path,
             f"{len(terminals)} distinct stable monitors after the multicasts")
        return None
    return terminals[0]


# ----------------------------------------------------------- bisimulation

CONDITION1_READING = ("(exists stable M' reachable from M by multicasts with M' => v) "
                      "iff (m => v)")


@dataclasses.dataclass
class BisimReport:
    formula: str
    pairs_checked: int = 0
    condition_failures: list = dataclasses.field(default_factory=list)
    condition1_reading: str = CONDITION1_READING
    central_successors: str = "productive"
    rounds: int = 0
    sampled_rounds: int = 0

    @property
    def passed(self):
        return not self.condition_failures

    def to_json(self):
        return {"formula": self.formula, "pairs_checked": self.pairs_checked,
                "passed": self.passed, "condition_failures": self.condition_failures,
                "condition1_reading": self.condition1_reading,
                "central_successors": self.central_successors,
                "rounds": self.rounds, "sampled_rounds": self.sampled_rounds}


def check_weak_bisim(f, sigma, locations, alphabet, max_pairs=500000,
                     round_cap=ROUND_STATE_CAP):
    """Explore the pair graph from the two synthesized monitors and check the
    four weak-bisimulation conditions on every pair.

    Pairs are (decentralized, centralized) monitors.  The exploration goes
    round by round: a round starts from a monitor paired with a centralized
    term and contains every monitor reachable from it by multicasts, all
    paired with that same term (condition 3).  Stable monitors are
    normalized before they act.  Centralized moves are the productive ones;
    successors that replace a mismatching prefix by ``end`` are not
    synthesized monitors and are left out of the relation.
    """
    report = BisimReport(to_text(f))
    maps = all_action_maps(alphabet, locations)
    d0 = synth_dec(f, sigma, locations, alphabet)
    m0 = normalize(synth_central(f, sigma, locations, alphabet))
    pending = deque([(d0, m0)])
    rounds_seen = {(d0, m0)}
    stable_seen = set()
    checked = [0]

    def failure(cond, d, m, witness):
        if len(report.condition_failures) < 20:
            report.condition_failures.append({
                "condition": cond, "decentralized": show(d), "centralized": show(m),
                "witness": witness})

    def start_round(after, m1):
        if (after, m1) not in rounds_seen:
            rounds_seen.add((after, m1))
            pending.append((after, m1))

    def central_moves(m):
        return {a: [normalize(x) for x in cmon_step(m, a, productive=True)] for a in maps}

    while pending:
        root, m = pending.popleft()
        rnd = round_from(root, round_cap)
        report.rounds += 1
        report.sampled_rounds += rnd.sampled
        moves = central_moves(m)
        expected = term_verdicts(m)
        for node, edges in rnd.graph.items():
            checked[0] += 1
            if checked[0] > max_pairs:
                raise BudgetExceeded(f"more than {max_pairs} related pairs")
            reach = rnd.reachable_verdicts(node)
            if reach != expected:
                failure(1, node, m, {"decentralized": sorted(reach),
                                     "centralized": sorted(expected)})
            actor = node
            if not edges:
                actor = normalize_dmon(node)
                if (actor, m) in stable_seen:
                    continue
                stable_seen.add((actor, m))
            for a_map in maps:
                # condition 2: actions of the decentralized side
                for after in _dmon_act(actor, a_map):
                    if len(moves[a_map]) != 1:
                        failure(2, actor, m, {"action_map": dict(a_map)})
                        continue
                    start_round(after, moves[a_map][0])
                # condition 4: actions of the centralized side
                if moves[a_map] and edges:
                    if not any(can_act(normalize_dmon(s), a_map) for s in rnd.stable[node]):
                        failure(4, node, m, {"action_map": dict(a_map)})
                elif moves[a_map] and not can_act(actor, a_map):
                    failure(4, actor, m, {"action_map": dict(a_map)})
    report.pairs_checked = checked[0]
    return report


# ------------------------------------------------------ batch formula suites

def principled_suite(cfg, horizon=None, max_locations=None):
    rng = random.Random(cfg.seed)
    report = SuiteReport("principled")
    started = time.perf_counter()
    horizon = cfg.horizon() if horizon is None else horizon
    report.details["horizon"] = horizon
    for _ in range(cfg.sample_count):
        f, t = random_case(rng, cfg, prenex=True, max_locations=max_locations)
        report.samples += 1
        try:
            result = check_principled(f, {}, t.locations, t.alphabet, horizon)
        except BudgetExceeded:
            report.skipped += 1
            continue
        _count_rounds(report, result)
        if result.passed:
            report.passed += 1
        else:
            report.failures.append({"formula": to_text(f), "locations": list(t.locations),
                                    "report": result.to_json()})
    report.seconds = time.perf_counter() - started
    return report


def bisim_suite(cfg, max_locations=2):
    rng = random.Random(cfg.seed)
    report = SuiteReport("bisimulation")
    started = time.perf_counter()
    for _ in range(cfg.sample_count):
        f, t = random_case(rng, cfg, prenex=True, max_locations=max_locations)
        report.samples += 1
        try:
            result = check_weak_bisim(f, {}, t.locations, t.alphabet)
        except BudgetExceeded:
            report.skipped += 1
            continue
        _count_rounds(report, result)
        if result.passed:
            report.passed += 1
        else:
            report.failures.append({"formula": to_text(f), "locations": list(t.locations),
                                    "report": result.to_json()})
    report.details["condition1_reading"] = CONDITION1_READING
    report.seconds = time.perf_counter() - started
    return report


def _count_rounds(report, result):
    for key in ("rounds", "sampled_rounds"):
        report.details[key] = report.details.get(key, 0) + getattr(result, key)
