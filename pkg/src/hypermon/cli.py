"""The ``hypermon`` command line."""

import argparse
import json
import sys

from hypermon import verify
from hypermon.central import run_central, synth_central
from hypermon.decentral import Scheduler, run_dec, synth_dec
from hypermon.formula import check_alphabet_use, check_closed, classify, load_formula, to_text
from hypermon.model import BudgetExceeded, HypermonError, check_alphabet, check_locations, load_trace
from hypermon.semantics import eval_positions
from hypermon.terms import show

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

SUITES = ("soundness", "completeness", "diff", "principled", "bisim", "confluence")


class UsageError(HypermonError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="hypermon", description="Monitor synthesis for hyperproperties.")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help_text, formula=True, trace=False, scope=False, sigma=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                       help="machine-readable output")
        if formula:
            p.add_argument("-f", "--formula", required=True, help="formula file")
        if trace:
            p.add_argument("-t", "--trace", required=True, help="trace JSON file")
        if scope:
            p.add_argument("-t", "--trace", help="take locations and actions from a trace")
            p.add_argument("--locations", help="comma-separated locations")
            p.add_argument("--actions", help="comma-separated actions")
        if sigma:
            p.add_argument("--sigma", default="", help='location bindings, e.g. "p=l1,q=l2"')
        return p

    command("parse", "parse and print a formula")
    command("classify", "list the fragments a formula belongs to")
    p = command("eval", "decide satisfaction on a trace", trace=True, sigma=True)
    p.add_argument("--positions", action="store_true", help="also print satisfying positions")
    command("synth-central", "print the centralized monitor", scope=True, sigma=True)
    command("synth-dec", "print the decentralized monitor", scope=True, sigma=True)
    p = command("run-central", "run the centralized monitor on a trace", trace=True)
    p.add_argument("--max-states", type=int)
    p = command("run-dec", "run the decentralized monitor on a trace", trace=True)
    p.add_argument("--scheduler", default="lex", help="lex or seed:N")
    p.add_argument("--max-states", type=int)
    p = command("diff", "compare both monitors on a trace", trace=True)
    p.add_argument("--max-states", type=int)

    p = command("verify", "run a randomized verification suite", formula=False)
    p.add_argument("--suite", required=True, choices=SUITES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int)
    p.add_argument("--monitor", choices=("central", "dec", "both"), default="both",
                   help="monitors checked by the soundness and completeness suites")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--fixpoints", type=int, default=2)
    p.add_argument("--action-count", type=int, default=2)
    p.add_argument("--location-count", type=int)
    p.add_argument("--max-prefix", type=int, default=2)
    p.add_argument("--max-loop", type=int, default=3)
    p.add_argument("--horizon", type=int, help="action steps for the principled suite")
    p.add_argument("--schedulers", type=int, default=10, help="seeded schedulers for confluence")
    p.add_argument("--report", help="also write the JSON report to this file")
    return parser


DEFAULT_SAMPLES = {"soundness": 500, "completeness": 500, "diff": 200, "principled": 50,
                   "bisim": 30, "confluence": 50}


def parse_sigma(text):
    sigma = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        var, sep, loc = item.partition("=")
        if not sep or not var.strip() or not loc.strip():
            raise UsageError(f"bad --sigma binding {item!r}; expected var=location")
        sigma[var.strip()] = loc.strip()
    return sigma


def _split(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def _scope(args):
    if args.trace:
        t = load_trace(args.trace)
        return list(t.locations), list(t.alphabet)
    if not args.locations or not args.actions:
        raise UsageError("give --trace, or both --locations and --actions")
    locations, actions = _split(args.locations), _split(args.actions)
    check_locations(locations)
    check_alphabet(actions)
    return locations, actions


class Output:
    def __init__(self, as_json):
        self.as_json = as_json

    def emit(self, text, data):
        if self.as_json:
            print(json.dumps(data))
        else:
            print(text)


def _run_outcome_text(out):
    lines = [f"reachable yes: {_yn(out.reachable_yes)}"
             + (f" (after {out.steps_to_first_yes} steps)" if out.reachable_yes else ""),
             f"reachable no: {_yn(out.reachable_no)}"
             + (f" (after {out.steps_to_first_no} steps)" if out.reachable_no else ""),
             f"explored states: {out.explored_states}"]
    if out.conflicting_verdicts:
        lines.append("warning: a state derives more than one verdict")
    return "\n".join(lines)


def _yn(flag):
    return "yes" if flag else "no"


def cmd_parse(args, out):
    f = load_formula(args.formula)
    out.emit(to_text(f), {"formula": to_text(f)})
    return EXIT_OK


def cmd_classify(args, out):
    f = load_formula(args.formula)
    frags = sorted(fr.value for fr in classify(f))
    out.emit("\n".join(frags), {"fragments": frags})
    return EXIT_OK


def cmd_eval(args, out):
    f = load_formula(args.formula)
    t = load_trace(args.trace)
    sigma = parse_sigma(args.sigma)
    check_closed(f, sigma)
    check_alphabet_use(f, t.alphabet)
    positions = sorted(eval_positions(f, t, sigma))
    verdict = "sat" if 0 in positions else "unsat"
    text = verdict + (f"\npositions: {positions}" if args.positions else "")
    data = {"verdict": verdict}
    if args.positions:
        data["positions"] = positions
    out.emit(text, data)
    return EXIT_OK


def cmd_synth_central(args, out):
    f = load_formula(args.formula)
    locations, actions = _scope(args)
    check_alphabet_use(f, actions)
    m = synth_central(f, parse_sigma(args.sigma), locations, actions)
    out.emit(show(m), {"monitor": show(m)})
    return EXIT_OK


def cmd_synth_dec(args, out):
    f = load_formula(args.formula)
    locations, actions = _scope(args)
    check_alphabet_use(f, actions)
    d = synth_dec(f, parse_sigma(args.sigma), locations, actions)
    out.emit(show(d), {"monitor": show(d)})
    return EXIT_OK


def _formula_and_trace(args):
    f = load_formula(args.formula)
    t = load_trace(args.trace)
    check_alphabet_use(f, t.alphabet)
    return f, t


def cmd_run_central(args, out):
    f, t = _formula_and_trace(args)
    result = run_central(synth_central(f, {}, t.locations, t.alphabet), t, args.max_states)
    out.emit(_run_outcome_text(result), result.to_json())
    return EXIT_OK


def cmd_run_dec(args, out):
    f, t = _formula_and_trace(args)
    d = synth_dec(f, {}, t.locations, t.alphabet)
    result = run_dec(d, t, Scheduler.parse(args.scheduler), args.max_states, with_log=True)
    text = _run_outcome_text(result)
    for entry in result.log:
        if "note" in entry:
            text += f"\nnote: {entry['note']}"
        elif entry["sends"]:
            text += f"\nstep {entry['step']}: " + ", ".join(entry["sends"])
    out.emit(text, result.to_json(with_log=True))
    return EXIT_OK


def cmd_diff(args, out):
    f, t = _formula_and_trace(args)
    record = verify.differential(f, t, args.max_states)
    central, dec = record["central"], record["decentralized"]
    text = "\n".join([
        f"centralized:   yes={_yn(central['reachable_yes'])} no={_yn(central['reachable_no'])}",
        f"decentralized: yes={_yn(dec['reachable_yes'])} no={_yn(dec['reachable_no'])}",
        "verdicts match" if record["match"] else "verdicts DIFFER",
    ])
    out.emit(text, record)
    return EXIT_OK if record["match"] else EXIT_FAILED


def cmd_verify(args, out):
    samples = DEFAULT_SAMPLES[args.suite] if args.samples is None else args.samples
    locations = args.location_count
    if locations is None:
        locations = 2 if args.suite == "bisim" else 3
    try:
        cfg = verify.GenConfig(args.depth, args.fixpoints, args.action_count, locations,
                               args.max_prefix, args.max_loop, samples, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    monitors = ("central", "dec") if args.monitor == "both" else (args.monitor,)
    if args.suite in ("soundness", "completeness"):
        checks = ("soundness",) if args.suite == "soundness" else ("completeness",)
        reports = [verify.soundness_suite(cfg, m, checks) for m in monitors]
    elif args.suite == "diff":
        reports = [verify.differential_suite(cfg)]
    elif args.suite == "principled":
        reports = [verify.principled_suite(cfg, args.horizon)]
    elif args.suite == "bisim":
        reports = [verify.bisim_suite(cfg, max_locations=locations)]
    else:
        reports = [verify.random_confluence_suite(cfg, args.schedulers)]
    data = {"suite": args.suite, "seed": args.seed, "samples": samples,
            "ok": all(r.ok for r in reports), "reports": [r.to_json() for r in reports]}
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2)
    summary = "\n".join(r.summary() for r in reports)
    if out.as_json:
        print(json.dumps(data))
        print(summary, file=sys.stderr)
    else:
        print(summary)
    return EXIT_OK if data["ok"] else EXIT_FAILED


COMMANDS = {
    "parse": cmd_parse,
    "classify": cmd_classify,
    "eval": cmd_eval,
    "synth-central": cmd_synth_central,
    "synth-dec": cmd_synth_dec,
    "run-central": cmd_run_central,
    "run-dec": cmd_run_dec,
    "diff": cmd_diff,
    "verify": cmd_verify,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    as_json = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, Output(args.json))
    except BudgetExceeded as exc:
        return _fail(as_json, "budget", exc, EXIT_BUDGET)
    except (HypermonError, OSError) as exc:
        return _fail(as_json, type(exc).__name__, exc, EXIT_USAGE)


def _fail(as_json, kind, exc, code):
    message = str(exc)
    if isinstance(exc, OSError) and exc.filename:
        message = f"{exc.strerror}: {exc.filename}"
    if as_json:
        print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    else:
        print(f"hypermon: error: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
