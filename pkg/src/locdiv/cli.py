"""Command-line entry point: ``locdiv <group> <command> ...``.

Exit status is 0 when the artifact was produced and every check passed,
1 when a check failed (the artifact and the failure report are still
printed) and 2 for unusable input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from pathlib import Path
from typing import Sequence

from . import __version__
from .algebra import (
    Monoid,
    Morphism,
    NotAperiodicError,
    aperiodicity_witness,
    idempotent_power,
    units,
)
from .automata import Dfa, all_words, compile_regex, minimize, parse_regex
from .crs import (
    RewriteError,
    SystemFormatError,
    WeightedAlphabet,
    check_confluence,
    check_non_overlap,
    congruence_classes,
    count_irreducible,
    crs_construction,
    factorizes_through,
    format_system,
    parse_system,
)
from .forest import build_forest, format_tree, height_bound, stats, to_json, validate
from .ltl import WordBatch, eval_ltl, format_ltl, parse_ltl, synth_ltl
from .sd import (
    certify,
    check_sync_delay,
    compile_expr,
    format_sd,
    format_starfree,
    is_complement_free,
    parse_sd,
    sd_letters,
    sd_to_starfree,
    synth_sd,
)


class InputError(Exception):
    """Unusable input; reported on stderr with exit status 2."""


class Report:
    """Collects one run's output text, verification results and input fingerprints."""

    def __init__(self, argv: Sequence[str]):
        self.command = list(argv)
        self.inputs: dict[str, str] = {}
        self.lines: list[str] = []
        self.output: object = None
        self.checks: dict[str, object] = {}
        self.ok = True

    def say(self, line: str) -> None:
        self.lines.append(line)

    def check(self, name: str, passed: bool, detail: object = None) -> None:
        self.checks[name] = {"passed": bool(passed)} if detail is None else {"passed": bool(passed), "detail": detail}
        self.ok &= bool(passed)

    def to_json(self) -> dict:
        out = {"command": self.command, "inputs": self.inputs, "output": self.output, "ok": self.ok}
        if self.checks:
            out["verification"] = self.checks
        return out


# -- input helpers ---------------------------------------------------------------


def _read(report: Report, path: str) -> str:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    report.inputs[path] = hashlib.sha256(data).hexdigest()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        raise InputError(f"{path}: not UTF-8 text") from None


def _read_json(report: Report, path: str) -> dict:
    text = _read(report, path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: {exc.msg}") from None


def _load_monoid(report: Report, path: str) -> Monoid:
    try:
        return Monoid.from_json(_read_json(report, path))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_morphism(report: Report, path: str) -> Morphism:
    data = _read_json(report, path)
    try:
        if isinstance(data.get("monoid"), str):
            data = dict(data, monoid=_read_json(report, str(Path(path).parent / data["monoid"])))
        return Morphism.from_json(data)
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_dfa(report: Report, args) -> Dfa:
    if args.dfa:
        try:
            return Dfa.from_json(_read_json(report, args.dfa))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.dfa}: {exc}") from None
    if not args.alphabet:
        raise InputError("--regex needs --alphabet")
    try:
        return minimize(compile_regex(parse_regex(args.regex, list(args.alphabet)), tuple(args.alphabet)))
    except ValueError as exc:
        raise InputError(f"regex: {exc}") from None


def _word(text: str) -> tuple:
    """``abba`` or ``a b b a``; ``_`` alone is the empty word."""
    text = text.strip()
    if text in ("", "_"):
        return ()
    return tuple(text.split()) if any(ch.isspace() for ch in text) else tuple(text)


def _weights(text: str | None, letters: Sequence) -> WeightedAlphabet:
    if not text:
        return WeightedAlphabet.unit(letters)
    table = {}
    for item in text.replace(",", " ").split():
        name, sep, value = item.partition("=")
        if not sep or not value.isdigit():
            raise InputError(f"bad weight {item!r}; expected letter=positive-integer")
        table[name] = int(value)
    if set(table) != set(letters):
        raise InputError(f"weights must cover exactly the letters {list(letters)}")
    try:
        return WeightedAlphabet(tuple(letters), tuple(table[a] for a in letters))
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _system(report: Report, path: str):
    try:
        return parse_system(_read(report, path), path)
    except SystemFormatError as exc:
        raise InputError(str(exc)) from None


# -- commands --------------------------------------------------------------------


def cmd_monoid_check_aperiodic(args, report: Report) -> None:
    m = _load_monoid(report, args.monoid)
    witness = aperiodicity_witness(m)
    report.say(f"aperiodic: {str(witness is None).lower()}")
    if witness is not None:
        report.say(f"witness: element {witness} lies in a nontrivial group")
    report.output = {"aperiodic": witness is None, "witness": witness}


def cmd_monoid_info(args, report: Report) -> None:
    m = _load_monoid(report, args.monoid)
    idem = [x for x in range(m.size) if m.is_idempotent(x)]
    info = {
        "size": m.size,
        "identity": m.identity,
        "idempotents": idem,
        "units": units(m),
        "idempotent_power": idempotent_power(m),
        "aperiodic": aperiodicity_witness(m) is None,
    }
    for k, v in info.items():
        report.say(f"{k.replace('_', '-')}: {v}")
    report.output = info


def _oracle_words(alphabet, maxlen: int, nonempty: bool) -> list[tuple]:
    return list(all_words(alphabet, maxlen, minlen=1 if nonempty else 0))


def cmd_synth_ltl(args, report: Report) -> None:
    dfa = _load_dfa(report, args)
    f = synth_ltl(dfa)
    text = format_ltl(f)
    report.say(text)
    report.output = {"formula": text}
    if args.check_maxlen > 0:
        words = _oracle_words(dfa.alphabet, args.check_maxlen, nonempty=True)
        batch = WordBatch(words, dfa.alphabet)
        agree = int((batch.ltl(f) == batch.dfa(dfa)).sum())
        report.say(f"oracle agreement {agree}/{len(words)}")
        report.check("oracle", agree == len(words), {"agree": agree, "total": len(words), "maxlen": args.check_maxlen})
    if dfa.accepts(()):
        report.say("note: the empty word is accepted but formulas only describe nonempty words")


def cmd_synth_sd(args, report: Report) -> None:
    dfa = _load_dfa(report, args)
    e = synth_sd(dfa)
    text = format_sd(e)
    report.say(text)
    report.output = {"expression": text}
    report.check("complement-free", is_complement_free(e))
    if args.check_maxlen > 0:
        words = _oracle_words(dfa.alphabet, args.check_maxlen, nonempty=False)
        compiled = compile_expr(e, dfa.alphabet)
        agree = sum(compiled.accepts(w) == dfa.accepts(w) for w in words)
        report.say(f"oracle agreement {agree}/{len(words)}")
        report.check("oracle", agree == len(words), {"agree": agree, "total": len(words), "maxlen": args.check_maxlen})
        certs = certify(e, dfa.alphabet)
        good = sum(c.prefix_code and c.delay.holds for c in certs)
        report.say(f"star certificates {good}/{len(certs)}")
        report.check("certificates", good == len(certs), {"passed": good, "stars": len(certs)})


def cmd_crs_build(args, report: Report) -> None:
    h = _load_morphism(report, args.hom)
    weights = _weights(args.weights, h.alphabet)
    try:
        result = crs_construction(h, weights)
    except NotAperiodicError as exc:
        raise InputError(f"{args.hom}: {exc}") from None
    system = result.system
    text = format_system(system)
    report.say(text.rstrip("\n"))
    report.output = {"system": text, "rules": len(system.rules)}
    report.check("weight-reducing", system.is_weight_reducing())
    conf = check_confluence(system, stop_at_first=True)
    report.check("confluent", conf.confluent, {"pairs": conf.pairs_checked})
    count = count_irreducible(system)
    report.check("finite-index", count.finite, {"classes": count.count, "max_length": count.max_length})
    report.check("non-overlap", check_non_overlap(result))
    within = count.finite and (result.letter is None or count.max_length <= result.length_bound)
    report.check("length-bound", within, {"bound": result.length_bound, "max_length": count.max_length})
    if args.check_maxlen > 0:
        fact = factorizes_through(h, system, maxlen=args.check_maxlen)
        report.check("factorizes", fact.holds, None if fact.holds else {"witness": list(map(str, fact.witness))})
    failed = [k for k, v in report.checks.items() if not v["passed"]]
    report.say("verification: " + ("all checks passed" if not failed else "FAILED " + ", ".join(failed)))


def cmd_crs_classes(args, report: Report) -> None:
    system = _system(report, args.system)
    count = count_irreducible(system)
    if not count.finite:
        report.say("classes: infinite")
        report.output = {"finite": False}
        return
    try:
        blocks = congruence_classes(system, max_words=max(count.count, 1), max_length=count.max_length + 1)
    except RewriteError as exc:
        raise InputError(str(exc)) from None
    longest = max(len(min(b, key=lambda w: (len(w), w))) for b in blocks)
    nonempty = sum(1 for b in blocks if () not in b)
    report.say(f"classes: {len(blocks)}, max-irreducible-length: {longest}")
    report.say(f"irreducible words: {count.count}, classes without the empty word: {nonempty}")
    report.output = {"classes": len(blocks), "max_irreducible_length": longest,
                     "irreducible_words": count.count, "nonempty_classes": nonempty}


def cmd_rewrite_nf(args, report: Report) -> None:
    system = _system(report, args.system)
    word = _word(args.word)
    stray = set(word) - set(system.alphabet.letters)
    if stray:
        raise InputError(f"letters outside the system alphabet: {sorted(stray)}")
    nf = system.normal_form(word)
    text = "".join(nf) if all(len(x) == 1 for x in nf) else " ".join(nf)
    report.say(text or "_")
    report.output = {"normal_form": list(nf)}


def cmd_check_confluence(args, report: Report) -> None:
    system = _system(report, args.system)
    conf = check_confluence(system)
    report.say(f"confluent: {str(conf.confluent).lower()} ({conf.pairs_checked} critical pairs)")
    failures = []
    for f in conf.failures[: args.show]:
        line = (f"peak {''.join(map(str, f.peak))}: {''.join(map(str, f.left)) or '_'} ->* "
                f"{''.join(map(str, f.left_nf)) or '_'} but {''.join(map(str, f.right)) or '_'} ->* "
                f"{''.join(map(str, f.right_nf)) or '_'}")
        report.say(line)
        failures.append({"peak": list(f.peak), "left": list(f.left), "right": list(f.right),
                         "left_nf": list(f.left_nf), "right_nf": list(f.right_nf)})
    report.output = {"confluent": conf.confluent, "pairs": conf.pairs_checked, "failures": failures}
    report.check("confluent", conf.confluent)


def cmd_check_sync_delay(args, report: Report) -> None:
    e = _parse_expr(args.expr, parse_sd)
    alphabet = tuple(args.alphabet) if args.alphabet else None
    result = check_sync_delay(e, args.delay, args.maxlen, alphabet)
    report.say(f"delay {args.delay}: {'holds' if result.holds else 'fails'}"
               + ("" if args.maxlen is None else f" (|uvw| <= {args.maxlen})"))
    if result.witness:
        u, v, w = ("".join(map(str, x)) or "_" for x in result.witness)
        report.say(f"witness: u={u} v={v} w={w}")
    report.output = {"holds": result.holds, "witness": None if not result.witness else [list(x) for x in result.witness]}
    report.check("sync-delay", result.holds)


def _parse_expr(text: str, parse):
    try:
        return parse(text)
    except ValueError as exc:
        raise InputError(f"expression: {exc}") from None


def cmd_convert_sd_to_starfree(args, report: Report) -> None:
    e = _parse_expr(args.expr, parse_sd)
    alphabet = tuple(args.alphabet) if args.alphabet else tuple(sorted(sd_letters(e), key=str))
    f = sd_to_starfree(e, alphabet)
    text = format_starfree(f)
    report.say(text)
    report.output = {"starfree": text}
    if args.check_maxlen > 0:
        a, b = compile_expr(e, alphabet), compile_expr(f, alphabet)
        words = list(all_words(alphabet, args.check_maxlen))
        agree = sum(a.accepts(w) == b.accepts(w) for w in words)
        report.say(f"oracle agreement {agree}/{len(words)}")
        report.check("round-trip", agree == len(words), {"agree": agree, "total": len(words)})


def cmd_forest_build(args, report: Report) -> None:
    h = _load_morphism(report, args.hom)
    if args.word is not None:
        word = _word(args.word)
    else:
        word = tuple(random.Random(args.seed).choice(h.alphabet) for _ in range(args.random))
    stray = set(word) - set(h.alphabet)
    if stray:
        raise InputError(f"letters outside the alphabet: {sorted(map(str, stray))}")
    t = build_forest(h, word)
    report.say(format_tree(t))
    report.output = {"tree": to_json(t)}
    if args.stats:
        s = stats(t)
        bound = height_bound(h.monoid.size, len(set(h.images)))
        report.say(f"length: {s.length}, height: {s.height}, nodes: {s.nodes}, "
                   f"idempotent nodes: {s.idempotent_nodes}, widest: {s.widest}, height bound: {bound}")
        report.output["stats"] = {**vars(s), "height_bound": bound}
    if args.validate:
        v = validate(h, word, t)
        report.say("valid: " + str(v.valid).lower())
        for problem in v.violations:
            report.say("  " + problem)
        report.check("valid", v.valid, None if v.valid else list(v.violations))


def cmd_eval_ltl(args, report: Report) -> None:
    f = _parse_expr(args.formula, parse_ltl)
    word = _word(args.word)
    if not word:
        raise InputError("formulas are evaluated on nonempty words")
    if not 1 <= args.position <= len(word):
        raise InputError(f"position {args.position} is outside 1..{len(word)}")
    value = eval_ltl(f, word, args.position)
    report.say(str(value).lower())
    report.output = {"value": value}


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON run report instead of text")
    common.add_argument("--timing", action="store_true", help="report wall-clock time (breaks byte-identical output)")

    parser = argparse.ArgumentParser(prog="locdiv", description="Local-divisor constructions for finite monoids.")
    parser.add_argument("--version", action="version", version=f"locdiv {__version__}")
    groups = parser.add_subparsers(dest="group", required=True)

    def command(group, name, func, help_text):
        p = group.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    def dfa_input(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--dfa", help="DFA JSON file")
        src.add_argument("--regex", help="regular expression (needs --alphabet)")
        p.add_argument("--alphabet", help="letters for --regex, e.g. ab")
        p.add_argument("--check-maxlen", type=int, default=8, help="oracle check bound; 0 disables (default 8)")

    g = groups.add_parser("monoid", help="monoid tables").add_subparsers(dest="command", required=True)
    command(g, "check-aperiodic", cmd_monoid_check_aperiodic, "is every group in the monoid trivial").add_argument("monoid")
    command(g, "info", cmd_monoid_info, "idempotents, units and the idempotent power").add_argument("monoid")

    g = groups.add_parser("synth", help="synthesize formulas and expressions").add_subparsers(dest="command", required=True)
    dfa_input(command(g, "ltl", cmd_synth_ltl, "LTL formula for an aperiodic language"))
    dfa_input(command(g, "sd", cmd_synth_sd, "SD expression for an aperiodic language"))

    g = groups.add_parser("crs", help="Church-Rosser systems").add_subparsers(dest="command", required=True)
    p = command(g, "build", cmd_crs_build, "build a weighted Church-Rosser system for a morphism")
    p.add_argument("--hom", required=True)
    p.add_argument("--weights", help="letter weights, e.g. a=1,b=2 (default all 1)")
    p.add_argument("--check-maxlen", type=int, default=8)
    command(g, "classes", cmd_crs_classes, "count congruence classes").add_argument("--system", required=True)

    g = groups.add_parser("rewrite", help="string rewriting").add_subparsers(dest="command", required=True)
    p = command(g, "nf", cmd_rewrite_nf, "normal form of a word")
    p.add_argument("--system", required=True)
    p.add_argument("--word", required=True)

    g = groups.add_parser("check", help="property checks").add_subparsers(dest="command", required=True)
    p = command(g, "confluence", cmd_check_confluence, "critical-pair confluence check")
    p.add_argument("--system", required=True)
    p.add_argument("--show", type=int, default=3, help="failures to print")
    p = command(g, "sync-delay", cmd_check_sync_delay, "synchronization delay of a prefix code")
    p.add_argument("--expr", required=True)
    p.add_argument("--delay", type=int, required=True)
    p.add_argument("--maxlen", type=int, help="only consider |uvw| <= maxlen")
    p.add_argument("--alphabet")

    g = groups.add_parser("forest", help="factorization forests").add_subparsers(dest="command", required=True)
    p = command(g, "build", cmd_forest_build, "factorization tree for a word")
    p.add_argument("--hom", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--word")
    src.add_argument("--random", type=int, metavar="N", help="use a random word of length N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--validate", action="store_true")
    p.add_argument("--stats", action="store_true")

    g = groups.add_parser("convert", help="expression conversions").add_subparsers(dest="command", required=True)
    p = command(g, "sd-to-starfree", cmd_convert_sd_to_starfree, "star-free expression for an SD expression")
    p.add_argument("--expr", required=True)
    p.add_argument("--alphabet")
    p.add_argument("--check-maxlen", type=int, default=8)

    g = groups.add_parser("eval", help="evaluation").add_subparsers(dest="command", required=True)
    p = command(g, "ltl", cmd_eval_ltl, "truth of a formula at a position of a word")
    p.add_argument("--formula", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--position", type=int, default=1)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    report = Report(argv)
    start = time.perf_counter()
    try:
        args.func(args, report)
    except InputError as exc:
        print(f"locdiv: error: {exc}", file=sys.stderr)
        return 2
    except NotAperiodicError as exc:
        print(f"locdiv: error: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - start
    if args.json:
        data = report.to_json()
        if args.timing:
            data["timing"] = round(elapsed, 6)
        print(json.dumps(data, indent=2, sort_keys=True, default=str))
    else:
        for line in report.lines:
            print(line)
        if args.timing:
            print(f"time: {elapsed:.3f}s")
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
