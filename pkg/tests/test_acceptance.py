"""Acceptance suite: one PASS/FAIL line per criterion, printed even under capture.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines show
up in the terminal output next to the pytest verdicts.
"""

import itertools
import random
import time

import numpy as np
import pytest

from locdiv.algebra import Morphism, cyclic_group, is_unit, local_divisor
from locdiv.automata import all_words, compile_regex, parse_regex
from locdiv.corpus import all_monoids, random_transformation_monoid, random_word
from locdiv.crs import (
    WeightedAlphabet, bundled_system, check_confluence, congruence_classes,
    count_irreducible, check_non_overlap, crs_construction, factorizes_through, is_confluent,
)
from locdiv.forest import build_forest, height_bound, prefix_set, validate
from locdiv.ltl import WordBatch, synth_ltl
from locdiv.sd import (
    F_EMPTY, FLetter, S_EMPTY, aperiodicity_index, check_sync_delay, compile_expr, f_compl,
    f_concat, f_union, is_complement_free, is_prefix_code, sd_to_starfree, stars, synth_sd,
)

from conftest import corpus_dfas, corpus_homs

AB = ("a", "b")


@pytest.fixture
def emit(capsys):
    def say(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    return say


def named_languages():
    """The regular aperiodic examples: words containing a, and (ab)*."""
    return [compile_regex(parse_regex(text, AB), AB) for text in ("(a+b)*a(a+b)*", "(ab)*")]


def language_corpus():
    return list(corpus_dfas()) + named_languages()


def test_criterion_1_printed_systems(emit):
    problems = []
    start = time.perf_counter()
    t6 = bundled_system("L6-T")
    classes6 = len(congruence_classes(t6))
    longest6 = count_irreducible(t6).max_length
    elapsed = time.perf_counter() - start
    if classes6 != 272 or longest6 != 16 or elapsed >= 10:
        problems.append(f"L6-T: {classes6} classes (want 272), longest {longest6} (want 16), {elapsed:.2f}s")

    classes4 = len(congruence_classes(bundled_system("L4-T")))
    if classes4 != 7:
        problems.append(f"L4-T: {classes4} classes (want 7)")

    blocks3 = congruence_classes(bundled_system("L3-S"))
    if sorted(w for b in blocks3 for w in b) != [(), ("a",)] or len(blocks3) != 2:
        problems.append(f"L3-S: classes {blocks3}")

    naive = check_confluence(bundled_system("L6-naive"))
    peak = [f for f in naive.failures if f.peak == tuple("aabb") and {f.left_nf, f.right_nf} == {("a",), ("b",)}]
    if naive.confluent or not peak:
        problems.append("L6-naive: no failure from the peak aabb")

    detail = "; ".join(problems) or f"L6-T 272/16 in {elapsed:.2f}s, L4-T 7, L3-S 2, naive peak aabb"
    emit(1, not problems, detail)
    assert not problems, detail


def test_criterion_2_ltl_synthesis(emit):
    start = time.perf_counter()
    words = [w for w in all_words(AB, 10) if w]
    batch = WordBatch(words, AB)
    disagreements = 0
    dfas = language_corpus()
    for d in dfas:
        disagreements += int((batch.ltl(synth_ltl(d)) != batch.dfa(d)).sum())
    elapsed = time.perf_counter() - start
    ok = disagreements == 0 and elapsed < 300
    detail = f"{len(dfas)} languages x {len(words)} words, {disagreements} disagreements, {elapsed:.1f}s"
    emit(2, ok, detail)
    assert ok, detail


def test_criterion_3_sd_synthesis(emit):
    words = list(all_words(AB, 10))
    disagreements = certificate_failures = complements = 0
    checked = set()
    dfas = language_corpus()
    for d in dfas:
        e = synth_sd(d)
        got = compile_expr(e, AB)
        disagreements += sum(got.accepts(w) != d.accepts(w) for w in words)
        complements += not is_complement_free(e)
        for s in stars(e):
            if s in checked or s.arg is S_EMPTY:
                continue
            checked.add(s)
            ok = is_prefix_code(s.arg, AB) and check_sync_delay(s.arg, s.delay, 3 * (s.delay + 2), AB)
            certificate_failures += not ok
    ok = disagreements == certificate_failures == complements == 0
    detail = (f"{len(dfas)} languages, {disagreements} disagreements, {len(checked)} distinct stars, "
              f"{certificate_failures} certificate failures, {complements} complement nodes")
    emit(3, ok, detail)
    assert ok, detail


def random_starfree(r, depth):
    if depth == 0 or r.random() < 0.25:
        return r.choice([F_EMPTY, FLetter("a"), FLetter("b")])
    op = r.randrange(3)
    if op == 0:
        return f_compl(random_starfree(r, depth - 1))
    left, right = random_starfree(r, depth - 1), random_starfree(r, depth - 1)
    return f_union(left, right) if op == 1 else f_concat(left, right)


def test_criterion_4_starfree_round_trip(emit):
    words = list(all_words(AB, 8))
    round_trip_bad = 0
    dfas = language_corpus()
    for d in dfas:
        sf = compile_expr(sd_to_starfree(synth_sd(d), AB), AB)
        round_trip_bad += any(sf.accepts(w) != d.accepts(w) for w in words)

    r = random.Random(2024)
    short = list(all_words(AB, 3))
    pump_bad = 0
    for _ in range(50):
        e = random_starfree(r, 4)
        n = aperiodicity_index(e)
        d = compile_expr(e, AB)
        for p, u, q in itertools.product(short, repeat=3):
            if d.accepts(p + u * n + q) != d.accepts(p + u * (n + 1) + q):
                pump_bad += 1
                break
    ok = round_trip_bad == pump_bad == 0
    detail = f"round trip {len(dfas) - round_trip_bad}/{len(dfas)}, pump property {50 - pump_bad}/50"
    emit(4, ok, detail)
    assert ok, detail


def crs_failures(h, weights):
    res = crs_construction(h, weights)
    s = res.system
    count = count_irreducible(s)
    checks = {
        "weight-reducing": s.is_weight_reducing(),
        "confluent": is_confluent(s),
        "finite index": count.finite,
        "factorizes": bool(factorizes_through(h, s, maxlen=10)),
        "non-overlap": check_non_overlap(res),
        "length bound": res.letter is None or count.max_length <= res.length_bound,
    }
    return [k for k, v in checks.items() if not v]


def test_criterion_5_church_rosser(emit):
    homs = corpus_homs()
    r = random.Random(5)
    failed = {}
    for mode in ("unit", "random"):
        for i, h in enumerate(homs):
            if mode == "unit":
                wa = WeightedAlphabet.unit(h.alphabet)
            else:
                wa = WeightedAlphabet(h.alphabet, tuple(r.randint(1, 5) for _ in h.alphabet))
            bad = crs_failures(h, wa)
            if bad:
                failed[(mode, i)] = bad
    ok = not failed
    detail = f"{len(homs)} morphisms x 2 weightings, {len(failed)} failing" + (f": {list(failed.items())[:3]}" if failed else "")
    emit(5, ok, detail)
    assert ok, detail


def divisor_violations(m):
    """Counts violations of the unit, size and idempotent-lifting properties of local divisors."""
    bad = 0
    mul = m.mul
    for c in range(m.size):
        ld = local_divisor(m, c)
        if is_unit(m, c):
            if {x for x in range(m.size) if mul(c, x) in ld} != set(range(m.size)):
                bad += 1
            phi = [ld.index(mul(c, x)) for x in range(m.size)]
            bad += sorted(phi) != list(range(m.size))
            bad += any(phi[mul(x, y)] != ld.quotient.mul(phi[x], phi[y])
                       for x in range(m.size) for y in range(m.size))
        elif len(ld.carrier) >= m.size:
            bad += 1
        for x in range(m.size):
            cxc = mul(mul(c, x), c)
            if not ld.quotient.is_idempotent(ld.index(cxc)):
                continue
            for y in range(m.size):
                if mul(mul(c, y), c) != cxc:
                    continue
                bad += not m.is_idempotent(mul(cxc, y))
                bad += not m.is_idempotent(mul(mul(x, c), mul(y, c)))
    return bad


def test_criterion_6_local_divisors(emit):
    tables = [m for n in range(1, 5) for m in all_monoids(n)]
    corpus = {h.monoid.table: h.monoid for h in corpus_homs()}
    r = random.Random(6)
    randoms = [random_transformation_monoid(r) for _ in range(200)]
    monoids = tables + list(corpus.values()) + randoms
    violations = sum(divisor_violations(m) for m in monoids)
    ok = violations == 0
    detail = (f"{len(tables)} tables of size <= 4, {len(corpus)} corpus monoids, "
              f"{len(randoms)} random monoids, {violations} violations")
    emit(6, ok, detail)
    assert ok, detail


def test_criterion_7_forests(emit):
    homs = list(corpus_homs()) + [Morphism(AB, cyclic_group(3), (1, 0))]
    r = random.Random(7)
    invalid = over_bound = group_over = 0
    growing = []
    overall = {32: 0, 128: 0, 512: 0}
    for h in homs:
        m = h.monoid
        bound = height_bound(m.size, len(set(h.images)))
        group = all(is_unit(m, x) for x in h.images)
        best = {}
        for n in (32, 128, 512):
            top = 0
            for _ in range(100):
                w = random_word(r, h.alphabet, n)
                t = build_forest(h, w)
                invalid += not validate(h, w, t).valid
                over_bound += t.height > bound
                if group:
                    group_over += t.height > 3 * len(prefix_set(h, w))
                top = max(top, t.height)
            best[n] = top
            overall[n] = max(overall[n], top)
        if best[512] != best[128]:
            growing.append(best)
    ok = invalid == over_bound == group_over == 0 and not growing
    detail = (f"{len(homs)} morphisms: {invalid} invalid, {over_bound} over the recurrence bound, "
              f"{group_over} over 3|P(w)|; max height at 512 differs from 128 for {len(growing)} morphisms; "
              f"corpus max heights {overall}")
    emit(7, ok, detail)
    assert ok, detail


def test_criterion_8_linear_normal_form(emit):
    t6 = bundled_system("L6-T")
    rng = np.random.default_rng(8)
    small = tuple(rng.choice(list(AB), 10**5))
    large = tuple(rng.choice(list(AB), 10**6))

    def best_time(w):
        times = []
        for _ in range(3):
            start = time.perf_counter()
            t6.normal_form(w)
            times.append(time.perf_counter() - start)
        return min(times)

    ratio = best_time(large) / best_time(small)
    ok = ratio <= 15
    detail = f"time ratio 10^6 / 10^5 letters = {ratio:.2f} (limit 15)"
    emit(8, ok, detail)
    assert ok, detail
