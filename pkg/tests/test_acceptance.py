"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import random
import time

import pytest

from cantordyn import catalog
from cantordyn.analyzer import (Verdict, almost_periodic, distal_report, minimal_on_closure,
                                proximal, s_recurrent, sample_points, theorem_consistency)
from cantordyn.config import Budgets
from cantordyn.cylinders import ClopenSet, Point, agreement, all_words, parse_point, standard_points
from cantordyn.errors import BudgetExceeded
from cantordyn.oracle import oracle_check, random_clopen, random_script, standard_script
from cantordyn.tower import build_tower, shell_walk, translate_family, v_infinity_verdict
from cantordyn.words import GeneratingSet, ball

from conftest import random_exchange, random_transducer


def family(k=2):
    return [ClopenSet.full(k)] + [ClopenSet.cylinder(k, w) for d in (1, 2) for w in all_words(k, d)]


def sync_names():
    return [n for n in catalog.names() if catalog.get(n).generating_set().is_synchronous]


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def test_criterion_1_consistency_suite(report):
    start = time.perf_counter()
    bad, count = [], 0
    for name in catalog.names():
        gens = catalog.get(name).generating_set()
        for U in family():
            r = theorem_consistency(gens, U, Budgets(), system=name)
            r.replay()
            count += 1
            if not r.consistent:
                bad.append((name, str(U), [v.value for v in r.verdicts]))
    elapsed = time.perf_counter() - start
    report(1, not bad and elapsed <= 30,
           f"{count} reports, {len(bad)} inconsistent, {elapsed:.1f}s (limit 30s)")


def test_criterion_2_tower_both_directions(report):
    odo = v_infinity_verdict(catalog.get("odometer").generating_set(), ClopenSet.cylinder(2, (1,)))
    ok_odo = odo.open == "yes" and odo.tower.stabilized_at == 0 and odo.v_infinity.is_empty()

    gens = catalog.get("contract-h").generating_set()
    res = v_infinity_verdict(gens, ClopenSet.cylinder(2, (0,)), Budgets(max_n=12))
    levels_ok = all(res.tower.V(n) == ClopenSet.cylinder(2, (0,) * (n + 2)) for n in range(13))
    cert = res.certificate
    replayed = False
    if cert is not None:
        cert.replay(res.tower)
        its = cert.convergence.iterates()
        replayed = all(any(res.tower.V(n).contains(z) for z in its) for n in range(13))
    ok = ok_odo and levels_ok and res.open == "no" and replayed
    report(2, ok, f"odometer open={odo.open} V_inf={odo.v_infinity}; contract-h V_n exact for "
                  f"n<=12: {levels_ok}, verdict={res.open}, witness {cert.witness if cert else None} "
                  f"replayed: {replayed}")


def _random_small_system(rng):
    n = rng.randint(1, 3)
    if rng.random() < 0.5:
        gs = [random_transducer(rng, max_states=4) for _ in range(n)]
    else:
        gs = [random_exchange(rng, max_pairs=6) for _ in range(n)]
    V = random_clopen(rng, 2, 3, 4)
    return GeneratingSet(gs), V


def test_criterion_3_shell_suite(report):
    rng = random.Random(2024)
    pts = standard_points(2, 6)
    violations, walks = [], 0
    for trial in range(50):
        gens, V = _random_small_system(rng)
        t = build_tower(gens, V, 8, translate_depth=0)
        for a, b in zip(t.levels, t.levels[1:]):
            if not b.V <= a.V:
                violations.append((trial, "chain", b.n))
            if not b.P <= a.P:
                violations.append((trial, "P descent", b.n))
        for lvl in t.levels:
            for other in t.levels[lvl.n + 1:]:
                if not (lvl.W & other.W).is_empty():
                    violations.append((trial, "W overlap", lvl.n, other.n))
        empty = [l.W.is_empty() for l in t.levels]
        for n in range(len(empty)):
            if not empty[n] and any(empty[:n]):
                violations.append((trial, "shell monotonicity", n))
        for x in pts:
            if not t.V0.contains(x):
                continue
            top = t.shell_index(x)
            if top is None:
                continue
            for n in range(top + 1):
                steps = shell_walk(gens, t, x, n)
                walks += 1
                if [s.m for s in steps] != list(range(n + 1)) or not all(
                        t.W(s.m).contains(s.element.apply(x)) for s in steps):
                    violations.append((trial, "shell walk", str(x), n))
    report(3, not violations and walks > 0,
           f"50 systems, {walks} shell walks, {len(violations)} violations")


def test_criterion_4_translate_counts(report):
    mismatches, checked = [], 0
    for name in catalog.names():
        gens = catalog.get(name).generating_set()
        for V in family():
            t = build_tower(gens, V, 4, translate_depth=4)
            for n in range(5):
                Vn = t.V(n)
                for m in range(n + 1):
                    inc = translate_family(gens, Vn, m)
                    via_ball = translate_family(gens, Vn, m, method="ball")
                    checked += 1
                    recorded = t.translate_counts.get((m, n))
                    if inc != via_ball or (recorded is not None and recorded != len(inc)):
                        mismatches.append((name, str(V), m, n))
    report(4, not mismatches, f"{checked} (system, V, m, n) cases, {len(mismatches)} mismatches")


def test_criterion_5_almost_periodic_equivalence(report):
    b = Budgets()
    contradictions, checked, recurrence_checked = [], 0, 0
    for name in catalog.names():
        gens = catalog.get(name).generating_set()
        seen = {}
        for x in sample_points(gens, b):
            ap = almost_periodic(gens, x, b)
            mn = minimal_on_closure(gens, x, b)
            checked += 1
            if ap.verdict is not mn.verdict:
                contradictions.append((name, str(x), "ap vs minimal"))
            if ap.verdict is not Verdict.HOLDS:
                continue
            # for transducers the surrogate only sees the depth-1 prefix
            key = x.letters(1) if gens.is_synchronous else x
            if key not in seen:
                U = ClopenSet.cylinder(gens.k, x.letters(1))
                seen[key] = s_recurrent(gens, x, U, b.radius, b.radius, budgets=b)
            recurrence_checked += 1
            if seen[key].verdict is Verdict.FAILS:
                contradictions.append((name, str(x), "ap but recurrence fails"))
    report(5, not contradictions,
           f"{checked} points, {recurrence_checked} recurrence checks, {len(contradictions)} contradictions")


def test_criterion_6_oracle(report):
    failures = []
    for name in sync_names():
        gens = catalog.get(name).generating_set()
        regs, ops = standard_script(gens.k, len(gens))
        diff = oracle_check(gens, 10, ops, regs)
        if not diff.passed:
            failures.append((name, str(diff)))
    rng = random.Random(7)
    pool = [catalog.get(n).generating_set() for n in sync_names()]
    for i in range(200):
        if i % 2:
            gens = rng.choice(pool)
        else:
            gens = GeneratingSet([random_transducer(rng, max_states=4) for _ in range(rng.randint(1, 3))])
        regs = [random_clopen(rng, 2, 6) for _ in range(3)]
        ops = random_script(rng, len(regs), len(gens), 10, 2, 6)
        diff = oracle_check(gens, 10, ops, regs)
        if not diff.passed:
            failures.append((f"script {i}", str(diff)))
    report(6, not failures, f"{len(sync_names())} catalog systems at d=10 and 200 random scripts, "
                            f"{len(failures)} diffs")


def test_criterion_7_isometry_distality(report):
    rng = random.Random(99)
    names = sync_names()
    structural = all(distal_report(catalog.get(n).generating_set(), []).verdict == "distal"
                     for n in names)
    false_positive, pairs = [], 0
    tables = {}
    b = Budgets(radius=8)
    while pairs < 100:
        name = names[pairs % len(names)]
        gens = catalog.get(name).generating_set() if name not in tables else tables[name][0]
        if name not in tables:
            try:
                tables[name] = (gens, ball(gens, 8))
            except BudgetExceeded as e:
                tables[name] = (gens, e.partial)
        gens, table = tables[name]
        x = Point.of(tuple(rng.randrange(2) for _ in range(rng.randint(0, 4))),
                     tuple(rng.randrange(2) for _ in range(rng.randint(1, 3))))
        y = Point.of(tuple(rng.randrange(2) for _ in range(rng.randint(0, 4))),
                     tuple(rng.randrange(2) for _ in range(rng.randint(1, 3))))
        if x == y:
            continue
        pairs += 1
        r = proximal(gens, x, y, b)
        # independent route: agreement depth over the whole radius-8 ball
        base = agreement(x, y)
        moved = any(agreement(g.apply(x), g.apply(y)) != base for g in table.within(table.radius))
        if r.verdict != "no-witness" or moved:
            false_positive.append((name, str(x), str(y)))
    report(7, structural and not false_positive,
           f"structural distality on {len(names)} systems: {structural}; "
           f"{pairs} random pairs at radius 8, {len(false_positive)} false positives")


def test_criterion_8_negative_control(report):
    gens = catalog.get("contract-h").generating_set()
    attempted, replayed, missing = 0, 0, []
    for U in family():
        r = theorem_consistency(gens, U)
        for cond in r.conditions[:5]:
            if cond.verdict is not Verdict.FAILS:
                continue
            certs = cond.certificates()
            if not certs:
                missing.append((str(U), cond.label))
                continue
            for c in certs:
                attempted += 1
                c.replay()
                replayed += 1
    full = theorem_consistency(gens, ClopenSet.full(2))
    all_fail = all(c.verdict is Verdict.FAILS for c in full.conditions[:5])
    # spot-check the published witness pair directly through apply/contains
    x, y = parse_point("0(1)"), parse_point("(0)")
    h = gens[1]
    direct = all(ClopenSet.cylinder(2, (0,) * (n + 1)).contains(_power(h, n).apply(x)) for n in range(12))
    direct &= h.apply(y) == y and h.inverse.apply(y) == y
    ok = all_fail and not missing and attempted > 0 and replayed == attempted and direct
    report(8, ok, f"(i)-(v) fail on X: {all_fail}; {replayed}/{attempted} certificates replayed; "
                  f"{len(missing)} failures without evidence; direct orbit check: {direct}")


def _power(g, n):
    out = g.inverse * g
    for _ in range(n):
        out = g * out
    return out
