"""Command line entry point: ``cantordyn <command> [options]``.

Exit codes: 0 consistent / success, 1 inconsistency detected, 2 input error,
3 budget exhaustion or unknown verdicts with ``--strict``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from typing import List, Optional

from . import catalog as catalog_mod
from .analyzer import (Verdict, proximal, quotient_Y, s_recurrent, theorem_consistency)
from .config import Budgets
from .cylinders import ClopenSet, all_words, parse_clopen, parse_point
from .errors import (AlphabetError, BudgetExceeded, CantorDynError, InternalConsistencyError,
                     MachineClassError, MachineError, PreconditionError, SchemaError)
from .orbits import orbit_closure
from .oracle import corrupted_fixture, oracle_check, standard_script
from .report import dot_graph, dumps, envelope, report_text
from .systems import load_system
from .tower import v_infinity_verdict
from .words import ball

EXIT_OK, EXIT_INCONSISTENT, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class InputError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--system", metavar="PATH", help="system description JSON file")
    src.add_argument("--catalog", metavar="NAME", help="built-in system (see `selftest --list`)")
    p.add_argument("--depth", type=int, default=None, help="word depth for level checks")
    p.add_argument("--radius", type=int, default=None, help="ball radius")
    p.add_argument("--max-n", type=int, default=None, help="deepest tower level")
    p.add_argument("--budget", type=int, default=None, help="maximum ball size")
    p.add_argument("--format", "--report", dest="format", choices=("json", "text"), default="json")
    p.add_argument("--dot", metavar="FILE", help="write the depth-d reachability graph")
    p.add_argument("--strict", action="store_true", help="exit 3 on budget hits or unknowns")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="cantordyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="six-condition consistency report")
    a.add_argument("--set", default="ε", help="clopen U as comma-separated prefixes")
    a.add_argument("--family", action="store_true", help="run X and every depth-1/2 cylinder")

    t = sub.add_parser("tower", parents=[common], help="shell tower of a clopen set")
    t.add_argument("--set", required=True)

    sub.add_parser("ball", parents=[common], help="list S^R as hash, length, witness")

    o = sub.add_parser("orbit", parents=[common], help="depth-d orbit closure words")
    o.add_argument("--point", required=True, help="ultimately periodic point u(v)")

    r = sub.add_parser("recur", parents=[common], help="budgeted S-recurrence surrogate")
    r.add_argument("--point", required=True)
    r.add_argument("--set", default=None, help="neighbourhood (default: depth-1 cylinder)")
    r.add_argument("--cap", type=int, default=None, help="cone length cap (default radius)")
    r.add_argument("--min-layer", type=int, default=None)

    x = sub.add_parser("proximal", parents=[common], help="search a proximality witness")
    x.add_argument("--point", required=True)
    x.add_argument("--other", required=True)

    q = sub.add_parser("quotient", parents=[common], help="fibre classes of U* -> Y")
    q.add_argument("--set", default="ε")

    s = sub.add_parser("selftest", parents=[common], help="bitset oracle on catalog systems")
    s.add_argument("--list", action="store_true", help="list catalog systems and exit")
    return parser


def _budgets(args) -> Budgets:
    changes = {}
    if args.depth is not None:
        changes["depth"] = args.depth
    if args.radius is not None:
        changes["radius"] = args.radius
    if args.max_n is not None:
        changes["max_n"] = args.max_n
    if args.budget is not None:
        changes["max_elements"] = args.budget
    return Budgets().with_(**changes)


def _system(args):
    if args.system:
        return load_system(args.system)
    name = args.catalog or "odometer"
    try:
        return catalog_mod.get(name)
    except KeyError as e:
        raise InputError(e.args[0]) from None


def _emit(args, kind: str, payload: dict, text: Optional[str] = None) -> None:
    if args.format == "text" and text is not None:
        print(text)
    else:
        print(dumps(envelope(kind, payload)))


def _cmd_analyze(args, sysd, gens, budgets) -> int:
    if args.family:
        sets = [ClopenSet.full(gens.k)] + [ClopenSet.cylinder(gens.k, w)
                                           for d in (1, 2) for w in all_words(gens.k, d)]
    else:
        sets = [parse_clopen(args.set, gens.k)]
    reports = [theorem_consistency(gens, U, budgets, system=sysd.name) for U in sets]
    for rep in reports:
        rep.replay()
    payload = {"system": sysd.name, "symmetrization": sysd.symmetrization_log,
               "reports": [r.to_json(gens) for r in reports],
               "consistent": all(r.consistent for r in reports)}
    _emit(args, "analyze", payload, "\n\n".join(report_text(r, gens) for r in reports))
    if args.dot:
        d = args.depth or 3
        try:
            q = quotient_Y(gens, sets[0], d, budgets)
        except PreconditionError:
            q = None
        _write_dot(args, gens, q.depth if q else d, q)
    if not payload["consistent"]:
        return EXIT_INCONSISTENT
    if args.strict and any(r.has_unknowns for r in reports):
        return EXIT_BUDGET
    return EXIT_OK


def _write_dot(args, gens, d, quotient=None):
    with open(args.dot, "w") as fh:
        fh.write(dot_graph(gens, d, quotient))


def _cmd_tower(args, sysd, gens, budgets) -> int:
    V = parse_clopen(args.set, gens.k)
    verdict = v_infinity_verdict(gens, V, budgets)
    t = verdict.tower
    lines = [f"V = {V}", *(f"  V_{l.n} = {l.V}   W_{l.n} = {l.W}   P_{l.n} = {l.P}" for l in t.levels),
             f"stabilized at {t.stabilized_at}" if t.stabilized else f"not stabilized by n = {t.depth}",
             f"V_inf open: {verdict.open}"]
    _emit(args, "tower", verdict.to_json(), "\n".join(lines))
    return EXIT_BUDGET if args.strict and verdict.open == "unknown" else EXIT_OK


def _element_hash(g) -> str:
    raw = json.dumps(g.to_json(), sort_keys=True).encode()
    return hashlib.sha256(raw).hexdigest()[:16]


def _cmd_ball(args, sysd, gens, budgets) -> int:
    code = EXIT_OK
    try:
        table = ball(gens, budgets.radius, budgets.max_elements, budgets.machine_cap(gens))
    except BudgetExceeded as e:
        print(f"warning: {e}", file=sys.stderr)
        table = e.partial
        code = EXIT_BUDGET if args.strict else EXIT_OK
    rows = [(table.length(g), table.word(g), g) for g in table.within(table.radius)]
    if args.format == "json":
        _emit(args, "ball", {"radius": table.radius, "elements": [
            {"hash": _element_hash(g), "length": n, "witness": gens.format(w)} for n, w, g in rows]})
    else:
        for n, w, g in rows:
            print(f"{_element_hash(g)}\t{n}\t{gens.format(w)}")
    return code


def _cmd_orbit(args, sysd, gens, budgets) -> int:
    x = parse_point(args.point, gens.k)
    d = args.depth if args.depth is not None else 3
    approx = orbit_closure(gens, x, d, budgets)
    text = f"{x} depth {d}: " + ",".join("".join(map(str, w)) for w in sorted(approx.reached)) \
        + ("" if approx.exact else "  (upper bound)")
    _emit(args, "orbit", approx.to_json(), text)
    if args.dot:
        _write_dot(args, gens, d)
    return EXIT_BUDGET if args.strict and not approx.exact else EXIT_OK


def _cmd_recur(args, sysd, gens, budgets) -> int:
    x = parse_point(args.point, gens.k)
    U = parse_clopen(args.set, gens.k) if args.set else ClopenSet.cylinder(gens.k, x.letters(1))
    cap = args.cap if args.cap is not None else budgets.recur_cap
    res = s_recurrent(gens, x, U, budgets.radius, cap, args.min_layer, budgets)
    res.replay()
    text = f"{res.verdict.value}" + (f" with n = {res.bound}" if res.bound is not None else "") \
        + (" (vacuous)" if res.vacuous else "") + f"\nsurrogate: {res.surrogate}"
    _emit(args, "recur", res.to_json(gens), text)
    return EXIT_BUDGET if args.strict and res.verdict is Verdict.UNKNOWN else EXIT_OK


def _cmd_proximal(args, sysd, gens, budgets) -> int:
    x, y = parse_point(args.point, gens.k), parse_point(args.other, gens.k)
    res = proximal(gens, x, y, budgets)
    res.replay()
    _emit(args, "proximal", res.to_json(gens),
          f"{res.verdict} (certified: {res.certified}, exact: {res.exact})")
    return EXIT_OK


def _cmd_quotient(args, sysd, gens, budgets) -> int:
    U = parse_clopen(args.set, gens.k)
    d = args.depth if args.depth is not None else 2
    q = quotient_Y(gens, U, d, budgets)
    text = "\n".join(f"class {i}: " + ",".join("".join(map(str, w)) for w in c)
                     for i, c in enumerate(q.classes)) or "U* is empty"
    _emit(args, "quotient", q.to_json(), text)
    if args.dot:
        _write_dot(args, gens, q.depth, q)
    return EXIT_OK


def _cmd_selftest(args, budgets) -> int:
    systems = catalog_mod.catalog()
    if args.list:
        for name, s in systems.items():
            print(f"{name}\t{s.notes}")
        return EXIT_OK
    d = args.depth if args.depth is not None else 8
    results = {}
    ok = True
    for name, s in systems.items():
        gens = s.generating_set()
        if not gens.is_synchronous:
            continue
        regs, ops = standard_script(gens.k, len(gens))
        diff = oracle_check(gens, d, ops, regs)
        results[name] = str(diff)
        ok &= diff.passed
    bad = corrupted_fixture()
    regs, ops = standard_script(bad.k, len(bad))
    control = oracle_check(bad, d, ops, regs)
    results["negative-control"] = "caught" if not control.passed else "MISSED"
    ok &= not control.passed
    _emit(args, "selftest", {"depth": d, "results": results, "passed": ok},
          "\n".join(f"{k}: {v}" for k, v in results.items()))
    return EXIT_OK if ok else EXIT_INCONSISTENT


COMMANDS = {"analyze": _cmd_analyze, "tower": _cmd_tower, "ball": _cmd_ball, "orbit": _cmd_orbit,
            "recur": _cmd_recur, "proximal": _cmd_proximal, "quotient": _cmd_quotient}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        budgets = _budgets(args)
        if args.command == "selftest":
            return _cmd_selftest(args, budgets)
        sysd = _system(args)
        gens = sysd.generating_set()
        return COMMANDS[args.command](args, sysd, gens, budgets)
    except InternalConsistencyError as e:
        print(f"internal inconsistency: {e}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, SchemaError, MachineError, MachineClassError, AlphabetError,
            PreconditionError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except CantorDynError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
