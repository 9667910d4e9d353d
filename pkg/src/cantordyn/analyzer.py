"""Dynamical predicates and the six-condition consistency engine.

Every predicate answers ``holds``, ``fails`` or ``unknown``; running out of
budget never turns into a boolean.  ``fails`` and ``holds`` answers carry
evidence, and where the evidence is a certificate it can be replayed.

Notation follows the tower module: ``U*`` is ``⋂_{g∈G} gU``, the largest
compact invariant subset of a clopen ``U``.  It is the union of all compact
invariant subsets of ``U`` because each such ``K`` satisfies ``K = gK ⊆ gU``
for every ``g``, and the intersection is itself compact and invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .config import Budgets
from .cylinders import (ClopenSet, Point, Word, agreement, all_words, format_word, standard_points,
                        word_index)
from .errors import BudgetExceeded, InternalConsistencyError, PreconditionError
from .evidence import (Convergence, FiniteOrbit, ReplayError, find_attractors, point_orbit)
from .homeos import Homeomorphism
from .orbits import (finite_group, finite_orbit, level_orbit_of, level_orbits, level_paths,
                     perms_are_bijective)
from .tower import TowerVerdict, certify_invariant, v_infinity_verdict
from .words import BallTable, GeneratingSet, ball


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value


@dataclass
class Finding:
    verdict: Verdict
    evidence: dict = field(default_factory=dict)
    exact: bool = True
    certificate: object = None

    def replay(self) -> None:
        if self.certificate is not None:
            self.certificate.replay()

    def to_json(self, gens: GeneratingSet) -> dict:
        out = {"verdict": self.verdict.value, "exact": self.exact, "evidence": self.evidence}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json(gens)
        return out


# ---------------------------------------------------------------- shared data

def _attractor_table(gens: GeneratingSet, budgets: Budgets) -> BallTable:
    try:
        return ball(gens, budgets.attractor_radius, budgets.max_elements, budgets.machine_cap(gens))
    except BudgetExceeded as e:
        return e.partial


def _attractors(gens, budgets):
    return gens.cached(("attractors", budgets.attractor_radius),
                       lambda: find_attractors(_attractor_table(gens, budgets)))


def _invariant_orbit(gens, y: Point, budgets: Budgets) -> Optional[FiniteOrbit]:
    return gens.cached(("invariant", y, budgets.orbit_limit),
                       lambda: certify_invariant(gens, y, ClopenSet.full(gens.k), budgets.orbit_limit))


def sample_points(gens: GeneratingSet, budgets: Optional[Budgets] = None) -> List[Point]:
    """Ultimately periodic points with ``|u| + |v| <= sample_bound`` plus
    fixed points of the elements of ``S^fixed_point_radius``."""
    budgets = budgets or Budgets()

    def compute():
        pts = set(standard_points(gens.k, budgets.sample_bound))
        try:
            table = ball(gens, budgets.fixed_point_radius, budgets.max_elements,
                         budgets.machine_cap(gens))
        except BudgetExceeded as e:
            table = e.partial
        for g in table.within(table.radius):
            if not g.is_identity:
                pts.update(g.fixed_points())
        return sorted(pts, key=Point.sort_key)

    return gens.cached(("sample", budgets.sample_bound, budgets.fixed_point_radius), compute)


def tower_verdict(gens: GeneratingSet, V: ClopenSet, budgets: Budgets) -> TowerVerdict:
    return gens.cached(("tower", V, budgets), lambda: v_infinity_verdict(gens, V, budgets))


# ---------------------------------------------------------------- U*

@dataclass
class UStar:
    U: ClopenSet
    verdict: TowerVerdict

    @property
    def stabilized(self) -> bool:
        return self.verdict.tower.stabilized

    @property
    def set(self) -> Optional[ClopenSet]:
        return self.verdict.v_infinity

    @property
    def approximation(self) -> ClopenSet:
        return self.verdict.tower.approximation

    @property
    def open(self) -> str:
        return self.verdict.open

    def to_json(self) -> dict:
        return {"set": str(self.approximation), "approximation": not self.stabilized,
                "open": self.open, "levels": self.verdict.tower.depth}


def u_star(gens: GeneratingSet, U: ClopenSet, budgets: Optional[Budgets] = None) -> UStar:
    budgets = budgets or Budgets()
    return UStar(U, tower_verdict(gens, U, budgets))


# ---------------------------------------------------------------- certificates

@dataclass(frozen=True)
class ClosureAsymmetry:
    """``y ∈ cl(Gx)`` by convergence while ``cl(Gy)`` is a finite orbit missing ``x``."""

    x: Point
    convergence: Convergence
    limit_orbit: FiniteOrbit

    @property
    def y(self) -> Point:
        return self.convergence.attractor.limit

    def replay(self) -> None:
        if self.convergence.x != self.x:
            raise ReplayError("convergence starts from a different point")
        self.convergence.replay()
        self.limit_orbit.replay()
        if self.y not in self.limit_orbit.points:
            raise ReplayError("limit point is not in the recorded orbit")
        if self.x in self.limit_orbit.points:
            raise ReplayError(f"{self.x} lies in the closure of the orbit of {self.y}")

    def to_json(self, gens) -> dict:
        return {"x": str(self.x), "y": str(self.y), "convergence": self.convergence.to_json(gens),
                "closure_of_y": self.limit_orbit.to_json()}


def closure_asymmetries(gens: GeneratingSet, x: Point, budgets: Budgets) -> Iterator[ClosureAsymmetry]:
    table = _attractor_table(gens, budgets)
    attractors = _attractors(gens, budgets)
    seen = set()
    for g in table.within(table.radius):
        z = g.apply(x)
        for a in attractors:
            if not a.captures(z) or a.limit in seen:
                continue
            seen.add(a.limit)
            inv = _invariant_orbit(gens, a.limit, budgets)
            if inv is not None and x not in inv.points:
                yield ClosureAsymmetry(x, Convergence(x, g, table.word(g), a), inv)


@dataclass(frozen=True)
class SyndeticCover:
    """Elements ``F`` with ``cl(Gx) ⊆ ⋃_{f∈F} f[w]`` where ``w = prefix_d(x)``.

    ``orbit_words`` is the set of depth-``d`` words meeting the closure;
    replay checks that it is closed under every generator and that the
    translates ``f[w]`` hit each of its words.
    """

    x: Point
    depth: int
    elements: Tuple[Homeomorphism, ...]
    words: Tuple[Tuple[int, ...], ...]
    orbit_words: Tuple[Word, ...]
    gens: GeneratingSet
    finite_orbit: Optional[FiniteOrbit] = None

    def replay(self) -> None:
        d = self.depth
        if self.finite_orbit is not None:
            self.finite_orbit.replay()
            hits = {f.apply(self.x) for f in self.elements}
            if hits != set(self.finite_orbit.points):
                raise ReplayError("translates of x do not cover its orbit")
            return
        words = set(self.orbit_words)
        hits = {f.apply(self.x).letters(d) for f in self.elements}
        if hits != words:
            raise ReplayError("translates of the neighbourhood do not cover the closure")
        tail = self.x.drop(d)
        for w in words:
            for s in self.gens:
                if s.apply(tail.prepend(w)).letters(d) not in words:
                    raise ReplayError(f"depth-{d} closure words are not invariant at {format_word(w)}")

    def to_json(self, gens) -> dict:
        return {"neighbourhood": format_word(self.x.letters(self.depth)),
                "F": [gens.format(w) for w in self.words]}


# ---------------------------------------------------------------- minimality

def minimal_on_closure(gens: GeneratingSet, x: Point, budgets: Optional[Budgets] = None) -> Finding:
    budgets = budgets or Budgets()
    if gens.is_synchronous:
        sizes = []
        for d in range(1, budgets.depth + 1):
            if not perms_are_bijective(gens, d):
                raise InternalConsistencyError(f"level {d} action is not a permutation")
            sizes.append(len(level_orbit_of(gens, x.letters(d))))
        return Finding(Verdict.HOLDS, {
            "reason": "generators permute every level, so each reachability class is an orbit",
            "class_sizes": sizes})
    orbit = finite_orbit(gens, x, budgets.orbit_limit)
    if orbit is not None:
        cert = FiniteOrbit(tuple(sorted(orbit, key=Point.sort_key)), gens)
        return Finding(Verdict.HOLDS, {"reason": "finite orbit", "orbit_size": len(orbit)},
                       certificate=cert)
    for asym in closure_asymmetries(gens, x, budgets):
        return Finding(Verdict.FAILS, {"y": str(asym.y),
                                       "reason": "y lies in the closure but its closure omits x"},
                       certificate=asym)
    return Finding(Verdict.UNKNOWN, {"reason": "infinite orbit without a certified limit"})


def almost_periodic(gens: GeneratingSet, x: Point, budgets: Optional[Budgets] = None,
                    depth: int = 1) -> Finding:
    """Verdict of :func:`minimal_on_closure`, plus a syndetic cover when it holds."""
    budgets = budgets or Budgets()
    base = minimal_on_closure(gens, x, budgets)
    if base.verdict is not Verdict.HOLDS:
        return Finding(base.verdict, dict(base.evidence), base.exact, base.certificate)
    if gens.is_synchronous:
        paths = level_paths(gens, x.letters(depth))
        order = sorted(paths)
        words = tuple(paths[w] for w in order)
        cover = SyndeticCover(x, depth, tuple(gens.evaluate(p) for p in words), words,
                              tuple(order), gens)
    else:
        inv = base.certificate
        orbit, _ = point_orbit(gens, x, budgets.orbit_limit)
        pts = sorted(orbit, key=Point.sort_key)
        words = tuple(orbit[z] for z in pts)
        cover = SyndeticCover(x, depth, tuple(gens.evaluate(w) for w in words), words,
                              tuple(sorted({z.letters(depth) for z in pts})), gens, inv)
    cover.replay()
    evidence = dict(base.evidence)
    evidence["F"] = [gens.format(w) for w in words]
    return Finding(Verdict.HOLDS, evidence, True, cover)


# ---------------------------------------------------------------- recurrence

@dataclass(frozen=True)
class RecurrenceFailure:
    """Element ``g`` whose cone members of length ``<= cap`` all send ``x`` outside ``U``."""

    x: Point
    U: ClopenSet
    element: Homeomorphism
    word: Tuple[int, ...]
    cap: int
    members: Tuple[Tuple[Homeomorphism, Tuple[int, ...]], ...]   # (c, w) with c = w·g
    gens: GeneratingSet

    def replay(self) -> None:
        n = len(self.word)
        if self.gens.evaluate(self.word) != self.element:
            raise ReplayError("witness word does not evaluate to the element")
        for c, w in self.members:
            if len(w) > n - 1 or self.gens.evaluate(w) * self.element != c:
                raise ReplayError("recorded cone member is not in S^{|g|-1}·g")
            if self.U.contains(c.apply(self.x)):
                raise ReplayError(f"cone member sends {self.x} into {self.U}")

    def to_json(self, gens) -> dict:
        return {"point": str(self.x), "U": str(self.U), "g": gens.format(self.word), "cap": self.cap,
                "cone": [{"c_prefix": gens.format(w), "image": str(c.apply(self.x))}
                         for c, w in self.members]}


@dataclass
class RecurrenceResult:
    verdict: Verdict
    bound: Optional[int]
    vacuous: bool
    layers: Tuple[int, int]
    cap: int
    surrogate: str
    failing: List[Tuple[int, ...]] = field(default_factory=list)
    counterexample: Optional[RecurrenceFailure] = None

    @property
    def exact(self) -> bool:
        return False

    def replay(self) -> None:
        if self.counterexample is not None:
            self.counterexample.replay()

    def to_json(self, gens) -> dict:
        out = {"verdict": self.verdict.value, "bound": self.bound, "vacuous": self.vacuous,
               "layers": list(self.layers), "cap": self.cap, "surrogate": self.surrogate,
               "failing": [gens.format(w) for w in self.failing[:8]]}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample.to_json(gens)
            out["note"] = "candidate only: a true failure needs every cap"
        return out


def s_recurrent(gens: GeneratingSet, x: Point, U: ClopenSet, radius: int, cap: int,
                min_layer: Optional[int] = None, budgets: Optional[Budgets] = None) -> RecurrenceResult:
    """Finite surrogate of S-recurrence at ``x`` for the neighbourhood ``U``.

    Looks for the least ``n <= cap`` such that every ``g`` with
    ``min_layer <= |g| <= radius`` has some ``c ∈ K(g)``, ``|c| <= n``, with
    ``c·x ∈ U``.  ``min_layer`` defaults to ``max(1, radius // 2)``.
    """
    budgets = budgets or Budgets()
    if not U.contains(x):
        raise PreconditionError(f"{x} is not in {U}")
    r0 = max(1, radius // 2) if min_layer is None else min_layer
    surrogate = (f"every g with {r0} <= |g| <= {radius} has c in S^(|g|-1) g with |c| <= n "
                 f"and c x in U, for some n <= {cap}")
    table = ball(gens, max(radius, cap), budgets.max_elements, budgets.machine_cap(gens))
    targets = [g for n in range(r0, radius + 1) for g in table.layer(n)]
    if not targets:
        return RecurrenceResult(Verdict.HOLDS, 0, True, (r0, radius), cap, surrogate)

    ell = max(U.max_length, 1)
    prefix = x.letters(ell)
    good_cache: Dict[Homeomorphism, bool] = {}

    def good(c):
        if c not in good_cache:
            if gens.is_synchronous:
                good_cache[c] = U.contains(Point.of(c.apply_word(prefix), (0,)))
            else:
                good_cache[c] = U.contains(c.apply(x))
        return good_cache[c]

    products = gens.cached("products", dict)
    suffixes = gens.cached("suffixes", dict)
    half = (cap + 1) // 2
    upper: Dict[Homeomorphism, int] = {}
    for g in targets:
        word = table.word(g)
        best = None
        for m in range(1, min(half, len(word)) + 1):
            sw = word[len(word) - m:]
            if sw not in suffixes:
                suffixes[sw] = gens.evaluate(sw)
            sigma = suffixes[sw]
            for e in table.within(m - 1):
                key = (e, sigma)
                if key not in products:
                    products[key] = e * sigma
                c = products[key]
                if good(c):
                    n = table.length(c)
                    if best is None or n < best:
                        best = n
            if best is not None and best <= m:
                break
        if best is not None:
            upper[g] = best

    def exact_least(g, limit):
        n_g = table.length(g)
        ginv = g.inverse
        for c in table.within(limit):
            if c.is_identity or not good(c):
                continue
            rec = table.records.get(c * ginv)
            if rec is not None and rec.length <= n_g - 1:
                return table.length(c)
        return None

    order = sorted(targets, key=lambda g: (-upper.get(g, math.inf), table.word(g)))
    bound = 0
    failing = []
    for g in order:
        ub = upper.get(g)
        if ub is not None and ub <= bound:
            break
        r = exact_least(g, (ub - 1) if ub is not None else cap)
        if r is None:
            r = ub
        if r is None:
            failing.append(g)
            continue
        bound = max(bound, r)
    if not failing:
        return RecurrenceResult(Verdict.HOLDS, bound, False, (r0, radius), cap, surrogate)
    failing.sort(key=lambda g: (table.length(g), table.word(g)))
    words = [table.word(g) for g in failing]
    top = [g for g in failing if table.length(g) == radius]
    if not top:
        return RecurrenceResult(Verdict.UNKNOWN, None, False, (r0, radius), cap, surrogate, words)
    g = top[0]
    ginv = g.inverse
    members = []
    for c in table.within(cap):
        rec = table.records.get(c * ginv)
        if rec is not None and rec.length <= table.length(g) - 1:
            members.append((c, rec.word))
    cx = RecurrenceFailure(x, U, g, table.word(g), cap, tuple(members), gens)
    return RecurrenceResult(Verdict.FAILS, None, False, (r0, radius), cap, surrogate, words, cx)


# ---------------------------------------------------------------- proximality

@dataclass(frozen=True)
class ProximalCertificate:
    """One element moves both points into the basin of the same attractor."""

    first: Convergence
    second: Convergence

    def replay(self) -> None:
        self.first.replay()
        self.second.replay()
        if self.first.attractor.limit != self.second.attractor.limit:
            raise ReplayError("the two orbits converge to different limits")
        if self.first.pre != self.second.pre:
            raise ReplayError("the two points are moved by different elements")

    def to_json(self, gens) -> dict:
        return {"x": self.first.to_json(gens), "y": self.second.to_json(gens),
                "limit": str(self.first.attractor.limit)}


@dataclass
class ProximalResult:
    verdict: str                       # "holds" | "no-witness"
    certified: bool
    exact: bool
    evidence: dict = field(default_factory=dict)
    certificate: Optional[ProximalCertificate] = None

    def replay(self) -> None:
        if self.certificate is not None:
            self.certificate.replay()

    def to_json(self, gens) -> dict:
        out = {"verdict": self.verdict, "certified": self.certified, "exact": self.exact,
               "evidence": self.evidence}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json(gens)
        return out


def proximal(gens: GeneratingSet, x: Point, y: Point, budgets: Optional[Budgets] = None,
             radius: Optional[int] = None) -> ProximalResult:
    budgets = budgets or Budgets()
    radius = budgets.radius if radius is None else radius
    if x == y:
        return ProximalResult("holds", True, True, {"reason": "diagonal pair"})
    base = agreement(x, y)
    if gens.is_synchronous:
        for s in gens:
            if agreement(s.apply(x), s.apply(y)) != base:
                raise InternalConsistencyError("a transducer changed the agreement depth")
        return ProximalResult("no-witness", False, True, {
            "agreement": base,
            "reason": "every generator preserves agreement depth, hence so does every element"})
    table = _attractor_table(gens, budgets)
    for g in table.within(table.radius):
        gx, gy = g.apply(x), g.apply(y)
        for a in _attractors(gens, budgets):
            if a.captures(gx) and a.captures(gy):
                cert = ProximalCertificate(Convergence(x, g, table.word(g), a),
                                           Convergence(y, g, table.word(g), a))
                cert.replay()
                return ProximalResult("holds", True, True, {"limit": str(a.limit)}, cert)
    try:
        big = ball(gens, radius, budgets.max_elements, budgets.machine_cap(gens))
    except BudgetExceeded as e:
        big = e.partial
    profile = []
    for n in range(big.radius + 1):
        profile.append(max((agreement(g.apply(x), g.apply(y)) for g in big.layer(n)), default=0))
    evidence = {"agreement_by_layer": profile}
    tail = profile[-3:]
    if (len(tail) == 3 and tail[-1] >= budgets.proximity_threshold
            and tail[0] < tail[1] < tail[2]):
        evidence["note"] = "growth heuristic, not certified"
        return ProximalResult("holds", False, False, evidence)
    return ProximalResult("no-witness", False, False, evidence)


@dataclass
class DistalReport:
    verdict: str           # "distal" | "not distal" | "no proximal pair found"
    exact: bool
    witnesses: List[Tuple[Point, Point]]
    notes: List[str]
    certificates: List[ProximalCertificate] = field(default_factory=list)

    def to_json(self, gens) -> dict:
        return {"verdict": self.verdict, "exact": self.exact,
                "witnesses": [[str(a), str(b)] for a, b in self.witnesses], "notes": self.notes}


def distal_report(gens: GeneratingSet, pairs: Sequence[Tuple[Point, Point]],
                  budgets: Optional[Budgets] = None) -> DistalReport:
    budgets = budgets or Budgets()
    notes = []
    if gens.is_synchronous:
        for s in gens:
            if any(sorted(row) != list(range(gens.k)) for row in s.lam):
                raise InternalConsistencyError("transducer state output is not a permutation")
        for x, y in pairs:
            if x != y and proximal(gens, x, y, budgets).verdict == "holds":
                raise InternalConsistencyError(f"proximal pair reported for an isometry: {x}, {y}")
        for z in sorted({p for pair in pairs for p in pair}, key=Point.sort_key):
            if minimal_on_closure(gens, z, budgets).verdict is Verdict.FAILS:
                raise InternalConsistencyError(f"distal point {z} with non-minimal closure")
        return DistalReport("distal", True, [], ["each state permutes the alphabet, so every "
                                                  "element preserves agreement depth"])
    witnesses, certs = [], []
    for x, y in pairs:
        if x == y:
            continue
        r = proximal(gens, x, y, budgets)
        if r.verdict == "holds" and r.certified:
            witnesses.append((x, y))
            certs.append(r.certificate)
    in_pairs = {p for pair in witnesses for p in pair}
    for z in sorted({p for pair in pairs for p in pair} - in_pairs, key=Point.sort_key):
        if minimal_on_closure(gens, z, budgets).verdict is Verdict.FAILS:
            notes.append(f"{z}: no proximal partner found in the sample, closure not minimal")
    verdict = "not distal" if witnesses else "no proximal pair found"
    return DistalReport(verdict, False if not witnesses else True, witnesses, notes, certs)


# ---------------------------------------------------------------- relation R

def relation_closed(gens: GeneratingSet, W: ClopenSet, d: int, budgets: Optional[Budgets] = None,
                    sample: Optional[Sequence[Point]] = None) -> Finding:
    budgets = budgets or Budgets()
    if W.is_empty():
        return Finding(Verdict.HOLDS, {"reason": "W is empty"})
    if gens.is_synchronous:
        d = max(d, W.max_length)
        d0 = max(W.max_length, d - budgets.stability_window)
        counts = []
        for e in range(d0, d + 1):
            if not perms_are_bijective(gens, e):
                raise InternalConsistencyError(f"level {e} action is not a permutation")
            oid, _ = level_orbits(gens, e)
            words = W.depth_slice(e)
            ids = {oid[word_index(w, gens.k)] for w in words}
            counts.append(len(ids))
            if e > d0:
                prev, _ = level_orbits(gens, e - 1)
                proj = {}
                for w in words:
                    a, b = oid[word_index(w, gens.k)], prev[word_index(w[:-1], gens.k)]
                    if proj.setdefault(a, b) != b:
                        raise InternalConsistencyError(f"depth {e} classes do not refine depth {e - 1}")
        return Finding(Verdict.HOLDS, {"depths": [d0, d], "classes": counts,
                                       "reason": "symmetric orbit classes, stable across depths"})
    group = finite_group(gens, budgets)
    if group is not None:
        return Finding(Verdict.HOLDS, {"reason": "finite group: R is a finite union of graphs",
                                       "order": len(group)})
    for x in sample if sample is not None else sample_points(gens, budgets):
        if not W.contains(x):
            continue
        for asym in closure_asymmetries(gens, x, budgets):
            if W.contains(asym.y):
                return Finding(Verdict.FAILS, {"pair": [str(x), str(asym.y)]}, certificate=asym)
    return Finding(Verdict.UNKNOWN, {"reason": "no asymmetric pair found"})


@dataclass
class Quotient:
    depth: int
    classes: List[Tuple[Word, ...]]
    class_map: Dict[Word, int]

    def to_json(self) -> dict:
        return {"depth": self.depth,
                "classes": [[format_word(w) for w in c] for c in self.classes],
                "phi": {format_word(w): i for w, i in sorted(self.class_map.items())}}


def quotient_Y(gens: GeneratingSet, U: ClopenSet, d: int,
               budgets: Optional[Budgets] = None) -> Quotient:
    """Depth-``d`` fibre classes of ``U* → Y``; ``Y`` is the set of classes."""
    budgets = budgets or Budgets()
    us = u_star(gens, U, budgets)
    if not us.stabilized:
        raise PreconditionError("U* is not clopen within the tower budget")
    target = us.set
    if target.is_empty():
        return Quotient(d, [], {})
    if not gens.is_synchronous:
        raise PreconditionError("depth classes are only exact for synchronous transducers")
    d = max(d, target.max_length)
    k = gens.k
    words = set(target.depth_slice(d))
    oid, orbits = level_orbits(gens, d)
    groups: Dict[int, List[Word]] = {}
    for w in words:
        groups.setdefault(oid[word_index(w, k)], []).append(w)
    for tag, ws in groups.items():
        if len(ws) != len(orbits[tag]):
            raise InternalConsistencyError("U* is not invariant at depth d")
    classes = sorted(tuple(sorted(ws)) for ws in groups.values())
    class_map = {w: i for i, c in enumerate(classes) for w in c}
    nxt, _ = level_orbits(gens, d + 1)
    proj: Dict[int, int] = {}
    for w in target.depth_slice(d + 1):
        a, b = nxt[word_index(w, k)], class_map[w[:-1]]
        if proj.setdefault(a, b) != b:
            raise InternalConsistencyError(f"a depth-{d + 1} class straddles two depth-{d} classes")
    return Quotient(d, classes, class_map)


# ---------------------------------------------------------------- equicontinuity

def equicontinuity_report(gens: GeneratingSet, m: int, V: Optional[ClopenSet] = None,
                          budgets: Optional[Budgets] = None) -> dict:
    """Largest modulus offset ``δ(ε) - ε`` on ``V`` over each sphere ``S^n``, ``n <= m``."""
    budgets = budgets or Budgets()
    V = V if V is not None else ClopenSet.full(gens.k)
    table = ball(gens, m, budgets.max_elements, budgets.machine_cap(gens))
    rows = []
    for n in range(m + 1):
        layer = table.layer(n)
        if gens.is_synchronous:
            offs = [g.modulus(0) for g in layer]
        else:
            offs = [g.restricted_modulus(0, V) for g in layer]
        rows.append({"layer": n, "elements": len(layer), "max_offset": max(offs, default=0)})
    if gens.is_synchronous:
        trend = "isometric"
    elif not rows[-1]["elements"]:
        trend = "bounded"
    else:
        earlier = max(r["max_offset"] for r in rows[:-1]) if m else 0
        trend = "bounded" if rows[-1]["max_offset"] <= earlier else "growing"
    return {"set": str(V), "radius": m, "layers": rows, "trend": trend}


# ---------------------------------------------------------------- consistency

CONDITION_NAMES = (
    "U* open and every point of U* S-recurrent",
    "U* open and every point of U* almost periodic",
    "V_inf open for every clopen V inside U",
    "y in cl(Gx) implies x in cl(Gy) for x in U, y in U*",
    "orbit closure relation closed on some open W containing U*",
    "U* open with a quotient trivial on Y and minimal on fibres",
)
LABELS = ("i", "ii", "iii", "iv", "v", "vi")


@dataclass
class Condition:
    index: int
    finding: Finding
    extra: List[object] = field(default_factory=list)   # further replayable certificates

    @property
    def verdict(self) -> Verdict:
        return self.finding.verdict

    @property
    def label(self) -> str:
        return LABELS[self.index - 1]

    def certificates(self) -> List[object]:
        out = [] if self.finding.certificate is None else [self.finding.certificate]
        return out + list(self.extra)

    def replay(self) -> None:
        for c in self.certificates():
            c.replay()

    def to_json(self, gens) -> dict:
        out = {"index": self.index, "label": self.label, "statement": CONDITION_NAMES[self.index - 1]}
        out.update(self.finding.to_json(gens))
        return out


@dataclass
class ConditionReport:
    system: str
    U: ClopenSet
    ustar: UStar
    conditions: List[Condition]
    budgets: Budgets

    @property
    def verdicts(self) -> List[Verdict]:
        return [c.verdict for c in self.conditions]

    @property
    def consistent(self) -> bool:
        vs = set(self.verdicts)
        return not (Verdict.HOLDS in vs and Verdict.FAILS in vs)

    @property
    def has_unknowns(self) -> bool:
        return Verdict.UNKNOWN in self.verdicts

    def replay(self) -> None:
        if self.ustar.verdict.certificate is not None:
            self.ustar.verdict.certificate.replay(self.ustar.verdict.tower)
        for c in self.conditions:
            c.replay()

    def to_json(self, gens) -> dict:
        return {"system": self.system, "U": str(self.U), "u_star": self.ustar.to_json(),
                "conditions": [c.to_json(gens) for c in self.conditions],
                "consistent": self.consistent, "budgets": self.budgets.to_json()}


def _recurrence(gens, x, e, budgets):
    # For transducers the answer only depends on the depth-e prefix.
    key = ("recur", x.letters(e) if gens.is_synchronous else x, e, budgets)
    nbhd = ClopenSet.cylinder(gens.k, x.letters(e))
    return gens.cached(key, lambda: s_recurrent(gens, x, nbhd, budgets.radius, budgets.recur_cap,
                                                budgets=budgets))


def _minimal(gens, x, budgets):
    key = ("minimal", x.letters(budgets.depth) if gens.is_synchronous else x, budgets)
    return gens.cached(key, lambda: minimal_on_closure(gens, x, budgets))


def _almost_periodic(gens, x, budgets):
    key = ("ap", x.letters(budgets.depth) if gens.is_synchronous else x, budgets)
    return gens.cached(key, lambda: almost_periodic(gens, x, budgets))


def _ustar_points(gens, us: UStar, U: ClopenSet, sample, budgets) -> List[Point]:
    if us.stabilized:
        return [x for x in sample if us.set.contains(x)]
    found = []
    for x in sample:
        if us.approximation.contains(x) and certify_invariant(gens, x, U, budgets.orbit_limit):
            found.append(x)
    return found


def _asymmetry_in(gens, xs, U, us, budgets) -> Optional[ClosureAsymmetry]:
    """A pair ``x ∈ xs``, ``y ∈ U*`` with ``y ∈ cl(Gx)`` and ``x ∉ cl(Gy)``."""
    for x in xs:
        for asym in closure_asymmetries(gens, x, budgets):
            if us.stabilized:
                inside = us.set.contains(asym.y)
            else:
                inside = all(U.contains(z) for z in asym.limit_orbit.points)
            if inside:
                return asym
    return None


def _from_sample(results, ustar_open: str, pts, name: str) -> Finding:
    """Combine per-point results: any failure wins, otherwise all must hold."""
    for x, r in results:
        if r.verdict is Verdict.FAILS:
            return Finding(Verdict.FAILS, {"point": str(x), "reason": f"{name} fails"},
                           exact=getattr(r, "exact", True),
                           certificate=getattr(r, "counterexample", None) or getattr(r, "certificate", None))
    if ustar_open == "yes" and all(r.verdict is Verdict.HOLDS for _, r in results):
        return Finding(Verdict.HOLDS, {"points_checked": len(pts)}, exact=False)
    return Finding(Verdict.UNKNOWN, {"points_checked": len(pts), "u_star_open": ustar_open})


def theorem_consistency(gens: GeneratingSet, U: ClopenSet, budgets: Optional[Budgets] = None,
                        sample: Optional[Sequence[Point]] = None, system: str = "") -> ConditionReport:
    budgets = budgets or Budgets()
    sample = list(sample) if sample is not None else sample_points(gens, budgets)
    us = u_star(gens, U, budgets)
    is_open = us.open
    empty = us.stabilized and us.set.is_empty()
    tower_cert = us.verdict.certificate
    not_open = Finding(Verdict.FAILS, {"reason": "U* is not open", "witness": str(tower_cert.witness)},
                       certificate=_TowerReplay(us.verdict)) if is_open == "no" else None
    pts = _ustar_points(gens, us, U, sample, budgets)
    conds = []

    # (i) recurrence
    if not_open:
        conds.append(Condition(1, not_open))
    else:
        results = []
        for x in pts:
            for e in range(1, budgets.recur_depth + 1):
                results.append((x, _recurrence(gens, x, e, budgets)))
        f = _from_sample(results, is_open, pts, "S-recurrence")
        if f.verdict is Verdict.FAILS:
            f.evidence["note"] = "surrogate counterexample: bounded cones at the outer layer"
        conds.append(Condition(1, f))

    # (ii) almost periodicity
    if not_open:
        conds.append(Condition(2, not_open))
    else:
        results = [(x, _almost_periodic(gens, x, budgets)) for x in pts]
        conds.append(Condition(2, _from_sample(results, is_open, pts, "almost periodicity")))

    # (iii) towers of clopen subsets
    if empty:
        conds.append(Condition(3, Finding(Verdict.HOLDS, {"reason": "U* is empty, so is every V_inf"})))
    else:
        family = [U]
        for depth in range(1, budgets.family_depth + 1):
            for w in all_words(gens.k, depth):
                V = U & ClopenSet.cylinder(gens.k, w)
                if not V.is_empty() and V not in family:
                    family.append(V)
        verdicts = [(V, tower_verdict(gens, V, budgets)) for V in family]
        bad = next(((V, t) for V, t in verdicts if t.open == "no"), None)
        if bad is not None:
            f = Finding(Verdict.FAILS, {"V": str(bad[0]), "witness": str(bad[1].certificate.witness),
                                        "reason": "V_inf of V is not open"},
                        certificate=_TowerReplay(bad[1]))
        elif all(t.open == "yes" for _, t in verdicts):
            f = Finding(Verdict.HOLDS, {"family": [str(V) for V, _ in verdicts]}, exact=False)
        else:
            f = Finding(Verdict.UNKNOWN, {"open": {str(V): t.open for V, t in verdicts}})
        conds.append(Condition(3, f))

    # (iv) symmetric reachability into U*, and (v) closedness of R near U*
    group = None if gens.is_synchronous else finite_group(gens, budgets)
    if gens.is_synchronous or empty or group is not None:
        reason = ("isometric action: reachability classes are level orbits" if gens.is_synchronous
                  else "U* is empty" if empty else "finite group: orbit closures are orbits")
        if gens.is_synchronous:
            for d in range(1, budgets.depth + 1):
                if not perms_are_bijective(gens, d):
                    raise InternalConsistencyError(f"level {d} action is not a permutation")
        conds.append(Condition(4, Finding(Verdict.HOLDS, {"reason": reason})))
        if gens.is_synchronous and not empty:
            found = [relation_closed(gens, us.set, budgets.depth, budgets),
                     relation_closed(gens, U, budgets.depth, budgets)]
            ok = all(r.verdict is Verdict.HOLDS for r in found)
            conds.append(Condition(5, Finding(Verdict.HOLDS if ok else Verdict.UNKNOWN,
                                              {"W": [str(us.set), str(U)], "reason": reason})))
        else:
            conds.append(Condition(5, Finding(Verdict.HOLDS, {"reason": reason})))
    else:
        asym = _asymmetry_in(gens, [x for x in sample if U.contains(x)], U, us, budgets)
        if asym is not None:
            conds.append(Condition(4, Finding(Verdict.FAILS, {"x": str(asym.x), "y": str(asym.y),
                                                               "reason": "y in cl(Gx), x not in cl(Gy)"},
                                              certificate=asym)))
        else:
            conds.append(Condition(4, Finding(Verdict.UNKNOWN, {"reason": "no asymmetric pair found"})))
        asym5 = asym or _asymmetry_in(gens, sample, U, us, budgets)
        if asym5 is not None:
            conds.append(Condition(5, Finding(Verdict.FAILS, {
                "pair": [str(asym5.x), str(asym5.y)],
                "reason": "pairs (g x, x') of R inside W x W converge to (y, x') outside R"},
                certificate=asym5)))
        else:
            conds.append(Condition(5, Finding(Verdict.UNKNOWN, {"reason": "no asymmetric pair found"})))

    # (vi) quotient
    if not_open:
        conds.append(Condition(6, not_open))
    elif not us.stabilized:
        conds.append(Condition(6, Finding(Verdict.UNKNOWN, {"reason": "U* not clopen within budget"})))
    elif not gens.is_synchronous and not empty:
        # Fibres of a map that is constant on orbits are closed and invariant, so
        # minimal fibres force every orbit closure in U* to be minimal.
        bad = next(((x, f) for x, f in ((x, _minimal(gens, x, budgets)) for x in pts)
                    if f.verdict is Verdict.FAILS), None)
        if bad is not None:
            conds.append(Condition(6, Finding(Verdict.FAILS, {
                "point": str(bad[0]), "reason": "a point of U* has a non-minimal orbit closure"},
                certificate=bad[1].certificate)))
        elif group is not None:
            conds.append(Condition(6, Finding(Verdict.HOLDS, {
                "reason": "finite group: Y is the orbit space and each fibre is a finite orbit",
                "order": len(group)})))
        else:
            conds.append(Condition(6, Finding(Verdict.UNKNOWN, {
                "reason": "depth classes are only exact for synchronous transducers"})))
    else:
        try:
            q = quotient_Y(gens, U, budgets.depth, budgets)
            conds.append(Condition(6, Finding(Verdict.HOLDS, {"depth": q.depth,
                                                              "classes": len(q.classes)})))
        except PreconditionError as e:
            conds.append(Condition(6, Finding(Verdict.UNKNOWN, {"reason": str(e)})))

    return ConditionReport(system, U, us, conds, budgets)


@dataclass(frozen=True)
class _TowerReplay:
    verdict: TowerVerdict

    def replay(self) -> None:
        self.verdict.certificate.replay(self.verdict.tower)

    def to_json(self, gens) -> dict:
        return self.verdict.certificate.to_json(gens)
