"""Shell towers ``V_0 ⊇ V_1 ⊇ …`` of a clopen set and the openness of ``V_∞``.

``V_0 = ⋂_{s∈S} sV`` and ``V_{n+1} = ⋂_{s∈S} sV_n``, which equals
``⋂_{g∈S^n} gV_0`` because ``1 ∈ S = S⁻¹``.  Shells are
``W_n = V_n ∖ V_{n+1}`` and ``P_n = (⋃_{g∈S^n} gV_n) ∖ V_1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from .config import Budgets
from .cylinders import ClopenSet, Point, points_in
from .errors import InternalConsistencyError, PreconditionError
from .evidence import (Convergence, EscapeWitness, FiniteOrbit, ReplayError,
                       find_attractors, point_orbit)
from .homeos import Homeomorphism
from .words import GeneratingSet, ball


def intersect_translates(gens: GeneratingSet, c: ClopenSet) -> ClopenSet:
    out = c
    for s in gens:
        if not s.is_identity:
            out = out & s.image(c)
            if out.is_empty():
                break
    return out


def union_translates(gens: GeneratingSet, c: ClopenSet, m: int) -> ClopenSet:
    """``⋃_{g∈S^m} gc`` by ``m`` rounds of ``U ← ⋃_{s∈S} sU``."""
    out = c
    for _ in range(m):
        nxt = out
        for s in gens:
            if not s.is_identity:
                nxt = nxt | s.image(out)
        if nxt == out:
            break
        out = nxt
    return out


@dataclass
class Level:
    n: int
    V: ClopenSet
    W: ClopenSet
    P: ClopenSet


@dataclass
class ShellTower:
    gens: GeneratingSet
    base: ClopenSet
    levels: List[Level]
    next_v: ClopenSet                   # V_{N+1} for the deepest level N
    stabilized_at: Optional[int]
    translate_counts: Dict[Tuple[int, int], int] = field(default_factory=dict)

    @property
    def V0(self) -> ClopenSet:
        return self.levels[0].V

    @property
    def depth(self) -> int:
        return self.levels[-1].n

    @property
    def stabilized(self) -> bool:
        return self.stabilized_at is not None

    @property
    def v_infinity(self) -> Optional[ClopenSet]:
        return self.levels[self.stabilized_at].V if self.stabilized else None

    @property
    def approximation(self) -> ClopenSet:
        """``V_∞`` when stabilized, otherwise the deepest computed ``V_n``."""
        return self.v_infinity if self.stabilized else self.next_v

    def V(self, n: int) -> ClopenSet:
        if n <= self.depth:
            return self.levels[n].V
        if n == self.depth + 1 or self.stabilized:
            return self.next_v
        raise PreconditionError(f"level {n} was not computed (depth {self.depth})")

    def W(self, n: int) -> ClopenSet:
        if n <= self.depth:
            return self.levels[n].W
        if self.stabilized:
            return ClopenSet.empty(self.base.k)
        raise PreconditionError(f"level {n} was not computed (depth {self.depth})")

    def shell_index(self, x: Point) -> Optional[int]:
        """``n`` with ``x ∈ W_n``; ``None`` if ``x`` is in the deepest ``V``."""
        if not self.V0.contains(x):
            raise PreconditionError(f"{x} is not in V_0")
        for lvl in self.levels:
            if lvl.W.contains(x):
                return lvl.n
        return None

    def to_json(self) -> dict:
        return {
            "base": str(self.base),
            "levels": [{"n": l.n, "V": str(l.V), "W": str(l.W), "P": str(l.P)}
                       for l in self.levels],
            "next_V": str(self.next_v),
            "stabilized_at": self.stabilized_at,
            "v_infinity": str(self.v_infinity) if self.stabilized else None,
            "approximation": not self.stabilized,
            "translate_counts": {f"{m},{n}": c for (m, n), c in sorted(self.translate_counts.items())},
        }


def build_tower(gens: GeneratingSet, V: ClopenSet, max_n: int,
                translate_depth: int = 4) -> ShellTower:
    if max_n < 0:
        raise PreconditionError("max_n must be >= 0")
    if V.k != gens.k:
        raise PreconditionError("alphabet mismatch between set and generators")
    vs = [intersect_translates(gens, V)]
    stabilized_at = None
    while True:
        nxt = intersect_translates(gens, vs[-1])
        if nxt == vs[-1]:
            stabilized_at = len(vs) - 1
            vs.append(nxt)
            break
        vs.append(nxt)
        if len(vs) - 1 > max_n:
            break
    depth = len(vs) - 2
    v1 = vs[1]
    levels = []
    for n in range(depth + 1):
        P = union_translates(gens, vs[n], n) - v1
        levels.append(Level(n, vs[n], vs[n] - vs[n + 1], P))
    tower = ShellTower(gens, V, levels, vs[-1], stabilized_at)
    for n in range(min(depth, translate_depth) + 1):
        for m in range(n + 1):
            tower.translate_counts[(m, n)] = len(translate_family(gens, vs[n], m))
    return tower


def translate_family(gens: GeneratingSet, c: ClopenSet, m: int,
                     method: str = "incremental") -> FrozenSet[ClopenSet]:
    """Distinct translates ``{gc : g ∈ S^m}``.

    ``method="ball"`` enumerates ``S^m`` explicitly instead of iterating
    ``F ← {sT : s ∈ S, T ∈ F}``; the two must agree.
    """
    if method == "ball":
        return frozenset(g.image(c) for g in ball(gens, m).within(m))
    family = {c}
    for _ in range(m):
        family = {s.image(t) for t in family for s in gens}
    return frozenset(family)


@dataclass(frozen=True)
class ShellStep:
    m: int
    element: Homeomorphism
    word: Tuple[int, ...]
    point: Point


def shell_walk(gens: GeneratingSet, tower: ShellTower, x: Point, n: int) -> List[ShellStep]:
    """Elements ``h_m`` with ``h_m·x ∈ W_m`` for ``0 <= m <= n``.

    Follows the descent argument: from ``x ∈ W_{n'}`` some ``s ∈ S`` pushes
    the point out to ``W_{n'-1}``, and so on down to ``W_0``.
    """
    if n < 0 or not tower.V(n).contains(x):
        raise PreconditionError(f"{x} is not in V_{n}")
    top = tower.shell_index(x)
    if top is None:
        flag = "V_∞" if tower.stabilized else "the deepest computed V_n (V_∞ approximation)"
        raise PreconditionError(f"{x} lies in {flag}")
    steps = {top: ShellStep(top, gens.identity, (), x)}
    cur, h, word = x, gens.identity, ()
    for m in range(top, 0, -1):
        for i, s in enumerate(gens):
            y = s.apply(cur)
            if not tower.V(m).contains(y):
                break
        else:
            raise InternalConsistencyError(f"no generator pushes {cur} out of V_{m}")
        if not tower.W(m - 1).contains(y):
            raise InternalConsistencyError(f"{y} is not in W_{m - 1}")
        cur, h, word = y, s * h, (i,) + word
        steps[m - 1] = ShellStep(m - 1, h, word, cur)
    return [steps[m] for m in range(n + 1)]


@dataclass
class NonOpenCertificate:
    """``y ∈ V_∞`` (finite orbit inside ``V``), ``x ∉ V_∞`` and ``x``'s orbit
    converges to ``y``; so ``cl(Gx) ∩ V_∞ ≠ ∅`` and ``V_∞`` is not open."""

    limit: FiniteOrbit
    escape: EscapeWitness
    convergence: Convergence

    @property
    def witness(self) -> Point:
        return self.escape.x

    def replay(self, tower: Optional[ShellTower] = None) -> None:
        self.limit.replay()
        self.escape.replay()
        self.convergence.replay()
        if self.convergence.attractor.limit not in self.limit.points:
            raise ReplayError("convergence limit is not the certified invariant point")
        if tower is not None:
            its = self.convergence.iterates()
            for lvl in tower.levels:
                if not any(lvl.V.contains(z) for z in its):
                    raise ReplayError(f"orbit never enters V_{lvl.n} within the replayed steps")

    def to_json(self, gens) -> dict:
        return {"witness": str(self.witness), "limit": str(self.convergence.attractor.limit),
                "invariant_orbit": self.limit.to_json(), "escape": self.escape.to_json(gens),
                "convergence": self.convergence.to_json(gens)}


def find_escape(gens, table, x: Point, V: ClopenSet) -> Optional[EscapeWitness]:
    for g in table.within(table.radius):
        if not V.contains(g.apply(x)):
            return EscapeWitness(x, V, g, table.word(g))
    return None


def certify_invariant(gens, y: Point, inside: ClopenSet, limit: int) -> Optional[FiniteOrbit]:
    """Certificate that ``y ∈ ⋂_{g∈G} g·inside`` via a finite orbit."""
    orbit, complete = point_orbit(gens, y, limit)
    if not complete or not all(inside.contains(z) for z in orbit):
        return None
    return FiniteOrbit(tuple(sorted(orbit, key=Point.sort_key)), gens, inside)


def non_open_certificate(gens: GeneratingSet, V: ClopenSet, budgets: Budgets,
                         steps: Optional[int] = None) -> Optional[NonOpenCertificate]:
    """Search for an exact proof that ``⋂_{g∈G} gV`` is not open."""
    if gens.is_synchronous:
        # Isometric actions permute each level, so every tower stabilizes.
        return None
    table = ball(gens, budgets.attractor_radius, budgets.max_elements, budgets.machine_cap(gens))
    steps = steps if steps is not None else budgets.max_n + 2
    for a in find_attractors(table):
        y = a.limit
        inv = certify_invariant(gens, y, V, budgets.orbit_limit)
        if inv is None:
            continue
        for x in points_in(ClopenSet.cylinder(gens.k, a.p), budgets.witness_bound):
            if x == y:
                continue
            esc = find_escape(gens, table, x, V)
            if esc is not None:
                conv = Convergence(x, gens.identity, (), a, steps)
                return NonOpenCertificate(inv, esc, conv)
    return None


@dataclass
class TowerVerdict:
    open: str                              # "yes" | "no" | "unknown"
    tower: ShellTower
    certificate: Optional[NonOpenCertificate] = None
    shell_evidence: List[ShellStep] = field(default_factory=list)

    @property
    def v_infinity(self) -> Optional[ClopenSet]:
        return self.tower.v_infinity

    def to_json(self) -> dict:
        gens = self.tower.gens
        out = {"open": self.open, "tower": self.tower.to_json()}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json(gens)
        if self.shell_evidence:
            out["shell_walk"] = [{"m": s.m, "element": gens.format(s.word), "point": str(s.point)}
                                 for s in self.shell_evidence]
        return out


def v_infinity_verdict(gens: GeneratingSet, V: ClopenSet,
                       budgets: Optional[Budgets] = None) -> TowerVerdict:
    budgets = budgets or Budgets()
    tower = build_tower(gens, V, budgets.max_n, budgets.translate_depth)
    if tower.stabilized:
        return TowerVerdict("yes", tower)
    cert = non_open_certificate(gens, V, budgets)
    if cert is None:
        return TowerVerdict("unknown", tower)
    cert.replay(tower)
    verdict = TowerVerdict("no", tower, cert)
    deepest = tower.levels[-1]
    for y in points_in(deepest.W, budgets.witness_bound):
        verdict.shell_evidence = shell_walk(gens, tower, y, deepest.n)
        break
    return verdict
