"""Orbits on points and on depth-d words.

For transducers the group permutes the words of each length, and the orbit
closure of ``x`` meets the cylinder ``[w]`` exactly when ``w`` lies in the
level-``d`` orbit of ``x``'s prefix.  For prefix exchanges no such exact
picture is available; :func:`orbit_closure` then brackets the truth between
prefixes of explored orbit points (below) and cylinder reachability (above).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Tuple

from .config import Budgets
from .cylinders import ClopenSet, Point, Word, all_words, index_word, word_index
from .evidence import point_orbit
from .words import BallTable, GeneratingSet, ball


def level_perms(gens: GeneratingSet, d: int) -> List[List[int]]:
    """Induced permutation of each element of ``S`` on depth-``d`` words."""
    if not gens.is_synchronous:
        raise TypeError("level permutations exist only for synchronous transducers")
    return gens.cached(("perms", d), lambda: [g.level_permutation(d) for g in gens])


def level_orbits(gens: GeneratingSet, d: int) -> Tuple[List[int], List[List[int]]]:
    """``(orbit_id_by_index, orbits)`` for the level-``d`` action.

    Orbits are lists of word indices, sorted, and appear in the order of
    their smallest member.
    """

    def compute():
        perms = level_perms(gens, d)
        n = gens.k ** d
        oid = [-1] * n
        orbits = []
        for start in range(n):
            if oid[start] >= 0:
                continue
            tag = len(orbits)
            oid[start] = tag
            members = [start]
            i = 0
            while i < len(members):
                w = members[i]
                i += 1
                for p in perms:
                    v = p[w]
                    if oid[v] < 0:
                        oid[v] = tag
                        members.append(v)
            orbits.append(sorted(members))
        return oid, orbits

    return gens.cached(("orbits", d), compute)


def perms_are_bijective(gens: GeneratingSet, d: int) -> bool:
    n = gens.k ** d
    return all(len(set(p)) == n for p in level_perms(gens, d))


def level_orbit_of(gens: GeneratingSet, word: Word) -> List[Word]:
    d = len(word)
    oid, orbits = level_orbits(gens, d)
    return [index_word(i, d, gens.k) for i in orbits[oid[word_index(word, gens.k)]]]


def level_paths(gens: GeneratingSet, word: Word) -> Dict[Word, Tuple[int, ...]]:
    """For each word in the level orbit of ``word``, a generator word reaching it."""
    d, k = len(word), gens.k
    perms = level_perms(gens, d)
    start = word_index(word, k)
    paths = {start: ()}
    queue = [start]
    i = 0
    while i < len(queue):
        w = queue[i]
        i += 1
        for j in range(1, len(gens)):
            v = perms[j][w]
            if v not in paths:
                paths[v] = (j,) + paths[w]
                queue.append(v)
    return {index_word(i, d, k): p for i, p in paths.items()}


@dataclass(frozen=True)
class OrbitClosureApprox:
    """Depth-``d`` words whose cylinders meet the orbit closure of ``point``.

    ``certain ⊆ true set ⊆ reached``; ``exact`` means the two bounds agree.
    """

    point: Point
    depth: int
    reached: FrozenSet[Word]
    certain: FrozenSet[Word]
    exact: bool

    def to_json(self) -> dict:
        fmt = lambda ws: ["".join(map(str, w)) for w in sorted(ws)]
        return {"point": str(self.point), "depth": self.depth, "exact": self.exact,
                "reached": fmt(self.reached), "certain": fmt(self.certain)}


def words_meeting(c: ClopenSet, d: int):
    for q in c.prefixes:
        if len(q) >= d:
            yield q[:d]
        else:
            for t in all_words(c.k, d - len(q)):
                yield q + t


def cylinder_reachability(gens: GeneratingSet, start: Word) -> FrozenSet[Word]:
    """Words ``u`` with ``s[w] ∩ [u] ≠ ∅`` closed from ``start``: an upper bound."""
    d = len(start)
    seen = {start}
    queue = [start]
    i = 0
    while i < len(queue):
        w = queue[i]
        i += 1
        cyl = ClopenSet.cylinder(gens.k, w)
        for s in gens:
            if s.is_identity:
                continue
            for u in words_meeting(s.image(cyl), d):
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
    return frozenset(seen)


def finite_orbit(gens: GeneratingSet, x: Point, limit: int) -> Optional[Dict[Point, Tuple[int, ...]]]:
    """The whole orbit of ``x`` with witness words, or ``None`` if it is larger than ``limit``."""
    orbit, complete = point_orbit(gens, x, limit)
    return orbit if complete else None


def orbit_closure(gens: GeneratingSet, x: Point, d: int,
                  budgets: Optional[Budgets] = None) -> OrbitClosureApprox:
    budgets = budgets or Budgets()
    if d < 0:
        raise ValueError("depth must be >= 0")
    if gens.is_synchronous:
        words = frozenset(level_orbit_of(gens, x.letters(d)))
        return OrbitClosureApprox(x, d, words, words, True)
    orbit, complete = point_orbit(gens, x, budgets.orbit_limit)
    certain = frozenset(z.letters(d) for z in orbit)
    if complete:
        return OrbitClosureApprox(x, d, certain, certain, True)
    reached = cylinder_reachability(gens, x.letters(d))
    return OrbitClosureApprox(x, d, reached, certain, reached == certain)


def finite_group(gens: GeneratingSet, budgets: Budgets) -> Optional[BallTable]:
    """The whole group if a ball layer within ``budgets.radius`` comes out empty."""
    from .errors import BudgetExceeded

    def compute():
        try:
            table = ball(gens, budgets.radius + 1, budgets.max_elements, budgets.machine_cap(gens))
        except BudgetExceeded:
            return None
        for n in range(table.radius + 1):
            if not table.layer(n):
                return table
        return None

    return gens.cached(("finite", budgets.radius), compute)
