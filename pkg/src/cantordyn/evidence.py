"""Replayable certificates.

Every certificate re-derives its claim using only ``apply`` and ``contains``
when :meth:`replay` is called, so a report can be audited without trusting
the search that produced it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .cylinders import ClopenSet, Point, Word, agreement, format_word
from .homeos import Homeomorphism
from .words import BallTable, GeneratingSet


class ReplayError(AssertionError):
    pass


def _require(cond, message):
    if not cond:
        raise ReplayError(message)


@dataclass(frozen=True)
class Attractor:
    """An element ``h`` with a pair ``p → p·r``: ``h^j(p·z) = p·r^j·z``.

    Every point of the cylinder ``[p]`` is driven to ``limit = p·r^ω``.
    """

    element: Homeomorphism
    word: Tuple[int, ...]
    p: Word
    r: Word

    @property
    def limit(self) -> Point:
        return Point.of(self.p, self.r)

    def captures(self, x: Point) -> bool:
        return x.letters(len(self.p)) == self.p

    def to_json(self, gens: GeneratingSet) -> dict:
        return {"element": gens.format(self.word), "prefix": format_word(self.p),
                "insert": format_word(self.r), "limit": str(self.limit)}


def find_attractors(table: BallTable) -> List[Attractor]:
    """Contracting prefix-exchange pairs among the elements of ``table``."""
    out = []
    for g in table.within(table.radius):
        if g.kind != "prefix_exchange" or g.is_identity:
            continue
        word = table.word(g)
        for p, q in g.pairs:
            if len(q) > len(p) and q[:len(p)] == p:
                out.append(Attractor(g, word, p, q[len(p):]))
    out.sort(key=lambda a: (len(a.word), a.word, len(a.p), a.p, a.r))
    return out


def point_orbit(gens: GeneratingSet, x: Point, limit: int) -> Tuple[Dict[Point, Tuple[int, ...]], bool]:
    """Breadth-first orbit of ``x`` with witness words.

    Returns ``(points, complete)``; ``complete`` is true when the orbit closed
    up with at most ``limit`` points, in which case it is the whole orbit.
    """
    seen = {x: ()}
    queue = [x]
    i = 0
    while i < len(queue):
        y = queue[i]
        i += 1
        for j in range(1, len(gens)):
            z = gens[j].apply(y)
            if z not in seen:
                if len(seen) >= limit:
                    return seen, False
                seen[z] = (j,) + seen[y]
                queue.append(z)
    return seen, True


@dataclass(frozen=True)
class EscapeWitness:
    """``element·x ∉ V``, hence ``x ∉ ⋂_{g∈G} gV``."""

    x: Point
    V: ClopenSet
    element: Homeomorphism
    word: Tuple[int, ...]

    def replay(self) -> None:
        _require(not self.V.contains(self.element.apply(self.x)),
                 f"escape witness failed: image of {self.x} lies in {self.V}")

    def to_json(self, gens) -> dict:
        return {"point": str(self.x), "element": gens.format(self.word),
                "image": str(self.element.apply(self.x)), "set": str(self.V)}


@dataclass(frozen=True)
class FiniteOrbit:
    """A finite set of points closed under every generator."""

    points: Tuple[Point, ...]
    gens: GeneratingSet
    inside: Optional[ClopenSet] = None

    def replay(self) -> None:
        pts = set(self.points)
        for y in self.points:
            for s in self.gens:
                _require(s.apply(y) in pts, f"orbit of {y} leaves the recorded set")
            if self.inside is not None:
                _require(self.inside.contains(y), f"{y} lies outside {self.inside}")

    def to_json(self, gens=None) -> dict:
        out = {"points": [str(p) for p in self.points]}
        if self.inside is not None:
            out["inside"] = str(self.inside)
        return out


@dataclass(frozen=True)
class Convergence:
    """``attractor^j · pre · x → attractor.limit``, checked for ``steps`` steps."""

    x: Point
    pre: Homeomorphism
    pre_word: Tuple[int, ...]
    attractor: Attractor
    steps: int = 12

    def iterates(self) -> List[Point]:
        z = self.pre.apply(self.x)
        out = [z]
        for _ in range(self.steps):
            z = self.attractor.element.apply(z)
            out.append(z)
        return out

    def replay(self) -> None:
        a = self.attractor
        its = self.iterates()
        _require(a.captures(its[0]), f"{its[0]} is not in the basin [{format_word(a.p)}]")
        y = a.limit
        for j, z in enumerate(its):
            agree = agreement(z, y)
            _require(agree is None or agree >= len(a.p) + j * len(a.r),
                     f"iterate {j} agrees with the limit on only {agree} letters")

    def to_json(self, gens) -> dict:
        return {"point": str(self.x), "pre": gens.format(self.pre_word),
                "attractor": self.attractor.to_json(gens),
                "iterates": [str(z) for z in self.iterates()[:6]]}


def converge(gens, table, x, attractors, steps=12) -> Optional[Convergence]:
    """First certificate that some orbit point of ``x`` lies in a basin."""
    for g in table.within(table.radius):
        z = g.apply(x)
        for a in attractors:
            if a.captures(z):
                return Convergence(x, g, table.word(g), a, steps)
    return None
