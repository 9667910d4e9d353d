"""Word metric on ``G = ⟨S⟩``: balls, word lengths and cones ``K(g)``.

Elements are deduplicated by machine normal form, so the lengths recorded in
a :class:`BallTable` are true word-metric values and not free-monoid lengths.
A witness word ``(i_1, …, i_n)`` stands for the product
``S[i_1] ∘ … ∘ S[i_n]`` (``S[i_n]`` acts first).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import BudgetExceeded, InsufficientRadius, MachineClassError, PreconditionError
from .homeos import Homeomorphism, identity_like

DEFAULT_MAX_ELEMENTS = 20_000
DEFAULT_MAX_MACHINE = 10_000
BUDGET_ENV = "CANTORDYN_BUDGET"


def default_max_elements() -> int:
    raw = os.environ.get(BUDGET_ENV)
    return int(raw) if raw else DEFAULT_MAX_ELEMENTS


@dataclass(frozen=True)
class ElementRecord:
    element: Homeomorphism
    length: int
    word: Tuple[int, ...]


@dataclass
class BallTable:
    """All distinct elements of ``S^radius`` with their BFS layer and witness."""

    gens: "GeneratingSet"
    radius: int
    records: Dict[Homeomorphism, ElementRecord] = field(default_factory=dict)
    layers: List[List[Homeomorphism]] = field(default_factory=list)

    def __contains__(self, g: Homeomorphism) -> bool:
        return g in self.records

    def __len__(self) -> int:
        return len(self.records)

    def record(self, g: Homeomorphism) -> ElementRecord:
        try:
            return self.records[g]
        except KeyError:
            raise InsufficientRadius(f"element not found within radius {self.radius}") from None

    def length(self, g: Homeomorphism) -> int:
        return self.record(g).length

    def word(self, g: Homeomorphism) -> Tuple[int, ...]:
        return self.record(g).word

    def layer(self, n: int) -> List[Homeomorphism]:
        if n > self.radius:
            raise InsufficientRadius(f"layer {n} beyond radius {self.radius}")
        return self.layers[n] if n < len(self.layers) else []

    def within(self, n: int) -> List[Homeomorphism]:
        """Elements of ``S^n`` in BFS (witness-lexicographic) order."""
        if n > self.radius:
            raise InsufficientRadius(f"radius {n} beyond enumerated {self.radius}")
        return [g for layer in self.layers[:n + 1] for g in layer]

    def elements(self) -> List[Homeomorphism]:
        """Elements sorted by normal form."""
        return sorted(self.records, key=lambda g: g.key)

    def truncated(self, n: int) -> "BallTable":
        t = BallTable(self.gens, n)
        for layer in self.layers[:n + 1]:
            t.layers.append(list(layer))
            for g in layer:
                t.records[g] = self.records[g]
        return t


class GeneratingSet:
    """Finite symmetric generating set containing the identity.

    Construction adjoins the identity and missing inverses; ``adjoined`` logs
    what was added.  Element 0 is always the identity.
    """

    def __init__(self, gens: Sequence[Homeomorphism], names: Optional[Sequence[str]] = None):
        gens = list(gens)
        if not gens:
            raise PreconditionError("need at least one generator (the identity is adjoined)")
        k = gens[0].k
        kinds = {g.kind for g in gens if not g.is_identity}
        if len(kinds) > 1:
            raise MachineClassError(f"mixed machine classes in generating set: {sorted(kinds)}")
        if any(g.k != k for g in gens):
            raise MachineClassError("generators use different alphabets")
        names = list(names) if names is not None else [f"s{i}" for i in range(len(gens))]
        base = next((g for g in gens if not g.is_identity), gens[0])
        ident = identity_like(base)
        self.k = k
        self.elements: List[Homeomorphism] = [ident]
        self.names: List[str] = ["1"]
        self.adjoined: List[str] = []
        if not any(g.is_identity for g in gens):
            self.adjoined.append("1")
        for g, name in zip(gens, names):
            if g.is_identity or g in self.elements:
                continue
            self.elements.append(g)
            self.names.append(name)
            if g.inverse not in self.elements:
                self.elements.append(g.inverse)
                self.names.append(_inverse_name(name))
                self.adjoined.append(_inverse_name(name))
        self.kind = base.kind
        self._ball: Optional[BallTable] = None
        self._cache: Dict[object, object] = {}

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i: int) -> Homeomorphism:
        return self.elements[i]

    @property
    def identity(self) -> Homeomorphism:
        return self.elements[0]

    @property
    def is_synchronous(self) -> bool:
        return self.kind == "mealy"

    def index(self, g: Homeomorphism) -> int:
        return self.elements.index(g)

    def inverse_index(self, i: int) -> int:
        return self.elements.index(self.elements[i].inverse)

    def evaluate(self, word: Iterable[int]) -> Homeomorphism:
        g = self.identity
        for i in word:
            g = g * self.elements[i]
        return g

    def format(self, word: Sequence[int]) -> str:
        return " ".join(self.names[i] for i in word) if word else "1"

    def cached(self, key, compute: Callable[[], object]):
        """Memo for data derived from this (immutable) set."""
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]


def _inverse_name(name: str) -> str:
    return name[:-3] if name.endswith("^-1") else name + "^-1"


def ball(gens: GeneratingSet, n: int, max_elements: Optional[int] = None,
         max_machine: int = DEFAULT_MAX_MACHINE) -> BallTable:
    """Enumerate ``S^n`` breadth-first with exact deduplication.

    Tables are memoized on ``gens``; asking for a smaller radius returns a
    truncation.  Raises :class:`BudgetExceeded` carrying the partial table.
    """
    if n < 0:
        raise PreconditionError("radius must be >= 0")
    max_elements = default_max_elements() if max_elements is None else max_elements
    table = gens._ball
    if table is None:
        table = BallTable(gens, 0)
        table.records[gens.identity] = ElementRecord(gens.identity, 0, ())
        table.layers.append([gens.identity])
        gens._ball = table
    if n <= table.radius:
        return table if n == table.radius else table.truncated(n)
    while table.radius < n:
        frontier = table.layers[table.radius]
        fresh: Dict[Homeomorphism, ElementRecord] = {}
        for g in frontier:
            word = table.records[g].word
            for i in range(1, len(gens)):
                try:
                    h = g.compose(gens.elements[i], cap=max_machine)
                except BudgetExceeded as e:
                    raise BudgetExceeded(f"machine size cap hit at radius {table.radius + 1}: {e}",
                                         partial=table, reached=table.radius) from None
                if h in table.records or h in fresh:
                    continue
                if len(table.records) + len(fresh) >= max_elements:
                    raise BudgetExceeded(
                        f"ball exceeds {max_elements} elements at radius {table.radius + 1}",
                        partial=table, reached=table.radius)
                fresh[h] = ElementRecord(h, table.radius + 1, word + (i,))
        table.records.update(fresh)
        table.layers.append(list(fresh))
        table.radius += 1
    return table


def word_length(table: BallTable, g: Homeomorphism) -> int:
    return table.length(g)


def cone_members(table: BallTable, g: Homeomorphism, cap: int) -> List[Homeomorphism]:
    """``{c ∈ K(g) : |c| <= cap}``, where ``K(g) = S^{|g|-1}·g``.

    Uses ``c ∈ K(g)  ⇔  |c·g⁻¹| <= |g| - 1``; the table must reach radius
    ``max(cap, |g| - 1)``.
    """
    n = table.length(g)
    if table.radius < max(cap, n - 1):
        raise InsufficientRadius(
            f"cone of an element of length {n} with cap {cap} needs radius {max(cap, n - 1)}")
    ginv = g.inverse
    out = []
    for c in table.within(cap):
        f = c * ginv
        rec = table.records.get(f)
        if rec is not None and rec.length <= n - 1:
            out.append(c)
    return out


def suffix_element(gens: GeneratingSet, word: Sequence[int], n: int) -> Homeomorphism:
    """Product of the last ``n`` letters of ``word``."""
    return gens.evaluate(word[len(word) - n:])


@dataclass(frozen=True)
class Replete:
    """Least ``n`` with ``F ⊆ S^{n-1}`` and the matching suffix extractor."""

    n: int
    gens: GeneratingSet

    def extract(self, table: BallTable, g: Homeomorphism) -> Homeomorphism:
        """The suffix ``c`` (``|c| = n``) of the geodesic witness of ``g``."""
        word = table.word(g)
        if len(word) < self.n:
            raise PreconditionError(f"|g| = {len(word)} is below the constant {self.n}")
        return suffix_element(self.gens, word, self.n)


def replete_constant(table: BallTable, F: Iterable[Homeomorphism]) -> Replete:
    lengths = [table.length(f) for f in F]
    return Replete(max(lengths, default=0) + 1, table.gens)
