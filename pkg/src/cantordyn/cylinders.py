"""Clopen subsets of the Cantor space A^ω and ultimately periodic points.

A clopen set is stored as its canonical antichain of prefix words: no word
is a prefix of another, no complete sibling family ``{w·a : a ∈ A}`` is
present, and the words are sorted lexicographically.  Two clopen sets are
equal exactly when their prefix tuples are equal.

Internally the boolean operations run on a ternary trie where a node is
``True`` (full cylinder), ``False`` (empty) or a tuple of ``k`` children.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Optional, Tuple

from .errors import AlphabetError, PreconditionError

Word = Tuple[int, ...]

EMPTY_TEXT = "⊥"
FULL_TEXT = "ε"


def check_alphabet(k: int) -> int:
    if not isinstance(k, int) or k < 2:
        raise AlphabetError(f"alphabet size must be an integer >= 2, got {k!r}")
    return k


def check_word(word: Iterable[int], k: int) -> Word:
    w = tuple(word)
    for a in w:
        if not isinstance(a, int) or not 0 <= a < k:
            raise AlphabetError(f"letter {a!r} out of range for alphabet of size {k}")
    return w


def parse_word(text: str, k: int) -> Word:
    """Parse a word written in letter digits; ``""`` and ``"ε"`` are empty."""
    text = text.strip()
    if text in ("", FULL_TEXT):
        return ()
    if k > 10:
        raise AlphabetError("textual words need an alphabet of at most 10 letters")
    try:
        letters = [int(ch) for ch in text]
    except ValueError:
        raise AlphabetError(f"bad word {text!r}") from None
    return check_word(letters, k)


def format_word(word: Word) -> str:
    return "".join(str(a) for a in word) if word else FULL_TEXT


def all_words(k: int, d: int) -> Iterator[Word]:
    """Every word of length ``d`` in lexicographic order."""
    return product(range(k), repeat=d)


def word_index(word: Word, k: int) -> int:
    """Position of ``word`` among the words of its length (lexicographic)."""
    i = 0
    for a in word:
        i = i * k + a
    return i


def index_word(i: int, d: int, k: int) -> Word:
    out = []
    for _ in range(d):
        i, a = divmod(i, k)
        out.append(a)
    return tuple(reversed(out))


# -- trie algebra ----------------------------------------------------------

def _node(kids):
    if all(c is True for c in kids):
        return True
    if all(c is False for c in kids):
        return False
    return kids


def _build(words, k):
    if not words:
        return False
    groups = [[] for _ in range(k)]
    for w in words:
        if not w:
            return True
        groups[w[0]].append(w[1:])
    return _node(tuple(_build(g, k) for g in groups))


def _leaves(tree, prefix=()):
    if tree is True:
        yield prefix
    elif tree is not False:
        for a, child in enumerate(tree):
            yield from _leaves(child, prefix + (a,))


def _and(s, t):
    if s is False or t is False:
        return False
    if s is True:
        return t
    if t is True:
        return s
    return _node(tuple(_and(x, y) for x, y in zip(s, t)))


def _or(s, t):
    if s is True or t is True:
        return True
    if s is False:
        return t
    if t is False:
        return s
    return _node(tuple(_or(x, y) for x, y in zip(s, t)))


def _not(s):
    if s is True:
        return False
    if s is False:
        return True
    return tuple(_not(x) for x in s)


@dataclass(frozen=True)
class ClopenSet:
    """A clopen subset of A^ω in canonical antichain form.

    Prefer the constructors :meth:`of`, :meth:`full`, :meth:`empty`,
    :meth:`cylinder` and :func:`parse_clopen`; the raw dataclass constructor
    trusts its argument to be canonical already.
    """

    k: int
    prefixes: Tuple[Word, ...]

    @classmethod
    def of(cls, k: int, words: Iterable[Iterable[int]]) -> "ClopenSet":
        check_alphabet(k)
        ws = [check_word(w, k) for w in words]
        return cls._from_tree(k, _build(ws, k))

    @classmethod
    def _from_tree(cls, k, tree):
        obj = cls(k, tuple(_leaves(tree)))
        obj.__dict__["_tree"] = tree
        return obj

    @classmethod
    def full(cls, k: int) -> "ClopenSet":
        return cls(check_alphabet(k), ((),))

    @classmethod
    def empty(cls, k: int) -> "ClopenSet":
        return cls(check_alphabet(k), ())

    @classmethod
    def cylinder(cls, k: int, word: Iterable[int]) -> "ClopenSet":
        return cls(check_alphabet(k), (check_word(word, k),))

    @cached_property
    def _tree(self):
        return _build(list(self.prefixes), self.k)

    def _same(self, other: "ClopenSet") -> None:
        if not isinstance(other, ClopenSet):
            raise TypeError(f"expected ClopenSet, got {type(other).__name__}")
        if other.k != self.k:
            raise AlphabetError(f"alphabet mismatch: {self.k} vs {other.k}")

    def union(self, other: "ClopenSet") -> "ClopenSet":
        self._same(other)
        return ClopenSet._from_tree(self.k, _or(self._tree, other._tree))

    def intersect(self, other: "ClopenSet") -> "ClopenSet":
        self._same(other)
        return ClopenSet._from_tree(self.k, _and(self._tree, other._tree))

    def difference(self, other: "ClopenSet") -> "ClopenSet":
        self._same(other)
        return ClopenSet._from_tree(self.k, _and(self._tree, _not(other._tree)))

    def complement(self) -> "ClopenSet":
        return ClopenSet._from_tree(self.k, _not(self._tree))

    __or__ = union
    __and__ = intersect
    __sub__ = difference
    __invert__ = complement

    def is_empty(self) -> bool:
        return not self.prefixes

    def is_full(self) -> bool:
        return self.prefixes == ((),)

    def is_subset(self, other: "ClopenSet") -> bool:
        return (self - other).is_empty()

    __le__ = is_subset

    def contains(self, x: "Point") -> bool:
        if x.k is not None and x.k > self.k:
            raise AlphabetError("point uses letters outside the alphabet")
        return any(x.letters(len(p)) == p for p in self.prefixes)

    def __contains__(self, x: "Point") -> bool:
        return self.contains(x)

    @property
    def max_length(self) -> int:
        return max((len(p) for p in self.prefixes), default=0)

    def depth_slice(self, d: int) -> Tuple[Word, ...]:
        """All depth-``d`` words whose cylinders lie in this set, sorted."""
        if d < self.max_length:
            raise PreconditionError(
                f"depth {d} is smaller than the longest prefix ({self.max_length})")
        out = []
        for p in self.prefixes:
            for tail in all_words(self.k, d - len(p)):
                out.append(p + tail)
        return tuple(sorted(out))

    def __str__(self) -> str:
        if not self.prefixes:
            return EMPTY_TEXT
        return ",".join(format_word(p) for p in self.prefixes)

    def __repr__(self) -> str:
        return f"ClopenSet({self.k}, {str(self)!r})"


def normalize(k: int, words: Iterable[Iterable[int]]) -> ClopenSet:
    return ClopenSet.of(k, words)


def parse_clopen(text: str, k: int) -> ClopenSet:
    """Parse ``"00,01,10"``; ``"⊥"`` is the empty set and ``"ε"`` the space."""
    text = text.strip()
    if text in (EMPTY_TEXT, ""):
        return ClopenSet.empty(k)
    return ClopenSet.of(k, [parse_word(part, k) for part in text.split(",")])


# -- points ----------------------------------------------------------------

def _primitive_root(v: Word) -> Word:
    n = len(v)
    for p in range(1, n + 1):
        if n % p == 0 and v[:p] * (n // p) == v:
            return v[:p]
    return v


@dataclass(frozen=True)
class Point:
    """The ultimately periodic word ``u·v·v·v…`` in canonical form."""

    u: Word
    v: Word

    @classmethod
    def of(cls, u: Iterable[int], v: Iterable[int]) -> "Point":
        u, v = tuple(u), _primitive_root(tuple(v))
        if not v:
            raise PreconditionError("period must be a nonempty word")
        while u and u[-1] == v[-1]:
            u, v = u[:-1], (v[-1],) + v[:-1]
        return cls(u, v)

    @property
    def k(self) -> Optional[int]:
        """Smallest alphabet size able to hold this point (informational)."""
        return max(self.u + self.v) + 1

    def letter(self, i: int) -> int:
        if i < len(self.u):
            return self.u[i]
        return self.v[(i - len(self.u)) % len(self.v)]

    def letters(self, n: int) -> Word:
        if n <= len(self.u):
            return self.u[:n]
        m = n - len(self.u)
        reps, rest = divmod(m, len(self.v))
        return self.u + self.v * reps + self.v[:rest]

    prefix = letters

    def drop(self, n: int) -> "Point":
        if n <= len(self.u):
            return Point.of(self.u[n:], self.v)
        j = (n - len(self.u)) % len(self.v)
        return Point.of((), self.v[j:] + self.v[:j])

    def prepend(self, word: Iterable[int]) -> "Point":
        return Point.of(tuple(word) + self.u, self.v)

    def __str__(self) -> str:
        return "".join(map(str, self.u)) + "(" + "".join(map(str, self.v)) + ")"

    def __repr__(self) -> str:
        return f"Point({str(self)!r})"

    def sort_key(self):
        return (len(self.u) + len(self.v), self.u, self.v)


def parse_point(text: str, k: Optional[int] = None) -> Point:
    """Parse ``"u(v)"``, e.g. ``"0(1)"`` for 0111…"""
    text = text.strip()
    if not text.endswith(")") or text.count("(") != 1:
        raise PreconditionError(f"point must look like u(v), got {text!r}")
    head, tail = text[:-1].split("(")
    kk = k if k is not None else 10
    u, v = parse_word(head, kk), parse_word(tail, kk)
    return Point.of(u, v)


def agreement(x: Point, y: Point) -> Optional[int]:
    """Length of the common prefix of ``x`` and ``y``; ``None`` if equal."""
    if x == y:
        return None
    # Beyond max preperiod + both periods the words cannot keep agreeing.
    bound = max(len(x.u), len(y.u)) + len(x.v) + len(y.v)
    for i in range(bound + 1):
        if x.letter(i) != y.letter(i):
            return i
    raise AssertionError("distinct canonical points agree too long")  # pragma: no cover


@dataclass(frozen=True)
class Entourage:
    """``E_d = {(x, y) : x and y agree on their first d letters}``."""

    depth: int

    def __post_init__(self):
        if self.depth < 0:
            raise PreconditionError("entourage depth must be >= 0")

    def __contains__(self, pair) -> bool:
        x, y = pair
        a = agreement(x, y)
        return a is None or a >= self.depth

    def is_within(self, other: "Entourage") -> bool:
        """``E_self ⊆ E_other``."""
        return self.depth >= other.depth


def points_in(c: ClopenSet, bound: int) -> Iterator[Point]:
    """Ultimately periodic points ``p·t(v)`` of ``c`` with ``|t|+|v| <= bound``.

    Yields canonical points, each once, ordered by prefix then size.
    """
    seen = set()
    for p in c.prefixes:
        for total in range(1, bound + 1):
            for lt in range(total):
                for t in all_words(c.k, lt):
                    for v in all_words(c.k, total - lt):
                        x = Point.of(p + t, v)
                        if x not in seen:
                            seen.add(x)
                            yield x


def standard_points(k: int, bound: int):
    """Canonical points ``u(v)`` of A^ω with ``|u|+|v| <= bound``, sorted."""
    return sorted(points_in(ClopenSet.full(k), bound), key=Point.sort_key)
