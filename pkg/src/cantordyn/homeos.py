"""Exact homeomorphisms of A^ω: synchronous transducers and prefix exchanges.

Both classes keep themselves in normal form at all times, so ``==`` is
extensional equality within a class:

* :class:`Transducer` is an invertible Mealy machine, minimized by partition
  refinement and renumbered breadth-first from the initial state (state 0).
* :class:`PrefixExchange` is a bijection ``p_i·z ↦ q_i·z`` between two
  complete prefix codes, fully reduced (no caret left that could collapse).

Products follow the left-action convention: ``g * h`` applies ``h`` first.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from .cylinders import (ClopenSet, Point, Word, check_alphabet, check_word,
                        format_word, parse_word)
from .errors import BudgetExceeded, MachineClassError, MachineError, SchemaError

DEFAULT_MACHINE_CAP = 10_000
DEFAULT_PAIR_CAP = 4096


class Homeomorphism:
    """Common surface of the two machine classes."""

    k: int
    kind: str

    def apply(self, x: Point) -> Point:
        raise NotImplementedError

    def image(self, c: ClopenSet) -> ClopenSet:
        raise NotImplementedError

    def preimage(self, c: ClopenSet) -> ClopenSet:
        return self.inverse.image(c)

    @property
    def inverse(self) -> "Homeomorphism":
        raise NotImplementedError

    def compose(self, other: "Homeomorphism", cap: Optional[int] = None) -> "Homeomorphism":
        """``self ∘ other``."""
        if self.k != other.k:
            raise MachineError(f"alphabet mismatch: {self.k} vs {other.k}")
        if other.is_identity:
            return self
        if self.is_identity:
            return other
        if type(self) is not type(other):
            raise MachineClassError(
                f"cannot compose {self.kind} with {other.kind}; generating sets must be homogeneous")
        return self._compose(other, cap)

    def __mul__(self, other: "Homeomorphism") -> "Homeomorphism":
        return self.compose(other)

    def _compose(self, other, cap):
        raise NotImplementedError

    @property
    def is_identity(self) -> bool:
        raise NotImplementedError

    @property
    def size(self) -> int:
        raise NotImplementedError

    def modulus(self, d: int) -> int:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    @cached_property
    def key(self) -> tuple:
        """Hashable, totally ordered normal form."""
        return self._key()

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        if not isinstance(other, Homeomorphism):
            return NotImplemented
        return self.key == other.key

    def __lt__(self, other):
        return self.key < other.key


def equal(g: Homeomorphism, h: Homeomorphism) -> bool:
    """Extensional equality; identities of either class compare equal."""
    if g.is_identity or h.is_identity:
        return g.is_identity and h.is_identity
    if g.kind != h.kind:
        raise MachineClassError(f"cannot compare {g.kind} with {h.kind}")
    return g == h


def normal_form(h: Homeomorphism) -> dict:
    return h.to_json()


# -- synchronous transducers ----------------------------------------------

def _minimize(delta, lam, initial, k):
    """Reachable quotient under behavioural equivalence, numbered by BFS."""
    order = [initial]
    seen = {initial: 0}
    i = 0
    while i < len(order):
        q = order[i]
        i += 1
        for a in range(k):
            r = delta[q][a]
            if r not in seen:
                seen[r] = len(order)
                order.append(r)
    d = [[seen[delta[q][a]] for a in range(k)] for q in order]
    lm = [tuple(lam[q]) for q in order]
    n = len(order)

    ids = {}
    block = [ids.setdefault(lm[q], len(ids)) for q in range(n)]
    count = len(ids)
    while True:
        ids = {}
        new = [ids.setdefault((block[q],) + tuple(block[d[q][a]] for a in range(k)), len(ids))
               for q in range(n)]
        if len(ids) == count:
            break
        block, count = new, len(ids)

    rep = {}
    for q in range(n):
        rep.setdefault(block[q], q)
    num = {block[0]: 0}
    queue = [block[0]]
    i = 0
    while i < len(queue):
        b = queue[i]
        i += 1
        q = rep[b]
        for a in range(k):
            c = block[d[q][a]]
            if c not in num:
                num[c] = len(queue)
                queue.append(c)
    out_delta = tuple(tuple(num[block[d[rep[b]][a]]] for a in range(k)) for b in queue)
    out_lam = tuple(lm[rep[b]] for b in queue)
    return out_delta, out_lam


class Transducer(Homeomorphism):
    """Invertible synchronous (Mealy) transducer with initial state 0."""

    kind = "mealy"

    def __init__(self, delta, lam, k):
        # Trusted constructor; use from_tables for unvalidated input.
        self.k = k
        self.delta = delta
        self.lam = lam

    @classmethod
    def from_tables(cls, delta: Sequence[Sequence[int]], lam: Sequence[Sequence[int]],
                    initial: int = 0) -> "Transducer":
        n = len(delta)
        if n == 0 or len(lam) != n:
            raise MachineError("delta and lambda must be nonempty and of equal length")
        k = check_alphabet(len(delta[0]))
        for q in range(n):
            if len(delta[q]) != k or len(lam[q]) != k:
                raise MachineError(f"state {q}: rows must have {k} entries")
            for r in delta[q]:
                if not isinstance(r, int) or not 0 <= r < n:
                    raise MachineError(f"state {q}: transition target {r!r} out of range")
            check_word(lam[q], k)
            if sorted(lam[q]) != list(range(k)):
                raise MachineError(f"state {q}: output row {list(lam[q])} is not a permutation")
        if not 0 <= initial < n:
            raise MachineError(f"initial state {initial} out of range")
        d, lm = _minimize(delta, lam, initial, k)
        return cls(d, lm, k)

    @classmethod
    def identity(cls, k: int) -> "Transducer":
        return cls(((0,) * k,), (tuple(range(k)),), check_alphabet(k))

    def _key(self):
        return ("mealy", self.k, self.delta, self.lam)

    @property
    def states(self) -> int:
        return len(self.delta)

    size = states

    @property
    def is_identity(self) -> bool:
        return len(self.delta) == 1 and self.lam[0] == tuple(range(self.k))

    def run(self, word: Word, state: int = 0) -> Tuple[Word, int]:
        out = []
        for a in word:
            out.append(self.lam[state][a])
            state = self.delta[state][a]
        return tuple(out), state

    def apply_word(self, word: Word) -> Word:
        return self.run(word)[0]

    def apply(self, x: Point) -> Point:
        head, q = self.run(x.u)
        seen = {}
        blocks = []
        while q not in seen:
            seen[q] = len(blocks)
            out, q = self.run(x.v, q)
            blocks.append(out)
        j = seen[q]
        pre = head + tuple(a for b in blocks[:j] for a in b)
        per = tuple(a for b in blocks[j:] for a in b)
        return Point.of(pre, per)

    def image(self, c: ClopenSet) -> ClopenSet:
        if c.k != self.k:
            raise MachineError("alphabet mismatch")
        return ClopenSet.of(self.k, (self.apply_word(p) for p in c.prefixes))

    @cached_property
    def inverse(self) -> "Transducer":
        k = self.k
        d, lm = [], []
        for q in range(self.states):
            inv = [0] * k
            nxt = [0] * k
            for a in range(k):
                b = self.lam[q][a]
                inv[b] = a
                nxt[b] = self.delta[q][a]
            d.append(nxt)
            lm.append(inv)
        t = Transducer(*_minimize(d, lm, 0, k), k)
        t.__dict__["inverse"] = self
        return t

    def _compose(self, other: "Transducer", cap):
        cap = DEFAULT_MACHINE_CAP if cap is None else cap
        k = self.k
        index = {(0, 0): 0}
        pairs = [(0, 0)]
        d, lm = [], []
        i = 0
        while i < len(pairs):
            qh, qg = pairs[i]
            i += 1
            row_d, row_l = [], []
            for a in range(k):
                b = other.lam[qh][a]
                nxt = (other.delta[qh][a], self.delta[qg][b])
                if nxt not in index:
                    if len(pairs) >= cap:
                        raise BudgetExceeded(f"composite machine exceeds {cap} states")
                    index[nxt] = len(pairs)
                    pairs.append(nxt)
                row_d.append(index[nxt])
                row_l.append(self.lam[qg][b])
            d.append(row_d)
            lm.append(row_l)
        return Transducer(*_minimize(d, lm, 0, k), k)

    def modulus(self, d: int) -> int:
        # Level-preserving maps are isometries of the depth metric.
        return d

    def level_permutation(self, d: int) -> List[int]:
        """Induced permutation of depth-``d`` words, by lexicographic index."""
        k = self.k
        outs, states = [0], [0]
        for _ in range(d):
            no, ns = [], []
            for o, q in zip(outs, states):
                row_l, row_d = self.lam[q], self.delta[q]
                for a in range(k):
                    no.append(o * k + row_l[a])
                    ns.append(row_d[a])
            outs, states = no, ns
        return outs

    def fixed_points(self, limit: int = 16) -> List[Point]:
        """Ultimately periodic fixed points given by simple lassos."""
        found = []
        path_states, path_letters = [0], []

        def dfs(q):
            for a in range(self.k):
                if len(found) >= limit:
                    return
                if self.lam[q][a] != a:
                    continue
                r = self.delta[q][a]
                path_letters.append(a)
                if r in path_states:
                    j = path_states.index(r)
                    found.append(Point.of(path_letters[:j], path_letters[j:]))
                else:
                    path_states.append(r)
                    dfs(r)
                    path_states.pop()
                path_letters.pop()

        dfs(0)
        return sorted(set(found), key=Point.sort_key)

    def to_json(self) -> dict:
        return {"type": "mealy", "states": self.states, "initial": 0,
                "delta": [list(r) for r in self.delta],
                "lambda": [list(r) for r in self.lam]}

    def __repr__(self):
        return f"Transducer(states={self.states}, k={self.k})"


# -- prefix exchanges -------------------------------------------------------

def _is_complete_code(words: Sequence[Word], k: int) -> bool:
    if len(set(words)) != len(words):
        return False
    if sum(Fraction(1, k ** len(w)) for w in words) != 1:
        return False
    return ClopenSet.of(k, words).is_full()


def _reduce(table: Dict[Word, Word], k: int) -> Dict[Word, Word]:
    changed = True
    while changed:
        changed = False
        parents = {p[:-1] for p in table if p}
        for w in sorted(parents, key=len, reverse=True):
            kids = [w + (a,) for a in range(k)]
            if not all(c in table for c in kids):
                continue
            imgs = [table[c] for c in kids]
            if any(not q for q in imgs):
                continue
            r = imgs[0][:-1]
            if all(q[:-1] == r and q[-1] == a for a, q in enumerate(imgs)):
                for c in kids:
                    del table[c]
                table[w] = r
                changed = True
    return table


class PrefixExchange(Homeomorphism):
    """Homeomorphism ``p_i·z ↦ q_i·z`` for complete prefix codes {p_i}, {q_i}."""

    kind = "prefix_exchange"

    def __init__(self, pairs, k):
        # Trusted constructor; use from_pairs for unvalidated input.
        self.k = k
        self.pairs = pairs
        self._table = dict(pairs)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[Sequence[int], Sequence[int]]], k: int,
                   reduce: bool = True) -> "PrefixExchange":
        check_alphabet(k)
        if not pairs:
            raise MachineError("prefix exchange needs at least one pair")
        dom = [check_word(p, k) for p, _ in pairs]
        ran = [check_word(q, k) for _, q in pairs]
        broken = [f"{side} not a maximal antichain"
                  for side, code in (("domain", dom), ("range", ran)) if not _is_complete_code(code, k)]
        if broken:
            raise MachineError("; ".join(broken))
        table = dict(zip(dom, ran))
        if reduce:
            table = _reduce(table, k)
        return cls(tuple(sorted(table.items())), k)

    @classmethod
    def identity(cls, k: int) -> "PrefixExchange":
        return cls((((), ()),), check_alphabet(k))

    def _key(self):
        return ("prefix_exchange", self.k, self.pairs)

    @property
    def size(self) -> int:
        return len(self.pairs)

    @property
    def is_identity(self) -> bool:
        return self.pairs == (((), ()),)

    @cached_property
    def _lengths(self):
        return sorted({len(p) for p, _ in self.pairs})

    def match(self, x: Point) -> Tuple[Word, Word]:
        """The unique pair whose domain word is a prefix of ``x``."""
        for n in self._lengths:
            p = x.letters(n)
            if p in self._table:
                return p, self._table[p]
        raise MachineError("domain code does not cover the point")  # pragma: no cover

    def apply(self, x: Point) -> Point:
        p, q = self.match(x)
        return x.drop(len(p)).prepend(q)

    def image(self, c: ClopenSet) -> ClopenSet:
        if c.k != self.k:
            raise MachineError("alphabet mismatch")
        out = []
        for w in c.prefixes:
            for p, q in self.pairs:
                if len(p) <= len(w):
                    if w[:len(p)] == p:
                        out.append(q + w[len(p):])
                elif p[:len(w)] == w:
                    out.append(q)
        return ClopenSet.of(self.k, out)

    @cached_property
    def inverse(self) -> "PrefixExchange":
        inv = PrefixExchange(tuple(sorted((q, p) for p, q in self.pairs)), self.k)
        inv.__dict__["inverse"] = self
        return inv

    def _compose(self, other: "PrefixExchange", cap):
        cap = DEFAULT_PAIR_CAP if cap is None else cap
        table = {}
        for p, q in other.pairs:
            for p2, q2 in self.pairs:
                if len(q) <= len(p2):
                    if p2[:len(q)] == q:
                        table[p + p2[len(q):]] = q2
                elif q[:len(p2)] == p2:
                    table[p] = q2 + q[len(p2):]
            if len(table) > cap:
                raise BudgetExceeded(f"composite table exceeds {cap} pairs")
        return PrefixExchange(tuple(sorted(_reduce(table, self.k).items())), self.k)

    def modulus(self, d: int) -> int:
        # Agreement on d + |p| letters fixes the domain word and leaves d letters of tail.
        return d + max(len(p) for p, _ in self.pairs)

    def restricted_modulus(self, d: int, c: ClopenSet) -> int:
        """Modulus bound counting only domain cylinders that meet ``c``."""
        longest = 0
        for p, _ in self.pairs:
            if not (c & ClopenSet.cylinder(self.k, p)).is_empty():
                longest = max(longest, len(p))
        return d + longest

    def fixed_points(self, limit: int = 16) -> List[Point]:
        found = []
        for p, q in self.pairs:
            if p == q:
                found.extend(Point.of(p, (a,)) for a in range(self.k))
            elif len(q) > len(p) and q[:len(p)] == p:
                found.append(Point.of(p, q[len(p):]))
            elif len(p) > len(q) and p[:len(q)] == q:
                found.append(Point.of(q, p[len(q):]))
        return sorted(set(found), key=Point.sort_key)[:limit]

    def to_json(self) -> dict:
        return {"type": "prefix_exchange", "alphabet": self.k,
                "pairs": [[format_word(p), format_word(q)] for p, q in self.pairs]}

    def __repr__(self):
        body = ", ".join(f"{format_word(p)}→{format_word(q)}" for p, q in self.pairs)
        return f"PrefixExchange({{{body}}})"


def identity_like(h: Homeomorphism) -> Homeomorphism:
    return type(h).identity(h.k)


# -- JSON -------------------------------------------------------------------

def _int_rows(obj, name, path):
    if not isinstance(obj, list) or not obj:
        raise SchemaError(f"{path}.{name}", "expected a nonempty list of rows")
    for i, row in enumerate(obj):
        if not isinstance(row, list) or not all(isinstance(v, int) and not isinstance(v, bool)
                                                for v in row):
            raise SchemaError(f"{path}.{name}[{i}]", "expected a list of integers")
    return obj


def machine_from_json(obj, k: Optional[int] = None, path: str = "machine") -> Homeomorphism:
    """Parse one machine description; errors carry the JSON path."""
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    kind = obj.get("type")
    try:
        if kind == "mealy":
            delta = _int_rows(obj.get("delta"), "delta", path)
            lam = _int_rows(obj.get("lambda"), "lambda", path)
            n = obj.get("states", len(delta))
            if n != len(delta):
                raise SchemaError(f"{path}.states", f"says {n} but delta has {len(delta)} rows")
            initial = obj.get("initial", 0)
            if not isinstance(initial, int):
                raise SchemaError(f"{path}.initial", "expected an integer")
            t = Transducer.from_tables(delta, lam, initial)
            if k is not None and t.k != k:
                raise SchemaError(path, f"rows have {t.k} letters, system alphabet is {k}")
            return t
        if kind == "prefix_exchange":
            kk = obj.get("alphabet", k if k is not None else 2)
            if k is not None and kk != k:
                raise SchemaError(f"{path}.alphabet", f"{kk} differs from system alphabet {k}")
            raw = obj.get("pairs")
            if not isinstance(raw, list) or not raw:
                raise SchemaError(f"{path}.pairs", "expected a nonempty list of pairs")
            pairs = []
            for i, pair in enumerate(raw):
                if (not isinstance(pair, list) or len(pair) != 2
                        or not all(isinstance(s, str) for s in pair)):
                    raise SchemaError(f"{path}.pairs[{i}]", "expected [domain, range] strings")
                pairs.append((parse_word(pair[0], kk), parse_word(pair[1], kk)))
            return PrefixExchange.from_pairs(pairs, kk)
    except MachineError as e:
        raise SchemaError(path, str(e)) from None
    raise SchemaError(f"{path}.type", f"unknown machine type {kind!r}")


def mealy_from_recursion(k: int, states: Dict[str, Tuple[Sequence[int], Sequence[str]]],
                         initial: str) -> Transducer:
    """Build a transducer from a wreath recursion ``name -> (perm, children)``.

    ``perm[a]`` is the output letter on input ``a`` and ``children[a]`` names
    the state entered afterwards.
    """
    names = list(states)
    idx = {n: i for i, n in enumerate(names)}
    delta = [[idx[c] for c in states[n][1]] for n in names]
    lam = [list(states[n][0]) for n in names]
    return Transducer.from_tables(delta, lam, idx[initial])
