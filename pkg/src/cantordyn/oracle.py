"""Brute-force bitset model of clopen sets at a fixed depth.

A subset of ``A^d`` is a Python int whose bit ``i`` stands for the word with
index ``i``.  Generator maps are recomputed from the raw transition tables,
letter by letter, so nothing here goes through the trie algebra or the
symbolic ``image``.  The model is only valid for transducers, whose images
of depth-``d`` sets are again depth-``d`` sets.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .cylinders import ClopenSet, Point, Word, all_words
from .homeos import Transducer
from .orbits import orbit_closure
from .tower import build_tower
from .words import GeneratingSet

MAX_DEPTH = 14


def _index(word: Sequence[int], k: int) -> int:
    i = 0
    for a in word:
        i = i * k + a
    return i


def _run_tables(delta, lam, word):
    q, out = 0, []
    for a in word:
        out.append(lam[q][a])
        q = delta[q][a]
    return out


class BitsetOracle:
    def __init__(self, gens: GeneratingSet, d: int):
        if not gens.is_synchronous:
            raise TypeError("the bitset oracle needs synchronous transducers")
        if not 0 <= d <= MAX_DEPTH:
            raise ValueError(f"depth must lie in 0..{MAX_DEPTH}")
        self.k, self.d = gens.k, d
        self.words: List[Word] = list(all_words(self.k, d))
        self.full = (1 << len(self.words)) - 1
        self.maps = [[_index(_run_tables(g.delta, g.lam, w), self.k) for w in self.words]
                     for g in gens]

    def encode(self, c: ClopenSet) -> int:
        if c.max_length > self.d:
            raise ValueError(f"set needs depth {c.max_length} > {self.d}")
        mask = 0
        for i, w in enumerate(self.words):
            if any(tuple(w[:len(p)]) == p for p in c.prefixes):
                mask |= 1 << i
        return mask

    def union(self, a: int, b: int) -> int:
        return a | b

    def intersect(self, a: int, b: int) -> int:
        return a & b

    def difference(self, a: int, b: int) -> int:
        return a & ~b

    def complement(self, a: int) -> int:
        return self.full & ~a

    def image(self, j: int, a: int) -> int:
        out = 0
        for i, target in enumerate(self.maps[j]):
            if a >> i & 1:
                out |= 1 << target
        return out

    def step(self, a: int) -> int:
        out = a
        for j in range(len(self.maps)):
            out &= self.image(j, a)
        return out

    def tower(self, a: int, max_n: int) -> Tuple[List[int], Optional[int]]:
        """``([V_0, V_1, …], stabilized_at)``, computing at most ``V_{max_n+1}``."""
        levels = [self.step(a)]
        while len(levels) <= max_n + 1:
            nxt = self.step(levels[-1])
            if nxt == levels[-1]:
                return levels, len(levels) - 1
            levels.append(nxt)
        return levels, None

    def orbit(self, word: Word) -> int:
        start = _index(word, self.k)
        seen = 1 << start
        stack = [start]
        while stack:
            i = stack.pop()
            for m in self.maps:
                j = m[i]
                if not seen >> j & 1:
                    seen |= 1 << j
                    stack.append(j)
        return seen

    def decode(self, a: int) -> List[str]:
        return ["".join(map(str, w)) for i, w in enumerate(self.words) if a >> i & 1]


@dataclass
class OracleDiff:
    mismatches: List[Tuple[int, str, List[str], List[str]]] = field(default_factory=list)
    steps: int = 0

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def __str__(self) -> str:
        if self.passed:
            return f"pass ({self.steps} steps)"
        lines = [f"FAIL ({len(self.mismatches)} of {self.steps} steps)"]
        for step, op, want, got in self.mismatches[:10]:
            extra = sorted(set(got) - set(want))
            missing = sorted(set(want) - set(got))
            lines.append(f"  step {step} {op}: missing {missing[:6]} extra {extra[:6]}")
        return "\n".join(lines)


Op = Tuple


def oracle_check(gens: GeneratingSet, d: int, script: Sequence[Op],
                 registers: Sequence[ClopenSet] = (), max_n: int = 6) -> OracleDiff:
    """Run ``script`` symbolically and in the bitset model and diff the results.

    Operations act on a register file seeded with ``registers``; each
    op appends its result.  Supported ops::

        ("union"|"intersect"|"difference", i, j)   ("complement", i)
        ("image", generator_index, i)              ("tower", i)
        ("orbit", point)
    """
    oracle = BitsetOracle(gens, d)
    sym: List[ClopenSet] = list(registers)
    bits: List[int] = [oracle.encode(c) for c in sym]
    diff = OracleDiff()

    def compare(step, op, want_bits, got_set):
        diff.steps += 1
        got_bits = oracle.encode(got_set)
        if got_bits != want_bits:
            diff.mismatches.append((step, op, oracle.decode(want_bits), oracle.decode(got_bits)))

    for step, op in enumerate(script):
        name = op[0]
        if name in ("union", "intersect", "difference"):
            i, j = op[1], op[2]
            s = getattr(sym[i], name)(sym[j])
            b = getattr(oracle, name)(bits[i], bits[j])
        elif name == "complement":
            s, b = sym[op[1]].complement(), oracle.complement(bits[op[1]])
        elif name == "image":
            j, i = op[1], op[2]
            s, b = gens[j].image(sym[i]), oracle.image(j, bits[i])
        elif name == "tower":
            t = build_tower(gens, sym[op[1]], max_n, translate_depth=-1)
            want, stable = oracle.tower(bits[op[1]], max_n)
            for n, wb in enumerate(want):
                compare(step, f"tower V_{n}", wb, t.V(n))
            diff.steps += 1
            if stable != t.stabilized_at:
                diff.mismatches.append((step, "tower stabilization", [str(stable)],
                                        [str(t.stabilized_at)]))
            s, b = t.V(len(want) - 1), want[-1]
        elif name == "orbit":
            x: Point = op[1]
            approx = orbit_closure(gens, x, d)
            diff.steps += 1
            got = 0
            for w in approx.reached:
                got |= 1 << _index(w, oracle.k)
            want = oracle.orbit(x.letters(d))
            if got != want or not approx.exact:
                diff.mismatches.append((step, f"orbit {x}", oracle.decode(want), oracle.decode(got)))
            continue
        else:
            raise ValueError(f"unknown oracle op {name!r}")
        compare(step, name, b, s)
        sym.append(s)
        bits.append(b)
    return diff


def random_clopen(rng: random.Random, k: int, d: int, max_words: int = 6) -> ClopenSet:
    words = []
    for _ in range(rng.randint(0, max_words)):
        n = rng.randint(0, d)
        words.append(tuple(rng.randrange(k) for _ in range(n)))
    return ClopenSet.of(k, words)


def random_script(rng: random.Random, registers: int, generators: int, length: int,
                  k: int, d: int) -> List[Op]:
    ops: List[Op] = []
    n = registers
    for _ in range(length):
        kind = rng.choice(["union", "intersect", "difference", "complement", "image", "image",
                           "tower", "orbit"])
        if kind in ("union", "intersect", "difference"):
            ops.append((kind, rng.randrange(n), rng.randrange(n)))
        elif kind == "complement":
            ops.append((kind, rng.randrange(n)))
        elif kind == "image":
            ops.append((kind, rng.randrange(generators), rng.randrange(n)))
        elif kind == "tower":
            ops.append((kind, rng.randrange(n)))
        else:
            u = tuple(rng.randrange(k) for _ in range(rng.randint(0, 3)))
            v = tuple(rng.randrange(k) for _ in range(rng.randint(1, 3)))
            ops.append((kind, Point.of(u, v)))
            continue
        n += 1
    return ops


class _CorruptedTransducer(Transducer):
    """Negative control: ``image`` silently drops the smallest prefix."""

    def image(self, c: ClopenSet) -> ClopenSet:
        good = super().image(c)
        if good.is_empty():
            return good
        return ClopenSet.of(c.k, good.prefixes[1:])


def corrupted_fixture() -> GeneratingSet:
    """Odometer whose symbolic image is wrong; the oracle must catch it."""
    t = Transducer.from_tables([[1, 0], [1, 1]], [[1, 0], [0, 1]])
    bad = _CorruptedTransducer(t.delta, t.lam, t.k)
    return GeneratingSet([bad], ["a"])


def standard_script(k: int, generators: int) -> Tuple[List[ClopenSet], List[Op]]:
    """A fixed script exercising every op once or twice."""
    first, last = min(1, generators - 1), generators - 1
    regs = [ClopenSet.full(k), ClopenSet.cylinder(k, (1,)),
            ClopenSet.of(k, [(0, 0), (1, 0, 1)])]
    ops: List[Op] = [("union", 1, 2), ("intersect", 0, 2), ("complement", 2), ("difference", 0, 1),
                     ("image", first, 2), ("image", last, 3), ("tower", 1), ("tower", 2),
                     ("orbit", Point.of((), (0,))), ("orbit", Point.of((1, 0), (1,)))]
    return regs, ops
