import pytest
from hypothesis import given, strategies as st

from cantordyn.cylinders import (ClopenSet, Entourage, Point, agreement, all_words, normalize,
                                 parse_clopen, parse_point, points_in, standard_points)
from cantordyn.errors import AlphabetError, PreconditionError

from conftest import clopen_sets, points, words

DEPTH = 7


def brute(c: ClopenSet, d=DEPTH):
    """Set of depth-d words lying in c, by prefix test on each word."""
    return {w for w in all_words(c.k, d) if any(w[:len(p)] == p for p in c.prefixes)}


def expand(x: Point, n):
    u, v = x.u, x.v
    out = list(u)
    while len(out) < n:
        out.extend(v)
    return tuple(out[:n])


def S(text):
    return parse_clopen(text, 2)


class TestNormalize:
    def test_sibling_family_collapses(self):
        assert normalize(2, [(0,), (1,)]) == ClopenSet.full(2)
        assert str(normalize(2, [(0,), (1,)])) == "ε"

    def test_absorbed_prefix(self):
        assert normalize(2, [(0, 1), (0,)]) == S("0")

    def test_two_presentations(self):
        assert normalize(2, [(0, 0), (0, 1), (1, 0)]) == normalize(2, [(0,), (1, 0)])

    def test_letter_out_of_range(self):
        with pytest.raises(AlphabetError):
            normalize(2, [(0, 2)])

    @given(st.lists(words(), max_size=6))
    def test_idempotent_and_canonical(self, ws):
        c = normalize(2, ws)
        assert normalize(2, c.prefixes) == c
        ps = c.prefixes
        assert list(ps) == sorted(ps)
        for p in ps:
            for q in ps:
                assert p == q or q[:len(p)] != p
        for p in ps:
            if p:
                assert not all(p[:-1] + (a,) in ps for a in range(2))


class TestBooleanOps:
    def test_examples(self):
        assert S("0") & S("01") == S("01")
        assert ~S("0") == S("1")
        assert (S("ε") - S("ε")).is_empty()
        assert (S("0") & S("1")).is_empty()

    def test_text_forms(self):
        assert str(ClopenSet.empty(2)) == "⊥"
        assert S("⊥").is_empty()
        assert str(S("10,00,01")) == "0,10"

    @given(clopen_sets(), clopen_sets())
    def test_against_bitset_membership(self, a, b):
        A, B, full = brute(a), brute(b), set(all_words(2, DEPTH))
        assert brute(a | b) == A | B
        assert brute(a & b) == A & B
        assert brute(a - b) == A - B
        assert brute(~a) == full - A
        assert (a <= b) == (A <= B)

    @given(clopen_sets(), clopen_sets(), clopen_sets())
    def test_laws(self, a, b, c):
        assert (a | b) | c == a | (b | c)
        assert (a & b) & c == a & (b & c)
        assert ~(a | b) == ~a & ~b
        assert ~(a & b) == ~a | ~b
        assert ~~a == a
        assert a & (b | c) == (a & b) | (a & c)

    @given(clopen_sets(max_len=6, max_words=10))
    def test_deep_bitset_model(self, a):
        assert brute(a, 12) == {w for w in all_words(2, 12) if a.contains(Point.of(w, (0,)))}


class TestDepthSlice:
    def test_examples(self):
        assert S("0").depth_slice(2) == ((0, 0), (0, 1))
        assert ClopenSet.empty(2).depth_slice(3) == ()
        assert S("ε").depth_slice(1) == ((0,), (1,))

    def test_too_shallow(self):
        with pytest.raises(PreconditionError):
            S("010").depth_slice(2)

    @given(clopen_sets(), st.integers(0, 3))
    def test_round_trip(self, c, extra):
        assert normalize(2, c.depth_slice(c.max_length + extra)) == c


class TestPoints:
    def test_canonical_forms(self):
        assert Point.of((0, 1, 0, 1), (0, 1)) == Point.of((), (0, 1))
        assert Point.of((1,), (1, 1)) == Point.of((), (1,))
        assert str(Point.of((0,), (1,))) == "0(1)"
        assert parse_point("0(1)") == Point.of((0,), (1,))
        assert parse_point("(10)") == Point.of((1,), (0, 1))

    def test_contains(self):
        x = parse_point("0(1)")
        assert S("0").contains(x)
        assert not S("1").contains(x)

    @given(points(), points())
    def test_canonical_uniqueness(self, x, y):
        n = 4 * (len(x.u) + len(x.v) + len(y.u) + len(y.v))
        assert (x == y) == (expand(x, n) == expand(y, n))

    @given(points())
    def test_canonical_is_minimal(self, x):
        assert x.u == () or x.u[-1] != x.v[-1]
        v = x.v
        assert not any(len(v) % p == 0 and v == v[:p] * (len(v) // p) for p in range(1, len(v)))

    @given(points(), points())
    def test_agreement(self, x, y):
        a = agreement(x, y)
        if a is None:
            assert x == y
        else:
            assert expand(x, a) == expand(y, a)
            assert x.letter(a) != y.letter(a)

    @given(points(), words())
    def test_prepend_drop(self, x, w):
        assert x.prepend(w).drop(len(w)) == x
        assert expand(x.prepend(w), len(w) + 5) == w + expand(x, 5)


class TestEntourage:
    def test_membership_and_order(self):
        x, y = parse_point("00(1)"), parse_point("01(1)")
        assert (x, y) in Entourage(1)
        assert (x, y) not in Entourage(2)
        assert Entourage(3).is_within(Entourage(2))
        assert not Entourage(2).is_within(Entourage(3))

    def test_negative_depth(self):
        with pytest.raises(ValueError):
            Entourage(-1)


def test_points_in_stay_inside():
    c = S("01,110")
    pts = list(points_in(c, 3))
    assert pts and all(c.contains(p) for p in pts)


def test_standard_points_sorted_and_distinct():
    pts = standard_points(2, 4)
    assert len(set(pts)) == len(pts)
    assert pts == sorted(pts, key=Point.sort_key)
