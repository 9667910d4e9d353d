import json
import random

import pytest
from hypothesis import given, strategies as st

from cantordyn import catalog
from cantordyn.cylinders import ClopenSet, Point, agreement, all_words, parse_clopen, parse_point
from cantordyn.errors import MachineClassError, MachineError, SchemaError
from cantordyn.homeos import (PrefixExchange, Transducer, equal, machine_from_json, normal_form)

from conftest import clopen_sets, exchanges, points, random_transducer, transducers

ODO = Transducer.from_tables([[1, 0], [1, 1]], [[1, 0], [0, 1]])
H = PrefixExchange.from_pairs([((0,), (0, 0)), ((1, 0), (0, 1)), ((1, 1), (1,))], 2)


def expand(x: Point, n):
    out = list(x.u)
    while len(out) < n:
        out.extend(x.v)
    return tuple(out[:n])


def run_letters(t: Transducer, word):
    """Letter-by-letter run on the raw tables; independent of ``apply``."""
    q, out = 0, []
    for a in word:
        out.append(t.lam[q][a])
        q = t.delta[q][a]
    return tuple(out)


def exchange_prefix(h: PrefixExchange, word):
    """Image prefix of a long finite word under the table, by direct matching."""
    for p, q in h.pairs:
        if word[:len(p)] == p:
            return q + word[len(p):]
    raise AssertionError("no domain word matches")


def S(text):
    return parse_clopen(text, 2)


class TestApply:
    def test_odometer_carries(self):
        assert ODO.apply(parse_point("(1)")) == parse_point("(0)")
        assert run_letters(ODO, (1,) * 64) == (0,) * 64

    def test_identity(self):
        assert Transducer.identity(2).apply(parse_point("0(1)")) == parse_point("0(1)")

    def test_contracting(self):
        assert H.apply(parse_point("0(1)")) == parse_point("00(1)")

    @given(transducers(), points())
    def test_transducer_against_letterwise_run(self, t, x):
        n = 3 * (len(x.u) + len(x.v)) + 12
        assert expand(t.apply(x), n) == run_letters(t, expand(x, n))

    @given(exchanges(), points())
    def test_exchange_against_matching(self, h, x):
        n = 40
        assert expand(h.apply(x), n - 8) == exchange_prefix(h, expand(x, n))[:n - 8]

    @given(st.one_of(transducers(), exchanges()), points())
    def test_inverse_undoes(self, g, x):
        assert g.inverse.apply(g.apply(x)) == x
        assert g.apply(g.inverse.apply(x)) == x


class TestImage:
    def test_examples(self):
        assert ODO.image(S("1")) == S("0")
        assert H.image(S("0")) == S("00")
        assert Transducer.identity(2).image(S("01,1")) == S("01,1")

    @given(st.one_of(transducers(), exchanges()), clopen_sets(), points())
    def test_image_matches_apply(self, g, c, x):
        assert g.image(c).contains(g.apply(x)) == c.contains(x)

    @given(st.one_of(transducers(), exchanges()), clopen_sets(), clopen_sets())
    def test_image_commutes_with_boolean_ops(self, g, a, b):
        assert g.image(ClopenSet.full(2)).is_full()
        assert g.image(a | b) == g.image(a) | g.image(b)
        assert g.image(a & b) == g.image(a) & g.image(b)
        assert g.image(~a) == ~g.image(a)
        assert g.preimage(g.image(a)) == a

    @given(transducers(), clopen_sets(max_len=4))
    def test_transducer_image_bitset(self, t, c):
        d = max(c.max_length, 1)
        want = {run_letters(t, w) for w in all_words(2, d) if c.contains(Point.of(w, (0,)))}
        assert set(t.image(c).depth_slice(d)) == want


class TestCompose:
    def test_inverse_gives_identity(self):
        assert (ODO * ODO.inverse).is_identity
        assert (ODO * ODO.inverse).states == 1
        assert equal(ODO * ODO.inverse, Transducer.identity(2))
        assert equal(ODO, ODO * (ODO * ODO.inverse))

    def test_square(self):
        sq = ODO * ODO
        assert sq.apply(parse_point("(1)")) == parse_point("1(0)")
        assert not equal(ODO, sq)
        assert ODO.image(S("11")) != sq.image(S("11"))

    def test_contracting_square(self):
        hh = H * H
        assert dict(hh.pairs) == {(0,): (0, 0, 0), (1, 0): (0, 0, 1), (1, 1, 0): (0, 1), (1, 1, 1): (1,)}
        assert hh.image(S("0")) == S("000")

    def test_mixed_classes_rejected(self):
        with pytest.raises(MachineClassError):
            ODO * H

    @given(st.data())
    def test_group_laws(self, data):
        kind = data.draw(st.sampled_from(["mealy", "px"]))
        gen = transducers(max_states=3) if kind == "mealy" else exchanges(max_pairs=4)
        f, g, h = data.draw(gen), data.draw(gen), data.draw(gen)
        assert (f * g) * h == f * (g * h)
        assert (f * g).inverse == g.inverse * f.inverse
        assert (f * f.inverse).is_identity
        x = data.draw(points())
        assert (f * g).apply(x) == f.apply(g.apply(x))


class TestNormalForm:
    def test_minimization_merges_states(self):
        redundant = Transducer.from_tables([[1, 2], [1, 2], [1, 2]], [[0, 1], [1, 0], [1, 0]])
        same = Transducer.from_tables([[1, 1], [1, 1]], [[0, 1], [1, 0]])
        assert redundant.states == 2 and redundant == same

    def test_caret_collapse(self):
        fine = PrefixExchange.from_pairs([((0, 0), (1, 0)), ((0, 1), (1, 1)), ((1,), (0,))], 2)
        assert fine.pairs == (((0,), (1,)), ((1,), (0,)))

    @given(st.one_of(transducers(), exchanges()))
    def test_json_round_trip(self, g):
        text = json.dumps(normal_form(g))
        assert machine_from_json(json.loads(text)) == g

    @given(transducers(), points())
    def test_agreement_depth_preserved(self, t, x):
        y = Point.of(x.u + (1 - x.letter(len(x.u)),), x.v)
        assert agreement(t.apply(x), t.apply(y)) == agreement(x, y)


class TestModulus:
    def test_values(self):
        assert ODO.modulus(5) == 5
        assert Transducer.identity(2).modulus(4) == 4
        assert H.modulus(3) == 5

    def test_contracting_bound_is_sound(self):
        # pairs agreeing on 5 letters have images agreeing on 3
        for w in all_words(2, 5):
            for a, b in ((0, 1), (1, 0)):
                x, y = Point.of(w + (a,), (0,)), Point.of(w + (b,), (1,))
                assert (agreement(H.apply(x), H.apply(y)) or 99) >= 3

    @given(exchanges(), st.integers(0, 4))
    def test_exchange_modulus_sound(self, h, d):
        m = h.modulus(d)
        rng = random.Random(d)
        for _ in range(20):
            w = tuple(rng.randrange(2) for _ in range(m))
            x = Point.of(w, (rng.randrange(2), 1))
            y = Point.of(w, (rng.randrange(2), 0))
            a = agreement(h.apply(x), h.apply(y))
            assert a is None or a >= d


class TestValidation:
    def test_non_invertible_row(self):
        with pytest.raises(MachineError):
            Transducer.from_tables([[0, 0]], [[0, 0]])

    def test_incomplete_range_code(self):
        with pytest.raises(MachineError, match="range not a maximal antichain"):
            PrefixExchange.from_pairs([((0,), (0, 0)), ((1,), (0, 1))], 2)

    def test_incomplete_domain_code(self):
        with pytest.raises(MachineError, match="domain not a maximal antichain"):
            PrefixExchange.from_pairs([((0,), (0,)), ((1, 0), (1,))], 2)

    def test_schema_paths(self):
        with pytest.raises(SchemaError, match=r"machine\.lambda\[1\]"):
            machine_from_json({"type": "mealy", "delta": [[0, 1], [1, 1]], "lambda": [[0, 1], "x"]})
        with pytest.raises(SchemaError, match=r"machine\.type"):
            machine_from_json({"type": "turing"})


def test_catalog_generators_are_invertible():
    for name, s in catalog.catalog().items():
        for _, g in s.generators:
            pt = parse_point("01(011)")
            assert g.inverse.apply(g.apply(pt)) == pt, name


def test_fixed_points_are_fixed():
    rng = random.Random(3)
    for _ in range(20):
        t = random_transducer(rng)
        for x in t.fixed_points():
            assert t.apply(x) == x
    for x in H.fixed_points():
        assert H.apply(x) == x
