import random

from hypothesis import HealthCheck, settings, strategies as st

from cantordyn.cylinders import ClopenSet, Point
from cantordyn.homeos import PrefixExchange, Transducer

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def words(k=2, max_len=5):
    return st.lists(st.integers(0, k - 1), max_size=max_len).map(tuple)


def clopen_sets(k=2, max_len=5, max_words=6):
    return st.lists(words(k, max_len), max_size=max_words).map(lambda ws: ClopenSet.of(k, ws))


def points(k=2, max_u=4, max_v=3):
    return st.builds(Point.of, words(k, max_u),
                     st.lists(st.integers(0, k - 1), min_size=1, max_size=max_v).map(tuple))


def random_transducer(rng: random.Random, k=2, max_states=4) -> Transducer:
    n = rng.randint(1, max_states)
    delta = [[rng.randrange(n) for _ in range(k)] for _ in range(n)]
    lam = []
    for _ in range(n):
        row = list(range(k))
        rng.shuffle(row)
        lam.append(row)
    return Transducer.from_tables(delta, lam)


def random_code(rng: random.Random, size: int, k=2):
    leaves = [()]
    while len(leaves) < size:
        w = leaves.pop(rng.randrange(len(leaves)))
        leaves.extend(w + (a,) for a in range(k))
    return leaves


def random_exchange(rng: random.Random, k=2, max_pairs=6) -> PrefixExchange:
    # with k = 2 every split adds one leaf, so any size is reachable
    n = rng.randint(1, max_pairs)
    dom, ran = random_code(rng, n, k), random_code(rng, n, k)
    rng.shuffle(ran)
    return PrefixExchange.from_pairs(list(zip(dom, ran)), k)


@st.composite
def transducers(draw, k=2, max_states=4):
    return random_transducer(random.Random(draw(st.integers(0, 2**32))), k, max_states)


@st.composite
def exchanges(draw, k=2, max_pairs=6):
    return random_exchange(random.Random(draw(st.integers(0, 2**32))), k, max_pairs)
