import random
from fractions import Fraction

import pytest

from matchfair import make_instance


def fig1(c=10):
    return make_instance([[-1, -c], [0, -1]], agents=("i", "i'"), items=("j", "j'"))


def fig2():
    return make_instance([[-1, -2], [0, -1]], agents=("i", "i'"), items=("j", "j'"))


def t_alloc(t):
    t = Fraction(t)
    return ((1 - t, t), (t, 1 - t))


def random_unit_instance(rng, n, lo=-5, hi=5):
    return make_instance([[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)])


def random_allocation(rng, n, denom=12):
    """A random convex combination of permutation matrices."""
    weights = [rng.randint(0, denom) for _ in range(3)]
    if sum(weights) == 0:
        weights[0] = 1
    total = sum(weights)
    x = [[Fraction(0)] * n for _ in range(n)]
    for w in weights:
        perm = list(range(n))
        rng.shuffle(perm)
        for i, j in enumerate(perm):
            x[i][j] += Fraction(w, total)
    return tuple(tuple(r) for r in x)


@pytest.fixture
def rng():
    return random.Random(20261016)
