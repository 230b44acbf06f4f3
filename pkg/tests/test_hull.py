import itertools
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from entpoly.hull import hull_distance, in_hull

CUBE = [tuple(4 * np.array(c)) for c in itertools.product((0, 1), repeat=3)]
SIMPLEX = [(0, 0, 0), (4, 0, 0), (0, 4, 0), (0, 0, 4)]


def l1_distance_scipy(vertices, point, scale=4):
    v = np.asarray(vertices, float) / scale
    m, d = v.shape
    a_eq = np.zeros((d + 1, m + 2 * d))
    a_eq[:d, :m] = v.T
    a_eq[:d, m:m + d] = np.eye(d)
    a_eq[:d, m + d:] = -np.eye(d)
    a_eq[d, :m] = 1
    c = np.r_[np.zeros(m), np.ones(2 * d)]
    return linprog(c, A_eq=a_eq, b_eq=np.r_[point, 1], bounds=(0, None), method="highs").fun


def test_vertices_and_interior_are_inside():
    for v in SIMPLEX:
        assert hull_distance(SIMPLEX, [Fraction(x, 4) for x in v]) == 0
    assert hull_distance(SIMPLEX, [Fraction(1, 4)] * 3) == 0


def test_exact_distance():
    # (1, 1, 1) is at L1 distance 2 from the unit simplex face x+y+z <= 1
    assert hull_distance(SIMPLEX, [1, 1, 1]) == 2
    assert hull_distance(CUBE, [Fraction(3, 2), Fraction(1, 2), -1]) == Fraction(3, 2)


def test_tolerance():
    p = [Fraction(1, 2), Fraction(1, 2), Fraction(1, 2) + Fraction(1, 10**10)]
    assert hull_distance(SIMPLEX, p) == Fraction(1, 2) + Fraction(1, 10**10)
    q = [1, 0, Fraction(1, 10**10)]
    assert not in_hull(SIMPLEX, q, tol=0)
    assert in_hull(SIMPLEX, q, tol=1e-9)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        hull_distance(SIMPLEX, [0, 0])


@pytest.mark.parametrize("seed", range(5))
def test_agrees_with_floating_lp(seed):
    rng = np.random.default_rng(seed)
    verts = [tuple(int(x) for x in rng.integers(0, 5, size=4)) for _ in range(9)]
    for p in rng.uniform(-0.25, 1.25, size=(60, 4)):
        exact = float(hull_distance(verts, p))
        assert exact == pytest.approx(l1_distance_scipy(verts, p), abs=1e-9)


def test_degenerate_vertex_sets():
    # repeated and collinear vertices must not break the pivoting
    verts = [(0, 0), (0, 0), (4, 4), (2, 2), (4, 4)]
    assert hull_distance(verts, [Fraction(1, 4), Fraction(1, 4)]) == 0
    assert hull_distance(verts, [1, 0]) == 1
