"""Three- and four-qubit entanglement polytopes.

Vertices are stored as integer tuples in units of 1/4, so ``(2, 2, 4, 4)``
is the point (1/2, 1/2, 1, 1). Membership is decided either from the vertex
list (exact LP, :func:`contains_lp`) or from an inequality system
``a . lambda <= b`` (:func:`facets`, :func:`derived_facets`).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from entpoly.hull import hull_distance

SCALE = 4
DEFAULT_TOL = 1e-9

_VARIANTS = {
    "P1": "abcd", "P2": "abcd", "P3": "abcdef", "P6": "abcdef",
    "P4": "", "P5": "", "P7": "", "GHZ3": "", "W3": "",
}


@dataclass(frozen=True)
class PolytopeId:
    family: str
    variant: str | None = None

    def __post_init__(self):
        if self.family not in _VARIANTS:
            raise ValueError(f"unknown polytope family {self.family!r}")
        allowed = _VARIANTS[self.family]
        if allowed and (self.variant is None or self.variant not in allowed):
            raise ValueError(f"{self.family} needs a variant letter in {{{', '.join(allowed)}}}")
        if not allowed and self.variant is not None:
            raise ValueError(f"{self.family} has no variants")

    def __str__(self):
        return self.family + (self.variant or "")

    @classmethod
    def parse(cls, text: str) -> "PolytopeId":
        m = re.fullmatch(r"(P[1-7]|GHZ3|W3)([a-f]?)", text.strip())
        if not m:
            raise ValueError(f"cannot parse polytope id {text!r}")
        return cls(m.group(1), m.group(2) or None)


@dataclass(frozen=True)
class Polytope:
    id: PolytopeId
    dimension: int
    vertices: tuple[tuple[int, ...], ...]  # quarters

    def vertex_fractions(self) -> list[tuple[Fraction, ...]]:
        return [tuple(Fraction(c, SCALE) for c in v) for v in self.vertices]


@dataclass(frozen=True)
class FacetSystem:
    """Inequalities ``a . lambda <= b`` with exact rational data."""

    inequalities: tuple[tuple[tuple[Fraction, ...], Fraction], ...]
    _arrays: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.array([[float(x) for x in row] for row, _ in self.inequalities])
        b = np.array([float(bound) for _, bound in self.inequalities])
        object.__setattr__(self, "_arrays", (a, b))

    @property
    def dimension(self) -> int:
        return len(self.inequalities[0][0])

    def slacks(self, points) -> np.ndarray:
        """``b - a . lambda`` per inequality; works on one point or a stack of points."""
        a, b = self._arrays
        return b - np.asarray(points, dtype=float) @ a.T

    def satisfied(self, points, tol: float = 1e-12):
        return np.all(self.slacks(points) >= -tol, axis=-1)

    def exact_slacks(self, point: Sequence) -> list[Fraction]:
        pt = [Fraction(x) for x in point]
        return [bound - sum(c * x for c, x in zip(row, pt)) for row, bound in self.inequalities]


# Four-qubit table, one row per polytope, vertices as printed.
_TABLE_4 = """
P1a: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1/2,1/2,1,1/2) (1/2,1,1/2,1/2) (1,1/2,1/2,1/2) (1/2,1/2,1/2,3/4)
P1b: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1/2,1/2,1,1/2) (1/2,1,1/2,1/2) (1,1/2,1/2,1/2) (1/2,1/2,3/4,1/2)
P1c: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1/2,1/2,1,1/2) (1/2,1,1/2,1/2) (1,1/2,1/2,1/2) (1/2,3/4,1/2,1/2)
P1d: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1/2,1/2,1,1/2) (1/2,1,1/2,1/2) (1,1/2,1/2,1/2) (3/4,1/2,1/2,1/2)
P2a: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1,1/2) (1/2,1,1/2,1/2) (1,1/2,1/2,1/2)
P2b: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1/2,1,1/2,1/2) (1,1/2,1/2,1/2)
P2c: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1/2,1/2,1,1/2) (1,1/2,1/2,1/2)
P2d: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1/2,1/2,1,1/2) (1/2,1,1/2,1/2)
P3a: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1,1/2,1/2) (1,1/2,1/2,1/2)
P3b: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1,1/2) (1,1/2,1/2,1/2)
P3c: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1,1/2) (1/2,1,1/2,1/2)
P3d: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1,1/2,1/2,1/2)
P3e: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1/2,1,1/2,1/2)
P3f: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1/2,1/2,1,1/2)
P4:  (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1/2)
P5:  (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2)
P6a: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1,1/2,1/2) (1,1/2,1/2,1/2) (1/2,1/2,1/2,1/2)
P6b: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1,1/2) (1,1/2,1/2,1/2) (1/2,1/2,1/2,1/2)
P6c: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1,1/2) (1/2,1,1/2,1/2) (1/2,1/2,1/2,1/2)
P6d: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1,1/2,1/2,1/2) (1/2,1/2,1/2,1/2)
P6e: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1/2,1,1/2,1/2) (1/2,1/2,1/2,1/2)
P6f: (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1/2,1/2,1,1/2) (1/2,1/2,1/2,1/2)
P7:  (1,1,1,1) (1/2,1/2,1,1) (1/2,1,1/2,1) (1/2,1,1,1/2) (1,1/2,1/2,1) (1,1/2,1,1/2) (1,1,1/2,1/2) (1/2,1/2,1/2,1) (1/2,1/2,1,1/2) (1/2,1,1/2,1/2) (1,1/2,1/2,1/2) (1/2,1/2,1/2,1/2)
"""

_TABLE_3 = """
GHZ3: (1/2,1/2,1/2) (1/2,1/2,1) (1/2,1,1/2) (1,1/2,1/2) (1,1,1)
W3:   (1,1,1) (1/2,1/2,1) (1/2,1,1/2) (1,1/2,1/2)
"""

# Hasse diagram (child, parent) of the containment order.
# P3/P6 variants are labelled by which of the four single-one vertices they
# keep; P2 variants by the single-one vertex they drop.
_SINGLES_OF = {
    "a": (2, 1), "b": (3, 1), "c": (3, 2), "d": (4, 1), "e": (4, 2), "f": (4, 3),
}
_P2_DROPS = {"a": 4, "b": 3, "c": 2, "d": 1}


def _lattice_edges_4() -> tuple[tuple[str, str], ...]:
    edges = [("P5", "P4")]
    for v in "abcdef":
        edges.append(("P5", "P3" + v))
        edges.append(("P4", "P6" + v))
        edges.append(("P3" + v, "P6" + v))
        edges.append(("P6" + v, "P7"))
        for w, dropped in _P2_DROPS.items():
            if dropped not in _SINGLES_OF[v]:
                edges.append(("P3" + v, "P2" + w))
    for w in "abcd":
        for u in "abcd":
            edges.append(("P2" + w, "P1" + u))
        edges.append(("P1" + w, "P7"))
    return tuple(edges)


LATTICE_EDGES = {4: _lattice_edges_4(), 3: (("W3", "GHZ3"),)}


def _parse_table(text: str) -> tuple[Polytope, ...]:
    out = []
    for line in text.strip().splitlines():
        name, body = line.split(":", 1)
        verts = []
        for tup in re.findall(r"\(([^)]*)\)", body):
            verts.append(tuple(int(Fraction(c) * SCALE) for c in tup.split(",")))
        out.append(Polytope(PolytopeId.parse(name), len(verts[0]), tuple(verts)))
    return tuple(out)


_CATALOG = {4: _parse_table(_TABLE_4), 3: _parse_table(_TABLE_3)}
_BY_ID = {str(p.id): p for dim in _CATALOG.values() for p in dim}


def catalog(dimension: int) -> tuple[Polytope, ...]:
    if dimension not in _CATALOG:
        raise ValueError(f"no catalog for dimension {dimension}; use 3 or 4")
    return _CATALOG[dimension]


def get(pid) -> Polytope:
    key = str(pid)
    if key not in _BY_ID:
        raise ValueError(f"unknown polytope {key!r}")
    return _BY_ID[key]


def _in_box(point: Sequence, tol) -> bool:
    lo = 0.5 - float(tol)
    hi = 1.0 + float(tol)
    return all(lo <= float(x) <= hi for x in point)


def contains_lp(polytope: Polytope, point: Sequence, tol=DEFAULT_TOL) -> bool:
    """Point-in-hull test over the vertex list.

    True when some convex combination of vertices lies within L1 distance
    ``tol`` of ``point``. Exact rational arithmetic; pass Fractions and
    ``tol=0`` for a strict test.
    """
    if len(point) != polytope.dimension:
        raise ValueError(f"point has {len(point)} entries, {polytope.id} is {polytope.dimension}-dimensional")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    if not _in_box(point, tol):
        return False
    return hull_distance(polytope.vertices, point, SCALE) <= Fraction(tol)


def _system(rows) -> FacetSystem:
    return FacetSystem(tuple((tuple(Fraction(c) for c in a), Fraction(b)) for a, b in rows))


def _box(d):
    rows = []
    for i in range(d):
        e = [0] * d
        e[i] = -1
        rows.append((e, Fraction(-1, 2)))
        e = [0] * d
        e[i] = 1
        rows.append((e, 1))
    return rows


def _polygon(d, bound, sign=1):
    """sign * (sum(lambda) - 2 lambda_i) <= sign * bound for every i."""
    rows = []
    for i in range(d):
        a = [sign] * d
        a[i] = -sign
        rows.append((a, sign * bound))
    return rows


@lru_cache(maxsize=None)
def facets(pid) -> FacetSystem:
    """Hand-stated inequality systems for P4, P7, GHZ3 and W3."""
    key = str(pid)
    if key == "P7":
        return _system(_box(4) + _polygon(4, 2))
    if key == "P4":
        return _system(_box(4) + _polygon(4, 2) + _polygon(4, 1, sign=-1))
    if key == "GHZ3":
        return _system(_box(3) + _polygon(3, 1))
    if key == "W3":
        return _system(_box(3) + _polygon(3, 1) + [([-1, -1, -1], -2)])
    raise ValueError(f"no stated facet system for {key!r}; supported: P4, P7, GHZ3, W3")


def _nullspace_vector(rows: list[list[Fraction]]) -> list[Fraction] | None:
    """A nonzero vector orthogonal to every row if the rows have corank one."""
    mat = [r[:] for r in rows]
    ncol = len(mat[0])
    pivots = []
    r = 0
    for c in range(ncol):
        p = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if p is None:
            continue
        mat[r], mat[p] = mat[p], mat[r]
        pv = mat[r][c]
        mat[r] = [x / pv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(ncol) if c not in pivots]
    if len(free) != 1:
        return None
    fc = free[0]
    vec = [Fraction(0)] * ncol
    vec[fc] = Fraction(1)
    for i, c in enumerate(pivots):
        vec[c] = -mat[i][fc]
    return vec


def _primitive(vec: list[Fraction]) -> tuple[int, ...]:
    den = 1
    for x in vec:
        den = den * x.denominator // np.gcd(den, x.denominator)
    ints = [int(x * den) for x in vec]
    g = 0
    for x in ints:
        g = int(np.gcd(g, abs(x)))
    return tuple(x // g for x in ints)


@lru_cache(maxsize=None)
def derived_facets(pid) -> FacetSystem:
    """Facet inequalities of a catalog polytope, enumerated exactly from its vertices.

    Brute force over vertex subsets; fine for the catalog's <= 12 vertices.
    """
    poly = get(pid)
    d = poly.dimension
    verts = [[Fraction(c) for c in v] for v in poly.vertices]
    found = set()
    for subset in itertools.combinations(range(len(verts)), d):
        normal = _nullspace_vector([verts[i] + [Fraction(-1)] for i in subset])
        if normal is None:
            continue
        vals = [sum(a * x for a, x in zip(normal[:d], v)) - normal[d] for v in verts]
        if all(x <= 0 for x in vals):
            found.add(_primitive(normal))
        elif all(x >= 0 for x in vals):
            found.add(_primitive([-x for x in normal]))
    rows = sorted(found)
    return FacetSystem(tuple(
        (tuple(Fraction(c) for c in r[:d]), Fraction(r[d], SCALE)) for r in rows
    ))


def f_value(point: Sequence[float], i: int = 1) -> float:
    """sum(lambda) - 2 lambda_i; the P4 family requires this to be >= 1."""
    if len(point) != 4:
        raise ValueError("f is defined on four-qubit spectra")
    if not 1 <= i <= 4:
        raise ValueError(f"negated index must be in [1, 4], got {i}")
    return sum(point) - 2 * point[i - 1]


def _order(dimension: int) -> dict[str, set[str]]:
    """Strict down-sets: for each id, every id strictly below it."""
    below: dict[str, set[str]] = {str(p.id): set() for p in catalog(dimension)}
    for child, parent in LATTICE_EDGES[dimension]:
        below[parent].add(child)
    changed = True
    while changed:
        changed = False
        for key, kids in below.items():
            extra = set().union(*(below[k] for k in kids)) - kids if kids else set()
            if extra:
                kids |= extra
                changed = True
    return below


@dataclass(frozen=True)
class Classification:
    spectra: tuple[float, ...]
    containing: tuple[PolytopeId, ...]
    minimal: tuple[PolytopeId, ...]


def classify(point: Sequence, tol=DEFAULT_TOL) -> Classification:
    """All catalog polytopes containing ``point`` and the lattice-minimal ones among them."""
    d = len(point)
    if d not in _CATALOG:
        raise ValueError(f"classification needs a 3- or 4-dimensional point, got {d}")
    inside = [p.id for p in catalog(d) if contains_lp(p, point, tol)]
    below = _order(d)
    names = {str(i) for i in inside}
    minimal = [i for i in inside if not (below[str(i)] & names)]
    return Classification(tuple(point), tuple(inside), tuple(minimal))


@dataclass
class LatticeReport:
    edges_checked: int = 0
    violations: list[tuple[str, str]] = field(default_factory=list)
    p5_below_all: bool = True
    unlisted_containments: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and self.p5_below_all and not self.unlisted_containments


def is_subpolytope(child: Polytope, parent: Polytope) -> bool:
    return all(hull_distance(parent.vertices, v, SCALE) == 0 for v in child.vertex_fractions())


def verify_lattice() -> LatticeReport:
    """Re-prove the containment lattice with exact LPs.

    Checks every listed edge, that P5 sits inside every other four-qubit
    polytope, and that no containment holds outside the transitive closure
    of the listed edges.
    """
    report = LatticeReport()
    for dim in (3, 4):
        for child, parent in LATTICE_EDGES[dim]:
            report.edges_checked += 1
            if not is_subpolytope(get(child), get(parent)):
                report.violations.append((child, parent))
        below = _order(dim)
        for a, b in itertools.permutations([str(p.id) for p in catalog(dim)], 2):
            if a not in below[b] and is_subpolytope(get(a), get(b)):
                report.unlisted_containments.append((a, b))
    p5 = get("P5")
    report.p5_below_all = all(is_subpolytope(p5, p) for p in catalog(4))
    return report


def _fraction_text(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def catalog_to_document(dimensions=(3, 4)) -> list[dict]:
    return [
        {
            "id": str(p.id),
            "dimension": p.dimension,
            "vertices": [[_fraction_text(c) for c in v] for v in p.vertex_fractions()],
        }
        for dim in dimensions
        for p in catalog(dim)
    ]


def catalog_from_document(doc: list[dict]) -> tuple[Polytope, ...]:
    out = []
    for entry in doc:
        verts = tuple(tuple(int(Fraction(c) * SCALE) for c in v) for v in entry["vertices"])
        out.append(Polytope(PolytopeId.parse(entry["id"]), int(entry["dimension"]), verts))
    return tuple(out)
