"""Exact point-to-convex-hull distance for small rational vertex sets.

The L1 distance from a query point ``p`` to ``conv(V)`` is the optimum of

    minimize   sum(u) + sum(v)
    subject to V^T w + u - v = p,  sum(w) = 1,  w, u, v >= 0.

The data are scaled to integers and the LP is solved by a fraction-free
(integer-preserving) simplex with Bland's rule, so the optimum is exact and
the result does not depend on floating-point rounding.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(float(x))


def hull_distance(vertices: Sequence[Sequence[int]], point: Sequence, scale: int = 4) -> Fraction:
    """Exact L1 distance from ``point`` to the hull of ``vertices / scale``.

    ``vertices`` are integer coordinate tuples (the true coordinates divided
    by ``scale``); ``point`` entries may be ints, floats or Fractions.
    """
    verts = [tuple(int(c) for c in v) for v in vertices]
    if not verts:
        raise ValueError("empty vertex list")
    d = len(verts[0])
    pt = [_as_fraction(x) for x in point]
    if len(pt) != d or any(len(v) != d for v in verts):
        raise ValueError(f"dimension mismatch: point has {len(pt)} entries, vertices have {d}")

    m = len(verts)
    big = lcm(*(f.denominator for f in pt))
    rhs = [scale * big * f.numerator // f.denominator for f in pt]

    # columns: w_0..w_{m-1}, u_0..u_{d-1}, v_0..v_{d-1}; w_0 starts basic in the sum row
    ncol = m + 2 * d
    rows: list[list[int]] = []
    b: list[int] = []
    basis: list[int] = []
    v0 = verts[0]
    for k in range(d):
        row = [0] * ncol
        for j in range(1, m):
            row[j] = verts[j][k] - v0[k]
        row[m + k] = 1
        row[m + d + k] = -1
        r = rhs[k] - v0[k] * big
        if r >= 0:
            basis.append(m + k)
        else:
            row = [-x for x in row]
            r = -r
            basis.append(m + d + k)
        rows.append(row)
        b.append(r)
    rows.append([1] * m + [0] * (2 * d))
    b.append(big)
    basis.append(0)

    cost = [0] * m + [1] * (2 * d)
    z = cost[:]
    zb = 0
    for i, bi in enumerate(basis):
        cb = cost[bi]
        if cb:
            z = [zj - cb * rij for zj, rij in zip(z, rows[i])]
            zb -= cb * b[i]

    denom = 1
    nrow = len(rows)
    while True:
        enter = next((j for j in range(ncol) if z[j] < 0), None)
        if enter is None:
            break
        leave = None
        for i in range(nrow):
            a = rows[i][enter]
            if a <= 0:
                continue
            if leave is None:
                leave = i
                continue
            # compare b[i]/a with b[leave]/a_leave; Bland tie-break on basic index
            lhs = b[i] * rows[leave][enter]
            rhs_ = b[leave] * a
            if lhs < rhs_ or (lhs == rhs_ and basis[i] < basis[leave]):
                leave = i
        if leave is None:  # pragma: no cover - objective is bounded below by zero
            raise RuntimeError("unbounded hull-distance LP")
        piv = rows[leave][enter]
        prow = rows[leave]
        pb = b[leave]
        for i in range(nrow):
            if i == leave:
                continue
            f = rows[i][enter]
            rows[i] = [(piv * x - f * y) // denom for x, y in zip(rows[i], prow)]
            b[i] = (piv * b[i] - f * pb) // denom
        f = z[enter]
        z = [(piv * x - f * y) // denom for x, y in zip(z, prow)]
        zb = (piv * zb - f * pb) // denom
        denom = piv
        basis[leave] = enter

    return Fraction(-zb, denom * scale * big)


def in_hull(vertices: Sequence[Sequence[int]], point: Sequence, tol=0, scale: int = 4) -> bool:
    """True when ``point`` lies within L1 distance ``tol`` of the hull."""
    return hull_distance(vertices, point, scale) <= _as_fraction(tol)
