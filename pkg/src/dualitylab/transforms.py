"""Duality transforms on the exact piecewise-linear classes.

Three order transforms act on geometric functions (convex, lsc, f(0) = 0,
nondecreasing on [0, inf)):

* ``legendre`` - the convex conjugate sup_x (x*y - f(x)); order reversing.
* ``geometric_dual`` - the polar-type dual sup {(x*y - 1)/f(y) : 0 < f(y) < inf}
  with sup over the empty set equal to 0, +inf outside the polar interval of
  the zero set; order reversing.
* ``gauge_transform`` - the composition legendre(geometric_dual(f)); order
  preserving and involutive.

All three are exact: rational in, rational out, canonical representations.
``gauge_value`` evaluates the gauge transform pointwise straight from its
variational formula and serves as an independent cross-check.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Sequence, Tuple

from .exceptions import ClassTagError, ConsistencyError
from .pl import INF, ClassTag, Extended, PLConvex1D, as_fraction, is_inf

_F0 = Fraction(0)
_F1 = Fraction(1)

GAUGE_CHECK_POINTS = 64
GAUGE_CHECK_RTOL = 1e-6


def _require_geometric(f: PLConvex1D, op: str) -> None:
    if f.tag is not ClassTag.GEOMETRIC:
        raise ClassTagError(f"{op} requires a geometric function, got {f.tag.value}")


def legendre(f: PLConvex1D) -> PLConvex1D:
    """Convex conjugate g(y) = sup_x (x*y - f(x)), restricted to y >= 0.  Exact.

    On geometric functions the conjugate swaps knots and slopes: the chord
    slopes of f become the knot abscissae of g and vice versa, so the
    operation is an exact involution on canonical representations.
    """
    _require_geometric(f, "legendre")
    ys: List[Tuple[Fraction, Fraction]] = [(_F0, _F0)]
    for (xa, va), (xb, vb) in zip(f.knots, f.knots[1:]):
        s = (vb - va) / (xb - xa)
        if s > 0:
            ys.append((s, xa * s - va))
    m = f.tail_slope
    xk, vk = f.knots[-1]
    if is_inf(m):
        tail: Extended = xk
    else:
        if m > ys[-1][0]:
            ys.append((m, xk * m - vk))
        tail = INF
    return PLConvex1D(tuple(ys), tail, ClassTag.GEOMETRIC)


def _upper_envelope(
    lines: Sequence[Tuple[Fraction, Fraction]], end: Extended
) -> Tuple[Tuple[Tuple[Fraction, Fraction], ...], Extended]:
    """Pointwise max of affine lines (slope, intercept) on [0, end].

    Returns (knots, tail_slope) of the envelope; the domain is cut at a
    finite ``end`` (tail +inf), otherwise the steepest active line rules.
    """
    best = {}
    for s, b in lines:
        if s not in best or b > best[s]:
            best[s] = b
    ordered = sorted(best.items())

    hull: List[Tuple[Fraction, Fraction]] = []
    for s, b in ordered:
        while hull:
            s1, b1 = hull[-1]
            x_new = (b1 - b) / (s - s1)  # where the new line overtakes hull[-1]
            if len(hull) >= 2:
                s0, b0 = hull[-2]
                if x_new <= (b0 - b1) / (s1 - s0):
                    hull.pop()
                    continue
            break
        hull.append((s, b))

    breaks = [
        (hull[i][1] - hull[i + 1][1]) / (hull[i + 1][0] - hull[i][0])
        for i in range(len(hull) - 1)
    ]
    i0 = 0
    while i0 < len(breaks) and breaks[i0] <= 0:
        i0 += 1

    knots: List[Tuple[Fraction, Fraction]] = [(_F0, hull[i0][1])]
    active = i0
    for j in range(i0, len(breaks)):
        if not is_inf(end) and breaks[j] >= end:
            break
        s, b = hull[j]
        knots.append((breaks[j], s * breaks[j] + b))
        active = j + 1
    if is_inf(end):
        return tuple(knots), hull[-1][0]
    s, b = hull[active]
    knots.append((end, s * end + b))
    return tuple(knots), INF


def geometric_dual(f: PLConvex1D) -> PLConvex1D:
    """Polar-type dual (sup of (x*y - 1)/f(y) over 0 < f(y) < inf).  Exact.

    The result vanishes nowhere it shouldn't: it is +inf outside [0, 1/z0]
    where [0, z0] is the zero set of f, and on that interval equals the upper
    envelope of one affine function per knot with positive value (attained
    endpoints), one for the tail limit x / tail_slope, and the zero function
    (the sup-over-empty-set floor).  An exact involution.
    """
    _require_geometric(f, "geometric_dual")
    if f.is_zero:
        return PLConvex1D(((_F0, _F0),), INF, ClassTag.GEOMETRIC)
    z0 = f.zero_end()
    end: Extended = INF if z0 == 0 else _F1 / z0

    lines: List[Tuple[Fraction, Fraction]] = [(_F0, _F0)]
    for x, v in f.knots:
        if v > 0:
            lines.append((x / v, -_F1 / v))
    if not is_inf(f.tail_slope):
        lines.append((_F1 / f.tail_slope, _F0))

    knots, tail = _upper_envelope(lines, end)
    return PLConvex1D(knots, tail, ClassTag.GEOMETRIC)


def gauge_value(f: PLConvex1D, y) -> Extended:
    """Gauge transform evaluated pointwise from its variational formula.

    The value at y is y / sup{x in dom f : y * f(x) <= x} (so 0 when the sup
    is infinite and +inf when only x = 0 is feasible).  Independent of the
    legendre/geometric_dual composition; used as a consistency oracle.
    """
    _require_geometric(f, "gauge_value")
    y = as_fraction(y)
    if y < 0:
        raise ValueError("gauge_value requires y >= 0")
    if y == 0:
        return _F0

    # Feasible set {x : y*f(x) - x <= 0} is a closed interval containing 0;
    # scan the affine pieces of y*f(x) - x for the largest feasible x.
    x_sup = _F0
    for (xa, va), (xb, vb) in zip(f.knots, f.knots[1:]):
        s = (vb - va) / (xb - xa)
        c = y * s - 1
        d = y * (va - s * xa)
        if c <= 0:
            if c * xb + d <= 0:
                x_sup = max(x_sup, xb)
        else:
            r = -d / c
            if r >= xa:
                x_sup = max(x_sup, min(r, xb))
    if not is_inf(f.tail_slope):
        xk, vk = f.knots[-1]
        m = f.tail_slope
        c = y * m - 1
        d = y * (vk - m * xk)
        if c < 0 or (c == 0 and d <= 0):
            return _F0  # feasible for arbitrarily large x
        if c > 0:
            r = -d / c
            if r >= xk:
                x_sup = max(x_sup, r)
    if x_sup == 0:
        return INF
    return y / x_sup


def _check_abscissae(g: PLConvex1D) -> List[Fraction]:
    pos = [float(x) for x in g.xs if x > 0]
    if not is_inf(g.domain_end):
        hi = 2.0 * float(g.domain_end)
    else:
        hi = 2.0 * max(pos, default=1.0)
    if hi <= 0.0:  # domain is the single point {0}
        hi = 2.0
    lo = min(pos, default=hi) / 2.0
    lo = min(lo, hi / 4096.0)
    ratio = (hi / lo) ** (1.0 / (GAUGE_CHECK_POINTS - 1))
    return [Fraction(lo * ratio**i) for i in range(GAUGE_CHECK_POINTS)]


def gauge_transform(f: PLConvex1D, *, check: bool = True) -> PLConvex1D:
    """Gauge transform: legendre(geometric_dual(f)).  Exact, order preserving.

    With ``check`` on (the default), the result is sampled at
    ``GAUGE_CHECK_POINTS`` logarithmically spaced abscissae and compared with
    the variational formula (`gauge_value`) at relative tolerance
    ``GAUGE_CHECK_RTOL``; disagreement raises ConsistencyError.
    """
    g = legendre(geometric_dual(f))
    if check:
        for y in _check_abscissae(g):
            a, b = g(y), gauge_value(f, y)
            if a == b:
                continue
            if is_inf(a) != is_inf(b) or not math.isclose(
                float(a), float(b), rel_tol=GAUGE_CHECK_RTOL
            ):
                raise ConsistencyError(
                    f"gauge transform mismatch at y={float(y):.6g}: "
                    f"composition {a}, variational formula {b}"
                )
    return g


# -- 2-D sampled oracles ---------------------------------------------------


def _grid_geometric(f, op: str):
    from .grid import ensure_valid

    if f.tag is not ClassTag.GEOMETRIC:
        raise ClassTagError(f"{op} requires a geometric grid function")
    ensure_valid(f)


def legendre_grid(f, block: int = 256):
    """Brute-force conjugate on the lattice: g(q) = max over finite nodes p of
    <q, p> - f(p).  O(N^2 * N^2), blocked to bound memory."""
    import numpy as np

    from .grid import GridFunction2D

    _grid_geometric(f, "legendre_grid")
    pts, vals = f.finite_nodes()
    c = f.spec.coords
    gx, gy = np.meshgrid(c, c, indexing="ij")
    nodes = np.column_stack((gx.ravel(), gy.ravel()))
    out = np.empty(len(nodes))
    for i in range(0, len(nodes), block):
        q = nodes[i : i + block]
        out[i : i + block] = (q @ pts.T - vals).max(axis=1)
    return GridFunction2D(f.spec, out.reshape(f.spec.N, f.spec.N), ClassTag.GEOMETRIC)


def a_grid(f, block: int = 256):
    """Brute-force polar-type dual on the lattice.

    +inf outside the discrete polar of the zero set (pairwise <x, y> <= 1
    test), and on the polar the floored sup of (<x, y> - 1)/f(y) over nodes
    with finite positive value."""
    import numpy as np

    from .grid import GridFunction2D

    _grid_geometric(f, "a_grid")
    c = f.spec.coords
    gx, gy = np.meshgrid(c, c, indexing="ij")
    nodes = np.column_stack((gx.ravel(), gy.ravel()))
    tol = 1e-9 * (f.spec.R**2 + 1.0)

    zero_pts = nodes[(f.values == 0.0).ravel()]
    polar = np.ones(len(nodes), dtype=bool)
    for i in range(0, len(nodes), block):
        x = nodes[i : i + block]
        polar[i : i + block] = (x @ zero_pts.T <= 1.0 + tol).all(axis=1)

    pos_mask = np.isfinite(f.values) & (f.values > 0.0)
    idx = np.argwhere(pos_mask)
    out = np.full(len(nodes), np.inf)
    if idx.size:
        pts = np.column_stack((c[idx[:, 0]], c[idx[:, 1]]))
        vals = f.values[pos_mask]
        which = np.flatnonzero(polar)
        for i in range(0, len(which), block):
            sel = which[i : i + block]
            ratios = (nodes[sel] @ pts.T - 1.0) / vals
            out[sel] = np.maximum(ratios.max(axis=1), 0.0)
    else:
        out[polar] = 0.0
    return GridFunction2D(f.spec, out.reshape(f.spec.N, f.spec.N), ClassTag.GEOMETRIC)


def gauge_grid(f):
    """Sampled gauge transform: the composition legendre_grid(a_grid(f))."""
    return legendre_grid(a_grid(f))
