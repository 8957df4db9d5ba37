"""Shared oracles and generators for the test suite.

The oracles here recompute expected values by definitions only — dense
sup/inf scans and direct formula evaluation — never by calling the code
under test, so that transform results are checked against an independent
path.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from hypothesis import strategies as st

from dualitylab import INF, ClassTag, PLConvex1D


# ---------------------------------------------------------------------------
# random function generators (plain random.Random for corpus-style loops)


def random_geometric(
    rng: random.Random, max_knots: int = 12, allow_extremes: bool = True
) -> PLConvex1D:
    """Random canonical geometric function with at most max_knots knots."""
    if allow_extremes:
        roll = rng.random()
        if roll < 0.05:
            return PLConvex1D(((0, 0),), 0)  # zero function
        if roll < 0.10:
            return PLConvex1D(((0, 0),), INF)  # indicator of {0}
    n_seg = rng.randint(0, max_knots - 1)
    # strictly increasing nonnegative slopes
    slopes: List[Fraction] = []
    cur = Fraction(rng.randint(0, 3), rng.randint(1, 4))
    if rng.random() < 0.5:
        cur = Fraction(0)
    for _ in range(n_seg):
        slopes.append(cur)
        cur = cur + Fraction(rng.randint(1, 8), rng.randint(1, 8))
    knots = [(Fraction(0), Fraction(0))]
    x, v = Fraction(0), Fraction(0)
    for s in slopes:
        w = Fraction(rng.randint(1, 9), rng.randint(1, 4))
        x, v = x + w, v + s * w
        knots.append((x, v))
    if rng.random() < 0.3:
        tail: object = INF
    else:
        tail = cur if slopes else cur + Fraction(rng.randint(0, 4))
        if not slopes and tail == 0 and rng.random() < 0.5:
            tail = Fraction(rng.randint(1, 5), rng.randint(1, 3))
    return PLConvex1D(tuple(knots), tail)


def random_nonnegative(rng: random.Random, max_knots: int = 8) -> PLConvex1D:
    """Random canonical nonnegative convex function (may dip then rise)."""
    n_seg = rng.randint(0, max_knots - 1)
    slopes: List[Fraction] = []
    cur = Fraction(-rng.randint(0, 6), rng.randint(1, 3))
    for _ in range(n_seg):
        slopes.append(cur)
        cur = cur + Fraction(rng.randint(1, 7), rng.randint(1, 6))
    v0 = Fraction(rng.randint(0, 8), rng.randint(1, 3))
    knots = [(Fraction(0), v0)]
    x, v = Fraction(0), v0
    for s in slopes:
        w = Fraction(rng.randint(1, 8), rng.randint(1, 4))
        nx, nv = x + w, v + s * w
        if nv < 0:  # shrink the step to stay nonnegative
            w = (v - 0) / (-s) if s < 0 else w
            nx, nv = x + w, v + s * w
            if nv < 0 or w == 0:
                break
        x, v = nx, nv
        knots.append((x, v))
    tail = INF if rng.random() < 0.3 else max(cur, Fraction(0)) + Fraction(
        rng.randint(0, 3)
    )
    if tail != INF and knots[-1][0] > 0:
        last = (knots[-1][1] - knots[-2][1]) / (knots[-1][0] - knots[-2][0])
        if tail <= last:
            tail = last + 1
    return PLConvex1D(tuple(knots), tail, tag=ClassTag.NONNEGATIVE)


# ---------------------------------------------------------------------------
# dense numeric oracles


def sample_points(f: PLConvex1D, n: int = 60) -> List[Fraction]:
    """Abscissae spread over the effective domain plus its boundary."""
    end = f.domain_end
    hi = (end if not math.isinf(end) else (f.knots[-1][0] + 4)) or Fraction(2)
    pts = [Fraction(i, n) * hi for i in range(n + 1)]
    pts += [x for x, _ in f.knots]
    if not math.isinf(end):
        pts.append(Fraction(end))
    return sorted(set(pts))


def numeric_legendre(f: PLConvex1D, y: Fraction, n: int = 4000) -> Fraction:
    """sup_x (x*y - f(x)) by exact scan over knots and a dense grid.

    For piecewise-linear f the sup over each piece is at an endpoint, so
    scanning knots plus a far tail probe is exact for finite answers.
    """
    best = None
    xs = [x for x, _ in f.knots]
    end = f.domain_end
    if math.isinf(end):
        # beyond the last knot the objective is linear with slope y - tail
        if y > f.tail_slope:
            return INF
        xs.append(f.knots[-1][0] + 1)
    for x in xs:
        v = f(x)
        if math.isinf(v):
            continue
        cand = x * y - v
        best = cand if best is None else max(best, cand)
    return best


def numeric_dual(f: PLConvex1D, x: Fraction, n: int = 2000) -> Fraction:
    """sup over {y : f(y) > 0} of (x*y - 1)/f(y) by dense exact scan.

    The candidates are knots, dense fill, and the tail limit; exact Fraction
    arithmetic keeps the scan deterministic.  The zero set contributes the
    constraint x*y <= 1 (value 0 inside the polar, +inf outside).
    """
    z0 = f.zero_end()
    if math.isinf(z0):  # f is the zero function: dual is indicator of {0}
        return Fraction(0) if x == 0 else INF
    if z0 > 0 and x * z0 > 1:
        return INF
    best = Fraction(0)
    end = f.domain_end
    hi = end if not math.isinf(end) else f.knots[-1][0] + 64
    if hi <= z0:
        hi = z0 + 64 if math.isinf(end) else hi
    ys = [z0 + (hi - z0) * Fraction(i, n) for i in range(1, n + 1)]
    ys += [y for y, _ in f.knots if y > z0]
    if not math.isinf(end):
        ys.append(Fraction(end))
    for y in ys:
        fy = f(y)
        if math.isinf(fy) or fy <= 0:
            continue
        best = max(best, Fraction(x * y - 1, 1) / fy)
    if math.isinf(end) and f.tail_slope > 0:
        best = max(best, Fraction(x, 1) / f.tail_slope)
    return best


def numeric_gauge(f: PLConvex1D, y: Fraction, n: int = 4000) -> Fraction:
    """Parametric gauge value y / sup{x : y*f(x) <= x} by exact piece solve."""
    if y == 0:
        return Fraction(0)
    best: Optional[Fraction] = None  # sup of feasible x
    unbounded = False
    knots = f.knots
    for i, (x, v) in enumerate(knots):
        if y * v <= x:
            best = x if best is None else max(best, x)
        if i + 1 < len(knots):
            xa, va = knots[i]
            xb, vb = knots[i + 1]
            s = (vb - va) / (xb - xa)
            c = y * s - 1
            d = y * (va - s * xa)
            # solve c*x + d <= 0 on [xa, xb]
            if c < 0:
                if c * xb + d <= 0:
                    best = xb if best is None else max(best, xb)
                elif c * xa + d <= 0:
                    r = -d / c
                    best = r if best is None else max(best, r)
            elif c == 0:
                if d <= 0:
                    best = xb if best is None else max(best, xb)
            else:
                if c * xa + d <= 0:
                    r = min(xb, -d / c)
                    best = r if best is None else max(best, r)
    if not math.isinf(f.domain_end):
        pass
    else:
        xk, vk = knots[-1]
        m = f.tail_slope
        c = y * m - 1
        d = y * (vk - m * xk)
        if c < 0 or (c == 0 and d <= 0):
            unbounded = True
        elif c > 0:
            r = -d / c
            if r >= xk:
                best = r if best is None else max(best, r)
    if unbounded:
        return Fraction(0)
    if best is None or best == 0:
        return INF
    return Fraction(y, 1) / best


def assert_close(a, b, rtol=1e-9, atol=1e-12, msg=""):
    af, bf = float(a), float(b)
    if math.isinf(af) or math.isinf(bf):
        assert af == bf, f"{msg}: {a} vs {b}"
        return
    assert abs(af - bf) <= atol + rtol * max(abs(af), abs(bf)), (
        f"{msg}: {a} vs {b}"
    )


# ---------------------------------------------------------------------------
# hypothesis strategies


@st.composite
def geometric_functions(draw, max_knots: int = 12) -> PLConvex1D:
    seed = draw(st.integers(min_value=0, max_value=2**48))
    return random_geometric(random.Random(seed), max_knots=max_knots)


@st.composite
def nonnegative_functions(draw, max_knots: int = 8) -> PLConvex1D:
    seed = draw(st.integers(min_value=0, max_value=2**48))
    return random_nonnegative(random.Random(seed), max_knots=max_knots)
