"""Exact calculus for piecewise-linear convex functions on the half-line.

A function is stored as its knot list ``(x_0, v_0), ..., (x_k, v_k)`` with
``x_0 = 0`` plus a tail slope governing ``x > x_k``.  A tail slope of ``+inf``
means the function jumps to ``+inf`` beyond ``x_k`` (bounded effective
domain).  All finite data is kept as `fractions.Fraction`, so every operation
in this module is exact and equality of canonical representations is literal
equality of the underlying functions.

Two classes are tagged:

* ``GEOMETRIC`` - convex, lower semicontinuous, ``f(0) = 0``, nondecreasing.
* ``NONNEGATIVE`` - convex, lower semicontinuous, values ``>= 0``; the value
  at 0 is unconstrained (half-line window of a nonnegative convex function).
"""

from __future__ import annotations

import enum
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from .exceptions import ClassTagError, ConvexityError, DomainError

INF = math.inf

Scalar = Union[int, float, Fraction, str]
#: A nonnegative rational, or +inf.
Extended = Union[Fraction, float]

_F0 = Fraction(0)


def as_fraction(x: Scalar) -> Fraction:
    """Convert to an exact Fraction.  Floats convert exactly (binary rationals)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            raise ValueError(f"not a finite number: {x!r}")
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def as_extended(x: Union[Scalar, float]) -> Extended:
    """Convert to a Fraction or +inf."""
    if isinstance(x, float) and math.isinf(x):
        if x < 0:
            raise ValueError("-inf is not an extended value")
        return INF
    if isinstance(x, str) and x.strip().lower() in ("inf", "+inf", "infinity"):
        return INF
    return as_fraction(x)


def is_inf(v: Extended) -> bool:
    return isinstance(v, float) and math.isinf(v)


class ClassTag(enum.Enum):
    GEOMETRIC = "geometric"
    NONNEGATIVE = "nonnegative"


def _slope(p: Tuple[Fraction, Fraction], q: Tuple[Fraction, Fraction]) -> Fraction:
    return (q[1] - p[1]) / (q[0] - p[0])


@dataclass(frozen=True)
class PLConvex1D:
    """Piecewise-linear convex function on [0, inf) with extended values.

    Instances canonicalize on construction: collinear knots are merged
    (including a last knot collinear with the tail ray), so two instances are
    equal as dataclasses iff they are equal as functions.

    Args:
        knots: ascending ``(x, v)`` pairs, ``x_0 = 0``, finite ``v >= 0``.
        tail_slope: slope beyond the last knot; ``math.inf`` ends the domain.
        tag: class of the function (GEOMETRIC by default).
    """

    knots: Tuple[Tuple[Fraction, Fraction], ...]
    tail_slope: Extended = INF
    tag: ClassTag = ClassTag.GEOMETRIC
    xs: Tuple[Fraction, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = [(as_fraction(x), as_fraction(v)) for x, v in self.knots]
        if not pts:
            raise ConvexityError("at least one knot is required")
        if pts[0][0] != 0:
            raise ConvexityError("the first knot must sit at x = 0")
        for (xa, _), (xb, _) in zip(pts, pts[1:]):
            if xb <= xa:
                raise ConvexityError("knot abscissae must be strictly increasing")
        for _, v in pts:
            if v < 0:
                raise ConvexityError("knot values must be nonnegative")
        tail = as_extended(self.tail_slope)
        if not is_inf(tail) and tail < 0:
            raise ConvexityError("tail slope must be nonnegative or +inf")

        # Merge collinear interior knots, then a last knot collinear with the tail.
        merged: list = [pts[0]]
        for p in pts[1:]:
            while len(merged) >= 2 and _slope(merged[-2], merged[-1]) == _slope(merged[-1], p):
                merged.pop()
            merged.append(p)
        if not is_inf(tail):
            while len(merged) >= 2 and _slope(merged[-2], merged[-1]) == tail:
                merged.pop()

        slopes = [_slope(a, b) for a, b in zip(merged, merged[1:])]
        for sa, sb in zip(slopes, slopes[1:]):
            if sa >= sb:
                raise ConvexityError("chord slopes must be strictly increasing")
        if slopes and not is_inf(tail) and tail <= slopes[-1]:
            raise ConvexityError("tail slope must exceed the last chord slope")

        if self.tag is ClassTag.GEOMETRIC:
            if merged[0][1] != 0:
                raise ConvexityError("geometric functions require f(0) = 0")
            first = slopes[0] if slopes else (tail if not is_inf(tail) else _F0)
            if first < 0:
                raise ConvexityError("geometric functions are nondecreasing")

        object.__setattr__(self, "knots", tuple(merged))
        object.__setattr__(self, "tail_slope", tail)
        object.__setattr__(self, "xs", tuple(x for x, _ in merged))

    # -- basic queries ---------------------------------------------------

    def __call__(self, x: Scalar) -> Extended:
        """Evaluate at x >= 0.  Returns a Fraction or +inf."""
        x = as_fraction(x)
        if x < 0:
            raise DomainError(f"negative abscissa: {x}")
        xs = self.xs
        if x > xs[-1]:
            if is_inf(self.tail_slope):
                return INF
            xk, vk = self.knots[-1]
            return vk + self.tail_slope * (x - xk)
        i = bisect_right(xs, x) - 1
        xk, vk = self.knots[i]
        if x == xk:
            return vk
        return vk + _slope(self.knots[i], self.knots[i + 1]) * (x - xk)

    @property
    def domain_end(self) -> Extended:
        """Right end of the effective domain (+inf if unbounded)."""
        return self.xs[-1] if is_inf(self.tail_slope) else INF

    @property
    def slopes(self) -> Tuple[Fraction, ...]:
        return tuple(_slope(a, b) for a, b in zip(self.knots, self.knots[1:]))

    @property
    def first_slope(self) -> Extended:
        """Right derivative at 0 (tail slope if there is a single knot)."""
        s = self.slopes
        return s[0] if s else self.tail_slope

    def zero_end(self) -> Extended:
        """Largest x with f(x) = 0, for geometric functions.

        The zero set of a geometric function is an interval [0, z0]; returns
        z0 (+inf for the zero function).
        """
        if self.tag is not ClassTag.GEOMETRIC:
            raise ClassTagError("zero_end applies to geometric functions")
        last = _F0
        for x, v in self.knots:
            if v == 0:
                last = x
            else:
                return last
        if is_inf(self.tail_slope):
            return last
        return last if self.tail_slope > 0 else INF

    # -- structural predicates -------------------------------------------

    @property
    def is_zero(self) -> bool:
        return len(self.knots) == 1 and self.knots[0][1] == 0 and self.tail_slope == 0

    @property
    def is_point_indicator(self) -> bool:
        """True for the indicator of {0} (0 at the origin, +inf elsewhere)."""
        return len(self.knots) == 1 and self.knots[0][1] == 0 and is_inf(self.tail_slope)

    @property
    def is_indicator(self) -> bool:
        """True iff the function takes no value in (0, inf)."""
        if any(v != 0 for _, v in self.knots):
            return False
        return is_inf(self.tail_slope) or self.tail_slope == 0

    @property
    def is_linear(self) -> bool:
        return len(self.knots) == 1 and self.knots[0][1] == 0 and not is_inf(self.tail_slope)


def _require_same_tag(f: PLConvex1D, g: PLConvex1D) -> ClassTag:
    if f.tag is not g.tag:
        raise ClassTagError(f"mixed class tags: {f.tag.value} vs {g.tag.value}")
    return f.tag


def sup2(f: PLConvex1D, g: PLConvex1D) -> PLConvex1D:
    """Pointwise maximum (the lattice join).  Exact.

    The effective domain is the intersection of the two domains.
    """
    tag = _require_same_tag(f, g)
    end = min(f.domain_end, g.domain_end)

    cand = {x for x in f.xs if x <= end} | {x for x in g.xs if x <= end}
    if not is_inf(end):
        cand.add(end)
    xs = sorted(cand)
    fv = [f(x) for x in xs]
    gv = [g(x) for x in xs]

    pts = []
    for i, x in enumerate(xs):
        pts.append((x, max(fv[i], gv[i])))
        if i + 1 < len(xs):
            d0 = fv[i] - gv[i]
            d1 = fv[i + 1] - gv[i + 1]
            if (d0 < 0 < d1) or (d1 < 0 < d0):
                xc = xs[i] + (xs[i + 1] - xs[i]) * d0 / (d0 - d1)
                pts.append((xc, f(xc)))

    if is_inf(end):
        # Both tails are finite rays here; insert their crossing if it lies
        # beyond the last candidate, then the steeper ray wins.
        mf, mg = f.tail_slope, g.tail_slope
        x_last = xs[-1]
        d_last = fv[-1] - gv[-1]
        ds = mf - mg
        if ds != 0 and d_last != 0 and (d_last < 0) == (ds > 0):
            xc = x_last - d_last / ds
            if xc > x_last:
                pts.append((xc, f(xc)))
        tail: Extended = max(mf, mg)
    else:
        tail = INF
    return PLConvex1D(tuple(pts), tail, tag)


def _lower_hull(pts: Sequence[Tuple[Fraction, Fraction]]) -> list:
    """Lower convex hull of 2-D points, as a left-to-right vertex chain."""
    best: dict = {}
    for x, v in pts:
        if x not in best or v < best[x]:
            best[x] = v
    ordered = sorted(best.items())
    hull: list = []
    for p in ordered:
        while len(hull) >= 2:
            (ox, ov), (ax, av) = hull[-2], hull[-1]
            # pop if the middle point is on or above segment (o, p)
            if (ax - ox) * (p[1] - ov) - (av - ov) * (p[0] - ox) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def hat_inf2(f: PLConvex1D, g: PLConvex1D) -> PLConvex1D:
    """Largest convex lsc minorant of min(f, g) (the lattice meet).  Exact.

    Computed as the lower convex hull of the union of knot sets, with the
    recession ray of slope min(tail_f, tail_g) folded in by an exact
    inf-convolution (trimming hull edges steeper than the ray).
    """
    tag = _require_same_tag(f, g)
    hull = _lower_hull(list(f.knots) + list(g.knots))

    tails = [m for m in (f.tail_slope, g.tail_slope) if not is_inf(m)]
    if tails:
        m = min(tails)
        while len(hull) >= 2 and _slope(hull[-2], hull[-1]) >= m:
            hull.pop()
        tail: Extended = m
    else:
        tail = INF
    return PLConvex1D(tuple(hull), tail, tag)


def leq_witness(f: PLConvex1D, g: PLConvex1D, factor: Scalar = 1) -> Optional[Fraction]:
    """Exact decision of ``f <= factor * g`` on [0, inf); returns a violating x or None.

    Conventions: where g = +inf the inequality holds for any factor; where g
    is finite and f = +inf it fails; factor never multiplies an infinity.
    """
    factor = as_fraction(factor)
    if factor <= 0:
        raise ValueError("factor must be positive")
    df, dg = f.domain_end, g.domain_end
    if df < dg:
        # f jumps to +inf strictly inside the region where g is finite
        return df + 1 if is_inf(dg) else df + (dg - df) / 2

    cand = {x for x in f.xs if x <= dg} | {x for x in g.xs if x <= dg}
    if not is_inf(dg):
        cand.add(dg)
    xs = sorted(cand)
    for x in xs:
        if f(x) > factor * g(x):
            return x
    if is_inf(dg):
        slope_gap = f.tail_slope - factor * g.tail_slope
        if slope_gap > 0:
            x_last = xs[-1]
            deficit = factor * g(x_last) - f(x_last)
            return x_last + deficit / slope_gap + 1
    return None


def leq(f: PLConvex1D, g: PLConvex1D, factor: Scalar = 1) -> bool:
    """True iff f(x) <= factor * g(x) for every x >= 0.  Exact."""
    return leq_witness(f, g, factor) is None


def scale(f: PLConvex1D, lam: Scalar) -> PLConvex1D:
    """Pointwise multiple ``lam * f`` for lam > 0.  Exact."""
    lam = as_fraction(lam)
    if lam <= 0:
        raise ValueError("scale factor must be positive")
    tail = INF if is_inf(f.tail_slope) else lam * f.tail_slope
    return PLConvex1D(tuple((x, lam * v) for x, v in f.knots), tail, f.tag)


def compose_dilate(f: PLConvex1D, alpha: Scalar) -> PLConvex1D:
    """Dilation ``x -> f(x / alpha)`` for alpha > 0.  Exact."""
    alpha = as_fraction(alpha)
    if alpha <= 0:
        raise ValueError("dilation factor must be positive")
    tail = INF if is_inf(f.tail_slope) else f.tail_slope / alpha
    return PLConvex1D(tuple((alpha * x, v) for x, v in f.knots), tail, f.tag)
