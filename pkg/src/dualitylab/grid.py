"""Sampled extended-value convex functions on an origin-centered 2-D lattice.

A GridFunction2D holds an N x N array of values (float64, ``numpy.inf`` for
+infinity) over the nodes ``(coords[i], coords[j])`` with
``coords = linspace(-R, R, N)``; index order is ``values[ix, iy]``.  N is odd
so the origin is a node.  Validation checks discrete midpoint convexity along
the axis and diagonal directions with slack ``CONVEXITY_SLACK * (value scale
+ 1)``; an infinite node strictly between finite ones along any of those
directions also counts as a violation (lattice convexity of the finite
region, one-cell resolution).

The lattice meet ``hat_inf2_grid`` is the resampled lower convex envelope of
the epigraph point cloud (3-D lower hull; infinite nodes omitted; domain is
the hull's shadow).  ``ray_restrict`` turns the restriction to a lattice ray
into an exact 1-D PL function.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import (
    ClassTagError,
    DomainError,
    GridValidationError,
    LatticeMismatchError,
)
from .pl import INF, ClassTag, PLConvex1D, _lower_hull

CONVEXITY_SLACK = 1e-6
_GEOM_TOL = 1e-9

_DIRECTIONS = ((1, 0), (0, 1), (1, 1), (1, -1))


@dataclass(frozen=True)
class GridSpec:
    """Origin-centered square lattice: half-width R, N nodes per axis (odd)."""

    R: float
    N: int

    def __post_init__(self):
        if not (self.R > 0 and math.isfinite(self.R)):
            raise ValueError("half-width R must be positive and finite")
        if self.N < 3 or self.N % 2 == 0:
            raise ValueError("resolution N must be odd and >= 3")

    @property
    def step(self) -> float:
        return 2.0 * self.R / (self.N - 1)

    @property
    def coords(self) -> np.ndarray:
        return np.linspace(-self.R, self.R, self.N)

    @property
    def origin(self) -> int:
        return (self.N - 1) // 2


class GridFunction2D:
    """Immutable sampled function on a GridSpec lattice."""

    __slots__ = ("spec", "values", "tag")

    def __init__(self, spec: GridSpec, values, tag: ClassTag = ClassTag.GEOMETRIC):
        arr = np.array(values, dtype=float)
        if arr.shape != (spec.N, spec.N):
            raise GridValidationError(
                f"values must be {spec.N}x{spec.N}, got {arr.shape}"
            )
        if np.isnan(arr).any():
            raise GridValidationError("values must not contain NaN")
        if np.any(arr[np.isfinite(arr)] < 0) or np.any(np.isneginf(arr)):
            raise GridValidationError("values must be >= 0 (or +inf)")
        if tag is ClassTag.GEOMETRIC:
            o = spec.origin
            if arr[o, o] != 0.0:
                raise GridValidationError("geometric grids require value 0 at the origin")
        arr.setflags(write=False)
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "tag", tag)

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction2D is immutable")

    @classmethod
    def from_function(
        cls,
        fn: Callable[[float, float], float],
        R: float = 4.0,
        N: int = 129,
        tag: ClassTag = ClassTag.GEOMETRIC,
    ) -> "GridFunction2D":
        spec = GridSpec(R, N)
        c = spec.coords
        vals = np.array([[float(fn(x, y)) for y in c] for x in c])
        return cls(spec, vals, tag)

    def finite_nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        """(M x 2 coordinates, M values) of the finite nodes."""
        mask = np.isfinite(self.values)
        idx = np.argwhere(mask)
        c = self.spec.coords
        pts = np.column_stack((c[idx[:, 0]], c[idx[:, 1]]))
        return pts, self.values[mask]


def validate(g: GridFunction2D) -> List[str]:
    """Midpoint-convexity violations along axes and diagonals (with slack)."""
    v = g.values
    scale = 0.0
    finite = v[np.isfinite(v)]
    if finite.size:
        scale = float(np.max(np.abs(finite)))
    slack = CONVEXITY_SLACK * (scale + 1.0)

    out: List[str] = []
    for di, dj in _DIRECTIONS:
        center = v[abs(di) : v.shape[0] - abs(di) or None, abs(dj) : v.shape[1] - abs(dj) or None]
        before = v[
            abs(di) - di : v.shape[0] - abs(di) - di or None,
            abs(dj) - dj : v.shape[1] - abs(dj) - dj or None,
        ]
        after = v[
            abs(di) + di : v.shape[0] - abs(di) + di or None,
            abs(dj) + dj : v.shape[1] - abs(dj) + dj or None,
        ]
        avg = (before + after) / 2.0
        bad = ~(center <= avg + slack)
        for i, j in np.argwhere(bad):
            ii, jj = i + abs(di), j + abs(dj)
            out.append(
                f"midpoint convexity fails at node ({ii},{jj}) along ({di},{dj}): "
                f"value {center[i, j]}, neighbor average {avg[i, j]}"
            )
    return out


def ensure_valid(g: GridFunction2D) -> None:
    violations = validate(g)
    if violations:
        raise GridValidationError(
            f"{len(violations)} convexity violations (first: {violations[0]})",
            violations=tuple(violations),
        )


def _require_matching(f: GridFunction2D, g: GridFunction2D) -> None:
    if f.spec != g.spec:
        raise LatticeMismatchError(f"lattice mismatch: {f.spec} vs {g.spec}")
    if f.tag is not g.tag:
        raise ClassTagError(f"mixed class tags: {f.tag.value} vs {g.tag.value}")


def sup2_grid(f: GridFunction2D, g: GridFunction2D) -> GridFunction2D:
    """Pointwise maximum; re-validated."""
    _require_matching(f, g)
    out = GridFunction2D(f.spec, np.maximum(f.values, g.values), f.tag)
    ensure_valid(out)
    return out


def _envelope_from_cloud(
    spec: GridSpec, pts: np.ndarray, vals: np.ndarray
) -> np.ndarray:
    """Resample the lower convex envelope of epigraph points to the lattice."""
    from scipy.spatial import ConvexHull, QhullError

    n = spec.N
    out = np.full((n, n), np.inf)
    if len(vals) == 0:
        return out
    c = spec.coords
    gx, gy = np.meshgrid(c, c, indexing="ij")
    nodes = np.column_stack((gx.ravel(), gy.ravel()))
    tol = _GEOM_TOL * (spec.R + 1.0)

    centered = pts - pts.mean(axis=0)
    rank = np.linalg.matrix_rank(centered, tol=tol) if len(pts) > 1 else 0

    if rank == 0:
        # single location: the envelope is one pinned value
        d = np.abs(nodes - pts[0]).max(axis=1)
        on = d <= tol
        out.ravel()[np.flatnonzero(on)] = vals.min()
        return out

    if rank == 1:
        # all locations on one line: 1-D envelope along it
        direction = centered[np.argmax(np.abs(centered).sum(axis=1))]
        direction = direction / np.linalg.norm(direction)
        t = (pts - pts[0]) @ direction
        hull = _lower_hull([(Fraction(float(a)), Fraction(float(b))) for a, b in zip(t, vals)])
        hx = [float(x) for x, _ in hull]
        hv = [float(v) for _, v in hull]
        node_t = (nodes - pts[0]) @ direction
        perp = nodes - pts[0] - np.outer(node_t, direction)
        on = (np.abs(perp).max(axis=1) <= tol) & (node_t >= hx[0] - tol) & (node_t <= hx[-1] + tol)
        vals_on = np.interp(np.clip(node_t[on], hx[0], hx[-1]), hx, hv)
        out.ravel()[np.flatnonzero(on)] = vals_on
        return out

    cloud = np.column_stack((pts, vals))
    try:
        hull3 = ConvexHull(cloud)
        planes = []
        for eq in hull3.equations:  # a.x + b = 0, outward normal a
            if eq[2] < -tol:  # lower facet
                planes.append((-eq[0] / eq[2], -eq[1] / eq[2], -eq[3] / eq[2]))
        planes_arr = np.array(planes)
        env = (nodes @ planes_arr[:, :2].T + planes_arr[:, 2]).max(axis=1)
    except QhullError:
        # coplanar cloud: the envelope is the single affine interpolant
        A = np.column_stack((pts, np.ones(len(vals))))
        coef, *_ = np.linalg.lstsq(A, vals, rcond=None)
        env = nodes @ coef[:2] + coef[2]

    shadow = ConvexHull(pts)
    inside = np.all(
        nodes @ shadow.equations[:, :2].T + shadow.equations[:, 2] <= tol, axis=1
    )
    out.ravel()[np.flatnonzero(inside)] = env[inside]
    return out


def hat_inf2_grid(f: GridFunction2D, g: GridFunction2D) -> GridFunction2D:
    """Largest convex minorant of min(f, g), resampled to the lattice."""
    _require_matching(f, g)
    m = np.minimum(f.values, g.values)
    mask = np.isfinite(m)
    idx = np.argwhere(mask)
    c = f.spec.coords
    pts = np.column_stack((c[idx[:, 0]], c[idx[:, 1]]))
    out = GridFunction2D(f.spec, _envelope_from_cloud(f.spec, pts, m[mask]), f.tag)
    ensure_valid(out)
    return out


# -- lattice rays --------------------------------------------------------------


def _primitive_direction(u: Sequence[float]) -> Tuple[int, int]:
    """Snap a direction to a primitive integer lattice vector."""
    ux, uy = float(u[0]), float(u[1])
    norm = math.hypot(ux, uy)
    if norm == 0:
        raise DomainError("direction must be nonzero")
    best = None
    for q in range(1, 65):
        p0, p1 = ux / norm * q, uy / norm * q
        r0, r1 = round(p0), round(p1)
        if (r0, r1) != (0, 0) and abs(p0 - r0) < 1e-9 * q and abs(p1 - r1) < 1e-9 * q:
            g = math.gcd(abs(r0), abs(r1))
            best = (r0 // g, r1 // g)
            break
    if best is None:
        raise DomainError(f"direction {u!r} is not aligned with a lattice ray")
    return best


def ray_restrict(f: GridFunction2D, u: Sequence[float]) -> PLConvex1D:
    """Restriction t -> f(t * u/|u|) along a lattice ray, as an exact 1-D PL
    function of arc length.

    Nodes are walked outward from the origin until the window's edge or the
    first infinite node.  A walk that runs out of window while still finite
    extends with its last chord slope; one stopped by an infinite node ends
    its effective domain there.
    """
    p, q = _primitive_direction(u)
    spec = f.spec
    o = spec.origin
    step = spec.step * math.hypot(p, q)
    pts = []
    k = 0
    hit_edge = True
    while 0 <= o + k * p < spec.N and 0 <= o + k * q < spec.N:
        v = f.values[o + k * p, o + k * q]
        if not math.isfinite(v):
            hit_edge = False
            break
        pts.append((Fraction(k * step), Fraction(v)))
        k += 1
    if not pts:
        raise DomainError("ray has no finite value at the origin")
    hull = _lower_hull(pts)
    if hit_edge and len(hull) >= 2:
        (xa, va), (xb, vb) = hull[-2], hull[-1]
        tail = (vb - va) / (xb - xa)
    else:
        tail = INF
    return PLConvex1D(tuple(hull), tail, f.tag)


def is_ray_supported(f: GridFunction2D) -> Optional[Tuple[int, int]]:
    """The primitive direction whose ray carries every finite non-origin node,
    or None (no finite mass off the origin, or support off a single ray)."""
    o = f.spec.origin
    idx = np.argwhere(np.isfinite(f.values))
    offsets = [(i - o, j - o) for i, j in idx if (i, j) != (o, o)]
    if not offsets:
        return None
    di, dj = offsets[0]
    g = math.gcd(abs(di), abs(dj))
    p, q = di // g, dj // g
    for di, dj in offsets:
        t, rem = divmod(di, p) if p else divmod(dj, q)
        if rem or t <= 0 or (t * p, t * q) != (di, dj):
            return None
    return (p, q)


# -- CSV I/O -------------------------------------------------------------------


def write_grid_csv(f: GridFunction2D, path: str) -> None:
    """Header row ``R,N,tag`` then N rows of N values (x index = row)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([repr(f.spec.R), f.spec.N, f.tag.value])
        for row in f.values:
            w.writerow(["inf" if math.isinf(v) else repr(float(v)) for v in row])


def read_grid_csv(path: str) -> GridFunction2D:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) != 3:
        raise GridValidationError("grid CSV needs a header row: R,N,tag")
    try:
        R, N, tag = float(rows[0][0]), int(rows[0][1]), ClassTag(rows[0][2])
    except ValueError as exc:
        raise GridValidationError(f"bad grid CSV header: {exc}") from exc
    data = rows[1:]
    if len(data) != N:
        raise GridValidationError(f"expected {N} data rows, got {len(data)}")
    vals = [
        [math.inf if cell.strip() == "inf" else float(cell) for cell in row]
        for row in data
    ]
    return GridFunction2D(GridSpec(R, N), vals, tag)
