"""Finite corpora the stability harness certifies over.

The default geometric corpus holds indicators and linear rays with
parameters on a powers-of-two grid, plus the two order extremes (the zero
function and the indicator of {0}).  The grid is multiplicative, closed
under squaring up to its cap (so exponents can be recovered by dyadic
doubling), and its adjacent ratio 2 keeps every strictly-separated corpus
pair separated by at least the constants the harness certifies (which it
caps at 2).

Lattice designations list pairs whose join and meet are themselves corpus
members, as the lattice-stability checker requires: same-family pairs
(nested indicators, comparable rays) and any pair involving an extreme.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from .extremal import DeltaFunction, make_delta, make_indicator, make_linear
from .pl import INF, PLConvex1D

EXPONENT_GRID = (-16, -8, -4, -2, -1, 0, 1, 2, 4, 8, 16)
MAX_CERTIFIED_CTILDE = 2


@dataclass(frozen=True)
class Corpus:
    """Indexed family of functions with labels and designated lattice pairs.

    ``lattice_pairs`` holds (i, j, sup_index, inf_index): the corpus is
    closed under sup2/hat_inf2 for exactly these pairs.
    """

    elements: Tuple[object, ...]
    labels: Tuple[str, ...]
    description: str
    lattice_pairs: Tuple[Tuple[int, int, int, int], ...] = ()

    def __post_init__(self):
        if len(self.elements) != len(self.labels):
            raise ValueError("one label per element required")

    def __len__(self) -> int:
        return len(self.elements)

    def index_of(self, f) -> int:
        return self.elements.index(f)


def geometric_corpus(exponents: Sequence[int] = EXPONENT_GRID) -> Corpus:
    """Indicators and linear rays on the 2**j grid, plus both extremes."""
    elements = []
    labels = []
    zs = [Fraction(2) ** j for j in exponents]
    for j, z in zip(exponents, zs):
        elements.append(make_indicator(z))
        labels.append(f"indicator[0,2^{j}]")
    for j, a in zip(exponents, zs):
        elements.append(make_linear(a))
        labels.append(f"linear 2^{j}*x")
    zero_idx = len(elements)
    elements.append(make_indicator(INF))
    labels.append("zero")
    point_idx = len(elements)
    elements.append(make_indicator(0))
    labels.append("point{0}")

    n_ind = len(exponents)
    pairs = []
    # nested indicators: sup is the narrower, meet the wider
    for i in range(n_ind):
        for j in range(i + 1, n_ind):  # z_i < z_j
            pairs.append((i, j, i, j))
    # comparable rays: sup is the steeper, meet the flatter
    for i in range(n_ind):
        for j in range(i + 1, n_ind):
            a, b = n_ind + i, n_ind + j
            pairs.append((a, b, b, a))
    # extremes absorb: sup(0, f) = f, inf(0, f) = 0; sup(p, f) = p, inf(p, f) = f
    for i in range(len(elements)):
        if i != zero_idx:
            pairs.append((zero_idx, i, i, zero_idx))
        if i not in (zero_idx, point_idx):
            pairs.append((point_idx, i, point_idx, i))
    return Corpus(
        tuple(elements),
        tuple(labels),
        f"geometric powers-of-two corpus, exponents {tuple(exponents)}",
        tuple(pairs),
    )


DELTA_POINTS_1D = (0.0, 1.0, 2.0, 3.0)
DELTA_POINTS_2D = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (2.0, 1.0), (1.0, 2.0))
DELTA_VALUES = (0.0, 0.5, 1.0, 2.0)


def delta_corpus(
    points: Optional[Sequence] = None, values: Sequence[float] = DELTA_VALUES
) -> Corpus:
    """Pinned-point functions on a point/value grid (no lattice closure)."""
    if points is None:
        points = DELTA_POINTS_1D
    elements = []
    labels = []
    for theta in points:
        for c in values:
            elements.append(make_delta(theta, c))
            labels.append(f"delta(theta={theta}, c={c})")
    return Corpus(
        tuple(elements),
        tuple(labels),
        f"pinned-point corpus, {len(points)} points x {len(values)} values",
    )
