"""Stability harness: certify almost order preservation/reversal on corpora.

A *corpus transform* is a finite mapping from corpus elements to images.
The checkers certify, pair by pair and exactly, the two-sided conditions

  (preserving)  f <= g       implies  Tf <= C*Tg
                f <= (1/C)*g implies  Tf <= Tg

  (reversing)   f <= g       implies  Tf >= (1/C)*Tg
                f <= (1/C)*g implies  Tf >= Tg

at a constant C > 1, together with the inverse implications, lattice
stability on designated join/meet pairs, and exact fixing of the order
extremes.  Certified transforms are then classified (identity-like vs
gauge-like, or their order-reversing counterparts after composing with the
geometric dual), their dilation exponent is recovered by dyadic doubling,
and a two-sided sandwich c*ref <= Tf <= C*ref is fitted with an exact
certificate.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .corpus import Corpus, geometric_corpus
from .exceptions import (
    ClassificationError,
    ConsistencyError,
    CorpusError,
    HypothesisViolationError,
)
from .extremal import (
    DeltaFunction,
    almost_linear_bounds,
    delta_leq,
    quasi_linear_sandwich,
)
from .grid import GridFunction2D, is_ray_supported
from .pl import (
    INF,
    PLConvex1D,
    as_fraction,
    compose_dilate,
    hat_inf2,
    is_inf,
    leq,
    leq_witness,
    scale,
    sup2,
)
from .transforms import gauge_transform, geometric_dual, legendre

__all__ = [
    "AlmostOrderConstant",
    "TransformClass",
    "Violation",
    "CorpusTransform",
    "StabilityReport",
    "DeltaStructureReport",
    "RayMappingReport",
    "check_almost_preserving",
    "check_almost_reversing",
    "check_inverse_conditions",
    "check_lattice_stability",
    "check_extremes",
    "classify",
    "estimate_exponent",
    "hyers_ulam_approx",
    "fit_sandwich",
    "fuzz_transform",
    "fuzz_delta_transform",
    "check_delta_structure",
    "verify_ray_mapping",
    "analyze",
]

SANDWICH_FLAG_POWER = 10
SANDWICH_REGIME_POWER = 7
_JITTER_MARGIN = 1e-9


@dataclass(frozen=True)
class AlmostOrderConstant:
    """The constant C > 1 of the almost-order conditions, kept exact.

    The reciprocal c = 1/C is derived, so c*C == 1 holds exactly.
    """

    ctilde: Fraction

    def __post_init__(self):
        object.__setattr__(self, "ctilde", as_fraction(self.ctilde))
        if self.ctilde <= 1:
            raise ValueError("almost-order constant must exceed 1")

    @property
    def reciprocal(self) -> Fraction:
        return 1 / self.ctilde

    def power(self, n: int) -> Fraction:
        return self.ctilde**n


class TransformClass(enum.Enum):
    IDENTITY = "identity"
    GAUGE = "gauge"
    REVERSING_LEGENDRE = "reversing-legendre"
    REVERSING_GEOMETRIC_DUAL = "reversing-geometric-dual"
    INCONSISTENT = "inconsistent"


@dataclass(frozen=True)
class Violation:
    """A failed condition, with the pair of labels and a witnessing point."""

    condition: str
    f_label: str
    g_label: str = ""
    witness: object = None
    detail: str = ""


@dataclass(frozen=True)
class CorpusTransform:
    """Finite transform: corpus element i maps to images[i]."""

    corpus: Corpus
    images: Tuple[object, ...]
    provenance: str = ""

    def __post_init__(self):
        if len(self.images) != len(self.corpus):
            raise ValueError("one image per corpus element required")

    def __len__(self) -> int:
        return len(self.corpus)

    def image(self, i: int):
        return self.images[i]


@dataclass(frozen=True)
class StabilityReport:
    classification: TransformClass
    ctilde: float
    violations: Tuple[Violation, ...] = ()
    phi_samples: Tuple[Tuple[float, float], ...] = ()
    slope_samples: Tuple[Tuple[float, float], ...] = ()
    alpha: Optional[float] = None
    sandwich_lower: Optional[float] = None
    sandwich_upper: Optional[float] = None
    gamma: Optional[float] = None
    exponent_deviation: Optional[float] = None
    sandwich_flagged: Optional[bool] = None
    within_regime: Optional[bool] = None
    diagnostics: Tuple[str, ...] = ()
    provenance: str = ""

    def __post_init__(self):
        if (
            self.sandwich_lower is not None
            and self.sandwich_upper is not None
            and not self.sandwich_lower <= self.sandwich_upper
        ):
            raise ValueError("sandwich constants must satisfy lower <= upper")

    @property
    def certified(self) -> bool:
        return not self.violations and self.classification is not TransformClass.INCONSISTENT


@dataclass(frozen=True)
class DeltaStructureReport:
    is_delta_structure: bool
    point_matrix: Optional[object] = None
    point_offset: Optional[object] = None
    point_residual: Optional[float] = None
    flagged_nonaffine: Optional[bool] = None
    beta: Optional[float] = None
    value_ratio_bound: Optional[float] = None
    psi_ok: Optional[bool] = None
    violations: Tuple[Violation, ...] = ()


@dataclass(frozen=True)
class RayMappingReport:
    direction_map: Tuple[Tuple[Tuple[int, int], Tuple[int, int]], ...]
    matrix: Optional[Tuple[Tuple[float, float], Tuple[float, float]]]
    residual: Optional[float]
    violations: Tuple[Violation, ...] = ()


# ---------------------------------------------------------------------------
# pointwise comparison dispatch


def _leq_any(f, g, factor=1) -> Tuple[bool, object]:
    """Whether f <= factor*g pointwise; on failure also a witnessing point."""
    if isinstance(f, PLConvex1D) and isinstance(g, PLConvex1D):
        w = leq_witness(f, g, factor)
        return (w is None), (None if w is None else float(w))
    if isinstance(f, DeltaFunction) and isinstance(g, DeltaFunction):
        if delta_leq(f, g, float(factor)):
            return True, None
        return False, g.theta
    if isinstance(f, GridFunction2D) and isinstance(g, GridFunction2D):
        if f.spec != g.spec:
            raise CorpusError("grid elements must share one lattice")
        with np.errstate(invalid="ignore"):
            bad = f.values > float(factor) * g.values
        if not bad.any():
            return True, None
        ix, iy = np.argwhere(bad)[0]
        cs = f.spec.coords
        return False, (float(cs[ix]), float(cs[iy]))
    raise CorpusError(
        f"cannot compare {type(f).__name__} with {type(g).__name__}"
    )


def _pairs(t: CorpusTransform):
    n = len(t)
    for i in range(n):
        for j in range(n):
            if i != j:
                yield i, j


# ---------------------------------------------------------------------------
# condition checkers


def check_almost_preserving(
    t: CorpusTransform, k: AlmostOrderConstant
) -> Tuple[Violation, ...]:
    """Certify both preserving conditions on every ordered corpus pair."""
    els, imgs, labels = t.corpus.elements, t.images, t.corpus.labels
    out: List[Violation] = []
    for i, j in _pairs(t):
        plain, _ = _leq_any(els[i], els[j])
        if plain:
            ok, w = _leq_any(imgs[i], imgs[j], k.ctilde)
            if not ok:
                out.append(
                    Violation("preserving-a", labels[i], labels[j], w,
                              "f <= g but not Tf <= C*Tg")
                )
        strict, _ = _leq_any(els[i], els[j], k.reciprocal)
        if strict:
            ok, w = _leq_any(imgs[i], imgs[j])
            if not ok:
                out.append(
                    Violation("preserving-b", labels[i], labels[j], w,
                              "f <= (1/C)*g but not Tf <= Tg")
                )
    return tuple(out)


def check_almost_reversing(
    t: CorpusTransform, k: AlmostOrderConstant
) -> Tuple[Violation, ...]:
    """Certify both reversing conditions on every ordered corpus pair."""
    els, imgs, labels = t.corpus.elements, t.images, t.corpus.labels
    out: List[Violation] = []
    for i, j in _pairs(t):
        plain, _ = _leq_any(els[i], els[j])
        if plain:
            # Tf >= (1/C)*Tg, i.e. Tg <= C*Tf
            ok, w = _leq_any(imgs[j], imgs[i], k.ctilde)
            if not ok:
                out.append(
                    Violation("reversing-a", labels[i], labels[j], w,
                              "f <= g but not Tf >= (1/C)*Tg")
                )
        strict, _ = _leq_any(els[i], els[j], k.reciprocal)
        if strict:
            ok, w = _leq_any(imgs[j], imgs[i])
            if not ok:
                out.append(
                    Violation("reversing-b", labels[i], labels[j], w,
                              "f <= (1/C)*g but not Tf >= Tg")
                )
    return tuple(out)


def check_inverse_conditions(
    t: CorpusTransform, k: AlmostOrderConstant
) -> Tuple[Violation, ...]:
    """Certify the converse implications of the preserving conditions."""
    els, imgs, labels = t.corpus.elements, t.images, t.corpus.labels
    out: List[Violation] = []
    for i, j in _pairs(t):
        plain, _ = _leq_any(imgs[i], imgs[j])
        if plain:
            ok, w = _leq_any(els[i], els[j], k.ctilde)
            if not ok:
                out.append(
                    Violation("inverse-a", labels[i], labels[j], w,
                              "Tf <= Tg but not f <= C*g")
                )
        strict, _ = _leq_any(imgs[i], imgs[j], k.reciprocal)
        if strict:
            ok, w = _leq_any(els[i], els[j])
            if not ok:
                out.append(
                    Violation("inverse-b", labels[i], labels[j], w,
                              "Tf <= (1/C)*Tg but not f <= g")
                )
    return tuple(out)


def _sup_any(f, g):
    if isinstance(f, PLConvex1D):
        return sup2(f, g)
    from .grid import sup2_grid

    return sup2_grid(f, g)


def _inf_any(f, g):
    if isinstance(f, PLConvex1D):
        return hat_inf2(f, g)
    from .grid import hat_inf2_grid

    return hat_inf2_grid(f, g)


def check_lattice_stability(
    t: CorpusTransform, k: AlmostOrderConstant
) -> Tuple[Violation, ...]:
    """Certify the join/meet chains on the corpus's designated pairs.

    Requires the corpus to be closed under sup2/hat_inf2 for each designated
    pair; a wrong designation is a configuration error, not a violation.
    """
    els, imgs, labels = t.corpus.elements, t.images, t.corpus.labels
    out: List[Violation] = []
    for i, j, i_sup, i_inf in t.corpus.lattice_pairs:
        f, g = els[i], els[j]
        if _sup_any(f, g) != els[i_sup] or _inf_any(f, g) != els[i_inf]:
            raise CorpusError(
                f"designated lattice pair ({labels[i]}, {labels[j]}) is not "
                "closed in the corpus"
            )
        sup_img = _sup_any(imgs[i], imgs[j])
        inf_img = _inf_any(imgs[i], imgs[j])
        t_sup, t_inf = imgs[i_sup], imgs[i_inf]
        # (1/C^2) T(sup) <= sup(Tf, Tg) <= C T(sup)
        ok, w = _leq_any(t_sup, sup_img, k.power(2))
        if not ok:
            out.append(Violation("lattice-sup-lower", labels[i], labels[j], w,
                                 "T(sup) > C^2 * sup(Tf, Tg)"))
        ok, w = _leq_any(sup_img, t_sup, k.ctilde)
        if not ok:
            out.append(Violation("lattice-sup-upper", labels[i], labels[j], w,
                                 "sup(Tf, Tg) > C * T(sup)"))
        # (1/C) T(inf) <= inf(Tf, Tg) <= C^2 T(inf)
        ok, w = _leq_any(t_inf, inf_img, k.ctilde)
        if not ok:
            out.append(Violation("lattice-inf-lower", labels[i], labels[j], w,
                                 "T(inf) > C * inf(Tf, Tg)"))
        ok, w = _leq_any(inf_img, t_inf, k.power(2))
        if not ok:
            out.append(Violation("lattice-inf-upper", labels[i], labels[j], w,
                                 "inf(Tf, Tg) > C^2 * T(inf)"))
    return tuple(out)


def check_extremes(t: CorpusTransform) -> Tuple[Violation, ...]:
    """The zero function and the indicator of {0} must map to themselves."""
    out: List[Violation] = []
    seen_zero = seen_point = False
    for f, img, label in zip(t.corpus.elements, t.images, t.corpus.labels):
        if not isinstance(f, PLConvex1D):
            continue
        if f.is_zero:
            seen_zero = True
            if img != f:
                out.append(Violation("extreme-zero", label, "", None,
                                     "image of the zero function differs from it"))
        elif f.is_point_indicator:
            seen_point = True
            if img != f:
                out.append(Violation("extreme-point", label, "", None,
                                     "image of the indicator of {0} differs from it"))
    if not (seen_zero and seen_point):
        raise CorpusError("corpus lacks the order extremes")
    return tuple(out)


# ---------------------------------------------------------------------------
# classification


def _proper_indicator(f: PLConvex1D) -> bool:
    return f.is_indicator and not is_inf(f.domain_end) and f.domain_end > 0


def _positive_linear(f: PLConvex1D) -> bool:
    return f.is_linear and not is_inf(f.first_slope) and f.first_slope > 0


def _image_kind(img: PLConvex1D, k: AlmostOrderConstant) -> str:
    if img.is_indicator:
        if not is_inf(img.domain_end) and img.domain_end > 0:
            return "indicator"
        return "other"
    if almost_linear_bounds(img, k.ctilde):
        return "almost-linear"
    return "other"


def classify(
    t: CorpusTransform,
    k: AlmostOrderConstant,
    sense: Optional[str] = None,
) -> StabilityReport:
    """Decide identity-like vs gauge-like from the indicator/ray images.

    ``sense`` is "preserving" or "reversing"; when omitted both condition
    checkers run and pick it.  A reversing transform is classified after
    composing with the geometric dual on the left (the composition is order
    preserving, and by homogeneity the per-element scalings survive as their
    reciprocals): a gauge-like composition names a Legendre-like original,
    an identity-like composition names a dual-like original.
    """
    els = t.corpus.elements
    if not all(isinstance(f, PLConvex1D) for f in els):
        raise CorpusError("classification requires a corpus of 1-d functions")
    ind = [i for i, f in enumerate(els) if _proper_indicator(f)]
    lin = [i for i, f in enumerate(els) if _positive_linear(f)]
    if len(ind) < 2 or len(lin) < 2:
        raise CorpusError(
            "classification needs at least two indicators and two rays"
        )

    diagnostics: List[str] = []
    if sense is None:
        if not check_almost_preserving(t, k):
            sense = "preserving"
        elif not check_almost_reversing(t, k):
            sense = "reversing"
        else:
            return StabilityReport(
                classification=TransformClass.INCONSISTENT,
                ctilde=float(k.ctilde),
                violations=(Violation(
                    "classification", "", "", None,
                    "neither order condition holds on the corpus"),),
                provenance=t.provenance,
            )
    if sense not in ("preserving", "reversing"):
        raise ValueError("sense must be 'preserving' or 'reversing'")

    imgs = list(t.images)
    if sense == "reversing":
        imgs = [geometric_dual(img) for img in imgs]
        diagnostics.append(
            "samples describe the order-preserving composition with the "
            "geometric dual"
        )

    kinds = {i: _image_kind(imgs[i], k) for i in ind}
    labels = t.corpus.labels
    violations: List[Violation] = []
    n_ind = sum(1 for v in kinds.values() if v == "indicator")
    n_lin = sum(1 for v in kinds.values() if v == "almost-linear")
    if n_ind == len(ind):
        base = TransformClass.IDENTITY
    elif n_lin == len(ind):
        base = TransformClass.GAUGE
    else:
        i_bad = next(i for i in ind if kinds[i] == "other") if (
            n_ind + n_lin < len(ind)
        ) else None
        if i_bad is not None:
            violations.append(Violation(
                "classification", labels[i_bad], "", None,
                "indicator image is neither an indicator nor almost linear"))
        else:
            i_a = next(i for i in ind if kinds[i] == "indicator")
            i_b = next(i for i in ind if kinds[i] == "almost-linear")
            violations.append(Violation(
                "classification", labels[i_a], labels[i_b], None,
                "indicator images mix both structural kinds"))
        return StabilityReport(
            classification=TransformClass.INCONSISTENT,
            ctilde=float(k.ctilde),
            violations=tuple(violations),
            diagnostics=tuple(diagnostics),
            provenance=t.provenance,
        )

    phi: List[Tuple[float, float]] = []
    for i in ind:
        z = float(els[i].domain_end)
        if base is TransformClass.IDENTITY:
            phi.append((z, float(imgs[i].domain_end)))
        else:
            phi.append((z, float(imgs[i].first_slope)))
    phi.sort()

    expect = "almost-linear" if base is TransformClass.IDENTITY else "indicator"
    slope_samples: List[Tuple[float, float]] = []
    for i in lin:
        kind = _image_kind(imgs[i], k)
        if kind != expect:
            violations.append(Violation(
                "classification", labels[i], "", None,
                f"ray image should be {expect} for this class, got {kind}"))
            continue
        a = float(els[i].first_slope)
        if base is TransformClass.IDENTITY:
            slope_samples.append((a, float(imgs[i].first_slope)))
        else:
            slope_samples.append((a, float(imgs[i].domain_end)))
    slope_samples.sort()
    if violations:
        return StabilityReport(
            classification=TransformClass.INCONSISTENT,
            ctilde=float(k.ctilde),
            violations=tuple(violations),
            phi_samples=tuple(phi),
            slope_samples=tuple(slope_samples),
            diagnostics=tuple(diagnostics),
            provenance=t.provenance,
        )

    if sense == "reversing":
        label = (
            TransformClass.REVERSING_GEOMETRIC_DUAL
            if base is TransformClass.IDENTITY
            else TransformClass.REVERSING_LEGENDRE
        )
    else:
        label = base
    return StabilityReport(
        classification=label,
        ctilde=float(k.ctilde),
        phi_samples=tuple(phi),
        slope_samples=tuple(slope_samples),
        diagnostics=tuple(diagnostics),
        provenance=t.provenance,
    )


# ---------------------------------------------------------------------------
# exponent recovery and additive approximation


def estimate_exponent(
    samples: Union[Mapping[float, float], Sequence[Tuple[float, float]]],
    tolerance: float = 1e-6,
) -> Tuple[float, float]:
    """Recover the power-law exponent of positive samples z -> phi(z).

    The abscissae must sit on a multiplicative grid (integer powers of the
    smallest one above 1) closed under squaring up to a cap.  With
    h(s) = log phi(exp(s)) the estimate is the dyadic-doubling slope
    h(2^n s0)/(2^n s0) at the largest in-range n; an exact power law is
    therefore recovered exactly, and multiplicative noise decays like the
    reciprocal of the cap.  Returns (gamma, sup deviation |h - gamma*s|).
    """
    if isinstance(samples, Mapping):
        pairs = sorted(samples.items())
    else:
        pairs = sorted(samples)
    if len(pairs) < 2:
        raise ValueError("need at least two samples")
    hs = []
    for z, p in pairs:
        z, p = float(z), float(p)
        if not (z > 0 and p > 0) or math.isinf(z) or math.isinf(p):
            raise ValueError("samples must be positive and finite")
        hs.append((math.log(z), math.log(p)))
    nonzero = [abs(s) for s, _ in hs if abs(s) > tolerance]
    if not nonzero:
        raise ValueError("all abscissae equal 1; no scale to fit")
    pitch = min(nonzero)
    index: Dict[int, float] = {}
    for s, h in hs:
        j = round(s / pitch)
        if abs(s - j * pitch) > tolerance * max(1.0, abs(j)):
            raise ValueError("abscissae do not sit on a multiplicative grid")
        index[j] = h
    pos = sorted(j for j in index if j > 0)
    if pos:
        j = pos[0]
        while 2 * j in index:
            j *= 2
    else:
        neg = sorted((j for j in index if j < 0), reverse=True)
        if not neg:
            raise ValueError("need at least one abscissa away from 1")
        j = neg[0]
        while 2 * j in index:
            j *= 2
    gamma = index[j] / (j * pitch)
    deviation = max(abs(h - gamma * s) for s, h in hs)
    return gamma, deviation


def hyers_ulam_approx(
    samples: Union[Mapping[float, float], Sequence[Tuple[float, float]]],
    eps: float,
) -> Tuple[Dict[float, float], float]:
    """Additive approximation of an eps-approximately-additive sample map.

    The abscissae must sit on a uniform grid through 0.  Every in-range pair
    is first checked for the Cauchy defect |f(x)+f(y)-f(x+y)| <= eps (a
    failure raises HypothesisViolationError with the witnessing pair); the
    approximation is the dyadic limit g(x) = f(2^n x)/2^n at the largest
    in-range n, and telescoping the defect gives sup|f - g| <= eps.
    """
    if isinstance(samples, Mapping):
        pairs = sorted(samples.items())
    else:
        pairs = sorted(samples)
    if not pairs:
        raise ValueError("need at least one sample")
    xs = [float(x) for x, _ in pairs]
    gaps = [b - a for a, b in zip(xs, xs[1:]) if b - a > 0]
    pitch = min(gaps) if gaps else 1.0
    index: Dict[int, float] = {}
    keys: Dict[int, float] = {}
    for x, v in pairs:
        x = float(x)
        j = round(x / pitch)
        if abs(x - j * pitch) > 1e-6 * pitch * max(1.0, abs(j)):
            raise ValueError("abscissae do not sit on a uniform grid")
        if j in index:
            raise ValueError(f"duplicate abscissa near {x!r}")
        index[j] = float(v)
        keys[j] = x
    js = sorted(index)
    for a_pos, i in enumerate(js):
        for j in js[a_pos:]:
            if i + j in index:
                defect = abs(index[i] + index[j] - index[i + j])
                if defect > eps:
                    raise HypothesisViolationError(
                        f"additive defect {defect} exceeds {eps} at "
                        f"({keys[i]}, {keys[j]})",
                        witness=(keys[i], keys[j]),
                    )
    g: Dict[float, float] = {}
    sup_error = 0.0
    for j in js:
        if j == 0:
            gj = 0.0
        else:
            m, n = j, 0
            while 2 * m in index:
                m, n = 2 * m, n + 1
            gj = index[m] / (1 << n)
        g[keys[j]] = gj
        sup_error = max(sup_error, abs(index[j] - gj))
    return g, sup_error


# ---------------------------------------------------------------------------
# sandwich fitting


def _right_slope_at(f: PLConvex1D, x0: Fraction) -> Fraction:
    for i in range(1, len(f.knots)):
        if f.knots[i][0] > x0:
            return f.slopes[i - 1]
    return f.tail_slope


def _ratio_extrema(
    num: PLConvex1D, den: PLConvex1D
) -> Optional[Tuple[Fraction, Fraction]]:
    """Exact (min, max) of num/den where both are finite positive.

    Requires matching zero sets and effective domains (else no two-sided
    sandwich exists and None is returned).  On each common affine piece the
    ratio is a Moebius function of x, hence monotone, so the extrema are
    attained among piece endpoints and the one-sided limits at the shared
    zero end and at infinity.
    """
    z0n, z0d = num.zero_end(), den.zero_end()
    if z0n != z0d or num.domain_end != den.domain_end:
        return None
    if num.is_zero or num.is_point_indicator or num.is_indicator:
        # scaling does not move an indicator, so support match is equality
        return None if num != den else (Fraction(1), Fraction(1))
    if den.is_indicator:
        return None
    z0, dend = z0n, num.domain_end
    cands: List[Fraction] = []
    for g in (num, den):
        for x, _ in g.knots:
            if z0 < x and (is_inf(dend) or x <= dend):
                cands.append(x)
    vals: List[Fraction] = []
    for x in set(cands):
        nv, dv = num(x), den(x)
        if is_inf(nv) or is_inf(dv):
            return None
        if dv == 0:
            return None
        vals.append(Fraction(nv) / dv)
    if not is_inf(z0):
        sn, sd = _right_slope_at(num, z0), _right_slope_at(den, z0)
        if is_inf(sn) or is_inf(sd) or sd == 0:
            return None
        vals.append(Fraction(sn) / sd)
    if is_inf(dend):
        mn, md = num.tail_slope, den.tail_slope
        if is_inf(mn) or is_inf(md) or md == 0:
            return None
        vals.append(Fraction(mn) / md)
    if not vals:
        return Fraction(1), Fraction(1)
    return min(vals), max(vals)


def _geometric_mean_fraction(ratios: Sequence[Fraction]) -> Fraction:
    """Common value when all ratios agree exactly, else a float geometric mean."""
    if all(r == ratios[0] for r in ratios):
        return ratios[0]
    return Fraction(math.exp(math.fsum(math.log(r) for r in ratios) / len(ratios)))


def fit_sandwich(t: CorpusTransform, report: StabilityReport) -> StabilityReport:
    """Fit dilation and two-sided constants; re-verify the certificate.

    For an identity-like transform the reference is f(x/alpha), for a
    gauge-like one it is (Jf)(x/alpha) with J the gauge transform.  The
    dilation comes from the scaling-invariant support data (indicator image
    supports for identity, ray image supports for gauge), exactly when those
    ratios agree exactly.  c and C are the exact global extrema of the
    image/reference ratio, and c*ref <= Tf <= C*ref is re-verified exactly
    before the report is updated.  C/c beyond ctilde**10 flags the fit;
    within ctilde**7 is reported informationally.
    """
    k = AlmostOrderConstant(Fraction(report.ctilde))
    if report.classification is TransformClass.IDENTITY:
        gauge_like = False
    elif report.classification is TransformClass.GAUGE:
        gauge_like = True
    else:
        raise ClassificationError(
            "sandwich fitting needs an identity-like or gauge-like "
            "classification"
        )
    els, imgs, labels = t.corpus.elements, t.images, t.corpus.labels

    ratios: List[Fraction] = []
    for f, img in zip(els, imgs):
        if not gauge_like and _proper_indicator(f):
            ratios.append(Fraction(img.domain_end) / f.domain_end)
        elif gauge_like and _positive_linear(f):
            ratios.append(Fraction(img.domain_end) * f.first_slope)
    if not ratios:
        raise ClassificationError("no support data to fit a dilation from")
    alpha = _geometric_mean_fraction(ratios)

    refs = []
    for f in els:
        base = gauge_transform(f, check=False) if gauge_like else f
        refs.append(compose_dilate(base, alpha))

    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None
    violations: List[Violation] = []
    for f, img, ref, label in zip(els, imgs, refs, labels):
        if f.is_zero or f.is_point_indicator:
            if img != ref:
                violations.append(Violation(
                    "sandwich", label, "", None,
                    "extreme image does not match its reference exactly"))
            continue
        ext = _ratio_extrema(img, ref)
        if ext is None:
            violations.append(Violation(
                "sandwich", label, "", None,
                "image and reference have mismatched supports"))
            continue
        lo = ext[0] if lo is None else min(lo, ext[0])
        hi = ext[1] if hi is None else max(hi, ext[1])
    if violations:
        return replace(
            report,
            violations=report.violations + tuple(violations),
            alpha=float(alpha),
        )
    if lo is None:
        lo = hi = Fraction(1)

    for img, ref, label in zip(imgs, refs, labels):
        if not (leq(scale(ref, lo), img) and leq(img, scale(ref, hi))):
            raise ConsistencyError(
                f"fitted sandwich fails exact re-verification on {label}"
            )

    spread = hi / lo
    return replace(
        report,
        alpha=float(alpha),
        sandwich_lower=float(lo),
        sandwich_upper=float(hi),
        sandwich_flagged=bool(spread > k.power(SANDWICH_FLAG_POWER)),
        within_regime=bool(spread <= k.power(SANDWICH_REGIME_POWER)),
    )


# ---------------------------------------------------------------------------
# fuzzed transforms


_FUZZ_BASES: Dict[str, Tuple[Optional[Callable], str]] = {
    "identity": (None, "preserving"),
    "gauge": (None, "preserving"),
    "legendre": (legendre, "reversing"),
    "a": (geometric_dual, "reversing"),
}


def _jitter_factors(seed: int, k: AlmostOrderConstant, n: int) -> List[Fraction]:
    rng = random.Random(seed)
    half = 0.5 * math.log(float(k.ctilde)) * (1.0 - _JITTER_MARGIN)
    return [Fraction(math.exp(rng.uniform(-half, half))) for _ in range(n)]


def fuzz_transform(
    seed: int,
    k: AlmostOrderConstant,
    base: str = "identity",
    alpha=1,
    corpus: Optional[Corpus] = None,
) -> CorpusTransform:
    """Deterministic jittered transform certified at construction.

    Each corpus element f maps to kappa(f) * (base image of f)(x/alpha),
    with kappa drawn per element from the seeded generator, log-uniform in
    [ctilde**-0.5, ctilde**0.5] (shrunk by a hair so the certified
    inequalities stay strict).  The matching condition checker re-verifies
    the construction before it is returned.
    """
    if base not in _FUZZ_BASES:
        raise ValueError(f"unknown base transform {base!r}")
    op, sense = _FUZZ_BASES[base]
    if corpus is None:
        corpus = geometric_corpus()
    if not all(isinstance(f, PLConvex1D) for f in corpus.elements):
        raise CorpusError("fuzzing needs a corpus of 1-d functions")
    alpha = as_fraction(alpha)
    if alpha <= 0:
        raise ValueError("dilation must be positive")
    kappas = _jitter_factors(seed, k, len(corpus))
    images = []
    for f, kap in zip(corpus.elements, kappas):
        if base == "gauge":
            img = gauge_transform(f, check=False)
        elif op is not None:
            img = op(f)
        else:
            img = f
        if alpha != 1:
            img = compose_dilate(img, alpha)
        images.append(scale(img, kap))
    t = CorpusTransform(
        corpus,
        tuple(images),
        provenance=(
            f"fuzz(base={base}, ctilde={float(k.ctilde)!r}, seed={seed}, "
            f"alpha={float(alpha)!r}, corpus={corpus.description})"
        ),
    )
    checker = (
        check_almost_preserving if sense == "preserving" else check_almost_reversing
    )
    bad = checker(t, k)
    if bad:
        raise ConsistencyError(
            f"fuzzed transform failed its own certification: {bad[0]}"
        )
    return t


def fuzz_delta_transform(
    seed: int,
    k: AlmostOrderConstant,
    point_map: Callable,
    beta: float = 1.0,
    corpus: Optional[Corpus] = None,
) -> CorpusTransform:
    """Jittered pinned-point transform: D(theta)+c -> D(point_map(theta)) + kappa*beta*c."""
    from .corpus import delta_corpus
    from .extremal import make_delta

    if corpus is None:
        corpus = delta_corpus()
    if not all(isinstance(f, DeltaFunction) for f in corpus.elements):
        raise CorpusError("delta fuzzing needs a corpus of pinned-point functions")
    if not beta > 0:
        raise ValueError("value scaling must be positive")
    kappas = _jitter_factors(seed, k, len(corpus))
    images = []
    for f, kap in zip(corpus.elements, kappas):
        images.append(make_delta(point_map(f.theta), float(kap) * beta * f.c))
    t = CorpusTransform(
        corpus,
        tuple(images),
        provenance=(
            f"fuzz-delta(ctilde={float(k.ctilde)!r}, seed={seed}, "
            f"beta={beta!r}, corpus={corpus.description})"
        ),
    )
    bad = check_almost_preserving(t, k)
    if bad:
        raise ConsistencyError(
            f"fuzzed transform failed its own certification: {bad[0]}"
        )
    return t


# ---------------------------------------------------------------------------
# pinned-point structure and ray mappings


def _as_coords(theta) -> Tuple[float, ...]:
    return theta if isinstance(theta, tuple) else (theta,)


def check_delta_structure(
    t: CorpusTransform, k: AlmostOrderConstant
) -> DeltaStructureReport:
    """Verify point-map/value-map structure of a pinned-point transform.

    Images must be pinned-point functions whose point depends only on the
    source point (the fibre property).  The point map is fitted affinely by
    least squares; a residual beyond 1e-6 flags a non-affine map.  The value
    map is checked against the quasi-linear sandwich at the corpus constant
    and summarized by the geometric mean beta of image/source value ratios.
    """
    els, imgs, labels = t.corpus.elements, t.images, t.corpus.labels
    if not all(isinstance(f, DeltaFunction) for f in els):
        raise CorpusError("delta-structure checks need a pinned-point corpus")
    violations: List[Violation] = []
    for img, label in zip(imgs, labels):
        if not isinstance(img, DeltaFunction):
            violations.append(Violation(
                "delta-image", label, "", None,
                "image is not a pinned-point function"))
    if violations:
        return DeltaStructureReport(False, violations=tuple(violations))

    fibres: Dict[Tuple[float, ...], Tuple[float, ...]] = {}
    for f, img, label in zip(els, imgs, labels):
        key = _as_coords(f.theta)
        val = _as_coords(img.theta)
        if key in fibres and fibres[key] != val:
            violations.append(Violation(
                "delta-fibre", label, "", f.theta,
                "image point varies along a fibre of constant source point"))
        fibres.setdefault(key, val)
    if violations:
        return DeltaStructureReport(False, violations=tuple(violations))

    src = np.array(sorted(fibres), dtype=float)
    dst = np.array([fibres[tuple(row)] for row in sorted(fibres)], dtype=float)
    design = np.hstack([src, np.ones((len(src), 1))])
    coef, *_ = np.linalg.lstsq(design, dst, rcond=None)
    pred = design @ coef
    residual = float(np.abs(pred - dst).max())
    dim = src.shape[1]
    if dim == 1:
        matrix: object = float(coef[0, 0])
        offset: object = float(coef[1, 0])
    else:
        matrix = tuple(tuple(float(v) for v in coef[:dim, j]) for j in range(dim))
        offset = tuple(float(v) for v in coef[dim, :])
    flagged = residual > 1e-6

    ratios = [img.c / f.c for f, img in zip(els, imgs) if f.c > 0]
    psi_ok = True
    for f, img, label in zip(els, imgs, labels):
        if f.c == 0 and img.c != 0:
            psi_ok = False
            violations.append(Violation(
                "delta-value", label, "", f.theta,
                "zero-value source must map to a zero-value image"))
    beta = None
    if ratios:
        if any(r <= 0 for r in ratios):
            psi_ok = False
        else:
            beta = math.exp(math.fsum(math.log(r) for r in ratios) / len(ratios))
            cl, cu = float(k.reciprocal), float(k.ctilde)
            for f, img, label in zip(els, imgs, labels):
                if f.c > 0 and not (
                    cl * beta * f.c <= img.c <= cu * beta * f.c
                ):
                    psi_ok = False
                    violations.append(Violation(
                        "delta-value", label, "", f.theta,
                        "image value leaves the (1/C, C) band around beta"))
    value_bound = None
    if psi_ok and beta is not None:
        samples = [
            (_as_coords(f.theta), f.c, img.c) for f, img in zip(els, imgs)
        ]
        try:
            value_bound, _ = quasi_linear_sandwich(samples, float(k.ctilde))
        except HypothesisViolationError as exc:
            psi_ok = False
            violations.append(Violation(
                "delta-value", "", "", exc.witness,
                "image values fail the quasi-linear combination bound"))
    return DeltaStructureReport(
        is_delta_structure=not violations,
        point_matrix=matrix,
        point_offset=offset,
        point_residual=residual,
        flagged_nonaffine=flagged,
        beta=beta,
        value_ratio_bound=value_bound,
        psi_ok=psi_ok,
        violations=tuple(violations),
    )


def verify_ray_mapping(t: CorpusTransform) -> RayMappingReport:
    """Fit a linear direction map to a transform of ray-supported grids."""
    els, imgs, labels = t.corpus.elements, t.images, t.corpus.labels
    if not all(isinstance(f, GridFunction2D) for f in els):
        raise CorpusError("ray-mapping checks need a corpus of sampled grids")
    pairs: List[Tuple[Tuple[int, int], Tuple[int, int]]] = []
    violations: List[Violation] = []
    for f, img, label in zip(els, imgs, labels):
        u = is_ray_supported(f)
        if u is None:
            raise CorpusError(f"corpus element {label} is not ray supported")
        v = is_ray_supported(img) if isinstance(img, GridFunction2D) else None
        if v is None:
            violations.append(Violation(
                "ray-support", label, "", u,
                "image is not supported on a single lattice ray"))
            continue
        pairs.append((u, v))
    if not pairs:
        return RayMappingReport((), None, None, tuple(violations))
    src = np.array([u for u, _ in pairs], dtype=float)
    dst = np.array([v for _, v in pairs], dtype=float)
    src /= np.linalg.norm(src, axis=1, keepdims=True)
    dst /= np.linalg.norm(dst, axis=1, keepdims=True)
    coef, *_ = np.linalg.lstsq(src, dst, rcond=None)
    matrix = coef.T
    residual = float(np.linalg.norm(src @ coef - dst, axis=1).max())
    return RayMappingReport(
        direction_map=tuple(pairs),
        matrix=tuple(tuple(float(v) for v in row) for row in matrix),
        residual=residual,
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# pipeline


def analyze(
    t: CorpusTransform,
    k: AlmostOrderConstant,
    exponent_tolerance: float = 1e-6,
) -> StabilityReport:
    """Run the full certification pipeline on a corpus transform.

    Checks both order conditions, then for the certified sense also the
    inverse conditions, lattice stability on designated pairs, and the
    extremes; classifies; recovers the exponent from the indicator samples;
    and for preserving transforms fits the two-sided sandwich.
    """
    has_extremes = any(
        isinstance(f, PLConvex1D) and (f.is_zero or f.is_point_indicator)
        for f in t.corpus.elements
    )
    pres = check_almost_preserving(t, k)
    if not pres:
        sense = "preserving"
        violations = check_inverse_conditions(t, k) + check_lattice_stability(t, k)
        if has_extremes:
            violations = violations + check_extremes(t)
    else:
        rev = check_almost_reversing(t, k)
        if not rev:
            sense = "reversing"
            violations = ()
        else:
            report = classify(t, k, sense=None)
            return replace(
                report,
                violations=report.violations + pres + rev,
            )
    report = classify(t, k, sense=sense)
    report = replace(report, violations=report.violations + violations)
    if report.classification is not TransformClass.INCONSISTENT:
        gamma, deviation = estimate_exponent(
            report.phi_samples, tolerance=exponent_tolerance
        )
        report = replace(report, gamma=gamma, exponent_deviation=deviation)
    if report.classification in (TransformClass.IDENTITY, TransformClass.GAUGE):
        report = fit_sandwich(t, report)
    return report
