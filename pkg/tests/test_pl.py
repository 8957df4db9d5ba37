import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings

from dualitylab import (
    INF,
    ClassTag,
    ClassTagError,
    ConvexityError,
    DomainError,
    PLConvex1D,
    as_extended,
    as_fraction,
    compose_dilate,
    hat_inf2,
    leq,
    leq_witness,
    scale,
    sup2,
)

from helpers import geometric_functions, random_geometric, sample_points


class TestScalars:
    def test_as_fraction_exact_float(self):
        assert as_fraction(0.1) == Fraction(0.1)
        assert as_fraction("3/7") == Fraction(3, 7)
        assert as_fraction(5) == 5

    def test_as_fraction_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            as_fraction(INF)
        with pytest.raises(ValueError):
            as_fraction(float("nan"))
        with pytest.raises(TypeError):
            as_fraction(True)

    def test_as_extended(self):
        assert as_extended("inf") == INF
        assert as_extended(INF) == INF
        assert as_extended("2/3") == Fraction(2, 3)


class TestCanonicalForm:
    def test_collinear_interior_knot_merges(self):
        f = PLConvex1D(((0, 0), (1, 1), (2, 2), (3, 5)), INF)
        assert f.knots == ((0, 0), (2, 2), (3, 5))

    def test_collinear_last_knot_merges_into_finite_tail(self):
        f = PLConvex1D(((0, 0), (1, 1), (2, 3)), 2)
        assert f.knots == ((0, 0), (1, 1))
        assert f.tail_slope == 2

    def test_infinite_tail_keeps_last_knot(self):
        f = PLConvex1D(((0, 0), (1, 0)), INF)
        assert f.knots == ((0, 0), (1, 0))
        assert math.isinf(f.tail_slope)

    def test_rejects_nonzero_first_abscissa(self):
        with pytest.raises(ConvexityError):
            PLConvex1D(((1, 0),), 1)

    def test_rejects_negative_values(self):
        with pytest.raises(ValueError):
            PLConvex1D(((0, 0), (1, -1)), 5)

    def test_rejects_decreasing_slopes(self):
        with pytest.raises(ConvexityError):
            PLConvex1D(((0, 0), (1, 2), (2, 3)), INF)

    def test_rejects_tail_below_last_chord(self):
        with pytest.raises(ConvexityError):
            PLConvex1D(((0, 0), (1, 2)), 1)

    def test_geometric_requires_zero_at_origin(self):
        with pytest.raises(ConvexityError):
            PLConvex1D(((0, 1),), 1)
        # fine with the nonnegative tag
        f = PLConvex1D(((0, 1),), 1, tag=ClassTag.NONNEGATIVE)
        assert f(0) == 1

    def test_geometric_flat_start_is_fine(self):
        f = PLConvex1D(((0, 0), (1, 0), (2, 1)), 2)
        assert f.tag is ClassTag.GEOMETRIC and f.zero_end() == 1

    def test_equality_is_semantic(self):
        a = PLConvex1D(((0, 0), (Fraction(1, 2), Fraction(1, 2)), (1, 1)), 3)
        b = PLConvex1D(((0, 0), (1, 1)), 3)
        assert a == b


class TestEvaluation:
    def test_piecewise_values(self):
        f = PLConvex1D(((0, 0), (1, 0), (3, 4)), 5)
        assert f(0) == 0
        assert f(Fraction(1, 2)) == 0
        assert f(2) == 2
        assert f(3) == 4
        assert f(5) == 14  # tail slope 5

    def test_bounded_domain_is_infinite_beyond(self):
        f = PLConvex1D(((0, 0), (1, 2)), INF)
        assert f(1) == 2
        assert math.isinf(f(Fraction(3, 2)))

    def test_negative_abscissa_rejected(self):
        f = PLConvex1D(((0, 0),), 1)
        with pytest.raises(DomainError):
            f(-1)


class TestProperties:
    def test_indicator_flags(self):
        zero = PLConvex1D(((0, 0),), 0)
        point = PLConvex1D(((0, 0),), INF)
        ind = PLConvex1D(((0, 0), (2, 0)), INF)
        lin = PLConvex1D(((0, 0),), 3)
        assert zero.is_zero and zero.is_indicator and not zero.is_point_indicator
        assert point.is_point_indicator and point.is_indicator
        assert ind.is_indicator and not ind.is_zero
        assert lin.is_linear and not lin.is_indicator
        assert zero.is_linear  # slope-0 ray

    def test_domain_and_zero_end(self):
        ind = PLConvex1D(((0, 0), (2, 0)), INF)
        assert ind.domain_end == 2 and ind.zero_end() == 2
        lin = PLConvex1D(((0, 0),), 3)
        assert math.isinf(lin.domain_end) and lin.zero_end() == 0
        hockey = PLConvex1D(((0, 0), (1, 0)), 2)
        assert hockey.zero_end() == 1
        assert math.isinf(PLConvex1D(((0, 0),), 0).zero_end())

    def test_zero_end_needs_geometric_tag(self):
        f = PLConvex1D(((0, 1),), 1, tag=ClassTag.NONNEGATIVE)
        with pytest.raises(ClassTagError):
            f.zero_end()

    def test_first_slope(self):
        assert PLConvex1D(((0, 0),), 3).first_slope == 3
        assert PLConvex1D(((0, 0), (1, 2)), 5).first_slope == 2


class TestLattice:
    def test_sup2_pointwise_max(self):
        rng = random.Random(7)
        for _ in range(40):
            f = random_geometric(rng)
            g = random_geometric(rng)
            s = sup2(f, g)
            for x in sample_points(f) + sample_points(g):
                fv, gv = f(x), g(x)
                want = max(fv, gv)
                got = s(x)
                if math.isinf(want):
                    assert math.isinf(got), (f, g, x)
                else:
                    assert got == want, (f, g, x)

    def test_hat_inf2_below_min_and_convex(self):
        rng = random.Random(8)
        for _ in range(40):
            f = random_geometric(rng)
            g = random_geometric(rng)
            h = hat_inf2(f, g)
            assert leq(h, f) and leq(h, g)

    def test_hat_inf2_is_largest_on_examples(self):
        # min of two rays is convex already: envelope equals the min(=flatter)
        f = PLConvex1D(((0, 0),), 1)
        g = PLConvex1D(((0, 0),), 3)
        assert hat_inf2(f, g) == f
        # indicator vs ray: envelope is the ray clipped by nothing (ray is
        # below on [0, z]... compute a known case: min(1_[0,1], l_1) has
        # envelope l_1 on [0,1] then stays below both
        ind = PLConvex1D(((0, 0), (1, 0)), INF)
        lin = PLConvex1D(((0, 0),), 1)
        env = hat_inf2(ind, lin)
        assert env(Fraction(1, 2)) == 0
        assert env(2) <= lin(2)

    def test_absorption_laws(self):
        rng = random.Random(9)
        for _ in range(30):
            f = random_geometric(rng)
            g = random_geometric(rng)
            assert sup2(f, hat_inf2(f, g)) == f
            assert hat_inf2(f, sup2(f, g)) == f

    def test_mixed_tags_rejected(self):
        f = PLConvex1D(((0, 0),), 1)
        g = PLConvex1D(((0, 1),), 1, tag=ClassTag.NONNEGATIVE)
        with pytest.raises(ClassTagError):
            sup2(f, g)


class TestOrder:
    def test_leq_witness_points_at_violation(self):
        rng = random.Random(11)
        checked = 0
        for _ in range(200):
            f = random_geometric(rng)
            g = random_geometric(rng)
            w = leq_witness(f, g, Fraction(3, 2))
            if w is None:
                continue
            checked += 1
            fw, gw = f(w), g(w)
            if math.isinf(fw):
                assert not math.isinf(gw)
            else:
                assert fw > Fraction(3, 2) * gw
        assert checked > 20

    def test_leq_scaling_factor(self):
        f = PLConvex1D(((0, 0),), 2)
        g = PLConvex1D(((0, 0),), 1)
        assert not leq(f, g)
        assert leq(f, g, 2)
        assert not leq(f, g, Fraction(199, 100))

    def test_leq_rejects_nonpositive_factor(self):
        f = PLConvex1D(((0, 0),), 1)
        with pytest.raises(ValueError):
            leq(f, f, 0)


class TestScaling:
    def test_scale_values(self):
        f = PLConvex1D(((0, 0), (1, 2)), 4)
        g = scale(f, Fraction(1, 2))
        assert g(1) == 1 and g(2) == 3
        with pytest.raises(ValueError):
            scale(f, 0)

    def test_compose_dilate_values(self):
        f = PLConvex1D(((0, 0), (1, 2)), 4)
        g = compose_dilate(f, 2)  # g(x) = f(x/2)
        assert g(2) == 2 and g(4) == 6
        assert g.domain_end == INF

    def test_dilate_indicator_moves_support(self):
        ind = PLConvex1D(((0, 0), (1, 0)), INF)
        assert compose_dilate(ind, 3).domain_end == 3


@settings(max_examples=150, deadline=None)
@given(geometric_functions())
def test_random_functions_are_canonical(f):
    # re-building from the canonical data is identity
    assert PLConvex1D(f.knots, f.tail_slope, tag=f.tag) == f
    # slopes strictly increase and tail stays above the last chord
    ss = f.slopes
    assert all(a < b for a, b in zip(ss, ss[1:]))
    if ss and not math.isinf(f.tail_slope):
        assert f.tail_slope > ss[-1]


@settings(max_examples=100, deadline=None)
@given(geometric_functions(), geometric_functions())
def test_lattice_bounds_random(f, g):
    s, h = sup2(f, g), hat_inf2(f, g)
    assert leq(f, s) and leq(g, s)
    assert leq(h, f) and leq(h, g)
