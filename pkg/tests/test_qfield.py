import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rauzycov.qfield import (
    GOLDEN,
    SQRT2,
    FieldVal,
    QuadInt,
    cmp,
    div_by_unit,
    parse_fieldval,
    parse_quadint,
)

ints = st.integers(min_value=-(10**6), max_value=10**6)
small = st.integers(min_value=-999, max_value=999)


def qi(a, b):
    return QuadInt(a, b)


class TestStar:
    def test_conjugates_lambda(self):
        assert qi(1, 1).star() == qi(1, -1)

    def test_rational_fixed_point(self):
        assert qi(5, 0).star() == qi(5, 0)

    def test_involution(self):
        x = qi(3, -2)
        assert x.star().star() == x

    @given(ints, ints, ints, ints)
    def test_ring_automorphism(self, a, b, c, d):
        x, y = qi(a, b), qi(c, d)
        assert (x + y).star() == x.star() + y.star()
        assert (x * y).star() == x.star() * y.star()


class TestMul:
    def test_lambda_squared(self):
        assert qi(1, 1) * qi(1, 1) == qi(3, 2)

    def test_unit_times_inverse(self):
        assert qi(1, 1) * qi(-1, 1) == qi(1, 0)

    def test_identity(self):
        x = qi(7, -3)
        assert x * qi(1, 0) == x

    @given(ints, ints, ints, ints)
    def test_norm_multiplicative(self, a, b, c, d):
        x, y = qi(a, b), qi(c, d)
        assert (x * y).norm() == x.norm() * y.norm()


class TestDivByUnit:
    def test_lambda_sq_over_lambda(self):
        assert div_by_unit(qi(3, 2), qi(1, 1)) == qi(1, 1)

    def test_zero(self):
        assert div_by_unit(qi(0, 0), qi(1, 1)) == qi(0, 0)

    def test_lambda_inverse(self):
        assert div_by_unit(qi(1, 0), qi(1, 1)) == qi(-1, 1)

    def test_non_unit_rejected(self):
        with pytest.raises(ValueError, match="not a unit"):
            div_by_unit(qi(4, 0), qi(2, 0))

    @given(ints, ints)
    def test_roundtrip(self, a, b):
        u = qi(1, 1) ** 3
        x = qi(a, b)
        assert div_by_unit(x, u) * u == x


class TestEmbed:
    def test_known_constants(self):
        assert qi(1, 1).embed() == pytest.approx(2.414214, abs=1e-6)
        assert qi(1, 1).embed_star() == pytest.approx(-0.414214, abs=1e-6)
        assert qi(0, 0).embed() == 0.0 and qi(0, 0).embed_star() == 0.0
        assert qi(3, 2).embed() == pytest.approx(5.828427, abs=1e-6)
        assert qi(3, 2).embed_star() == pytest.approx(0.171573, abs=1e-6)

    @given(ints, ints)
    def test_embed_product_matches_norm(self, a, b):
        x = qi(a, b)
        n = x.norm()
        if n == 0:
            return
        assert x.embed() * x.embed_star() == pytest.approx(n, rel=1e-12)

    @given(ints, ints, ints, ints)
    def test_embed_monotone_with_cmp(self, a, b, c, d):
        x, y = qi(a, b), qi(c, d)
        c3 = cmp(x, y)
        if c3 < 0:
            assert x.embed() <= y.embed()
        elif c3 > 0:
            assert x.embed() >= y.embed()
        else:
            assert x.embed() == y.embed()


class TestCmp:
    def test_sqrt2_bigger_than_one(self):
        assert cmp(qi(1, 1), qi(2, 0)) > 0

    def test_equal(self):
        assert cmp(qi(0, 0), qi(0, 0)) == 0

    def test_three_minus_two_sqrt2_positive(self):
        assert cmp(qi(3, -2), qi(0, 0)) > 0

    def test_total_order(self):
        vals = [qi(0, 0), qi(1, 0), qi(0, 1), qi(1, 1), qi(-1, 1), qi(3, -2)]
        embedded = sorted(vals, key=lambda v: v.embed())
        assert sorted(vals) == embedded


class TestFieldVal:
    def test_reduction(self):
        v = FieldVal(2, 4, 6)
        assert (v.p, v.q, v.d) == (1, 2, 3)

    def test_negative_denominator_normalized(self):
        v = FieldVal(1, -1, -2)
        assert (v.p, v.q, v.d) == (-1, 1, 2)

    @given(small, small, st.integers(1, 99), small, small, st.integers(1, 99))
    def test_add_sub_roundtrip(self, p1, q1, d1, p2, q2, d2):
        x, y = FieldVal(p1, q1, d1), FieldVal(p2, q2, d2)
        assert (x + y) - y == x

    @given(small, small, st.integers(1, 99), small, small, st.integers(1, 99))
    def test_mul_div_roundtrip(self, p1, q1, d1, p2, q2, d2):
        x, y = FieldVal(p1, q1, d1), FieldVal(p2, q2, d2)
        if y.is_zero():
            return
        assert (x * y) / y == x

    def test_inverse_of_lambda(self):
        lam = FieldVal(1, 1, 1)
        assert lam.inverse() == FieldVal(-1, 1, 1)

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            FieldVal(1, 0, 1) / FieldVal(0, 0, 1)

    def test_comparison(self):
        assert FieldVal(3, -2, 1) > FieldVal(0, 0, 1)
        assert FieldVal(1, 0, 2) < FieldVal(2, 0, 3)


class TestGoldenRing:
    def test_phi_defining_relation(self):
        phi = GOLDEN.omega
        assert phi * phi == phi + GOLDEN.one

    def test_phi_is_unit(self):
        assert GOLDEN.int2(0, 1).norm() == -1

    def test_embed(self):
        assert GOLDEN.int2(0, 1).embed() == pytest.approx((1 + math.sqrt(5)) / 2)
        assert GOLDEN.int2(0, 1).embed_star() == pytest.approx((1 - math.sqrt(5)) / 2)

    def test_rings_do_not_mix(self):
        with pytest.raises(ValueError, match="mixed"):
            GOLDEN.int2(1, 1) + QuadInt(1, 1)


class TestTextForm:
    @pytest.mark.parametrize(
        "x", [qi(0, 0), qi(1, 1), qi(-3, 2), qi(17, -7), qi(5, 0)]
    )
    def test_quadint_roundtrip(self, x):
        assert parse_quadint(str(x)) == x

    @pytest.mark.parametrize(
        "v",
        [FieldVal(17, -7, 2), FieldVal(0, 0, 1), FieldVal(-1, 1, 1), FieldVal(3, 0, 4)],
    )
    def test_fieldval_roundtrip(self, v):
        assert parse_fieldval(str(v)) == v

    def test_rendering(self):
        assert str(qi(3, 2)) == "3+2*sqrt2"
        assert str(FieldVal(17, -7, 2)) == "(17-7*sqrt2)/2"
        assert str(GOLDEN.int2(1, 1)) == "1+1*phi"

    def test_bad_input(self):
        with pytest.raises(ValueError):
            parse_quadint("3 + sqrt2")
