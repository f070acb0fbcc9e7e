"""numerics: BigReal, enclosures, log domain, exact tower values."""

import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from logconvex.numerics import (
    NEG_INFINITY,
    BigReal,
    DomainError,
    ExactReal,
    HugeInterval,
    Indeterminate,
    Interval,
    IntervalReal,
    LogValue,
    Rounding,
    Verdict,
    certified_compare,
    exp_enclosure,
    ln_enclosure,
    log_add_exp,
    log_sub_exp,
)
from logconvex.numerics import bigreal as br
from logconvex.numerics import enclosure as enc
from logconvex.numerics.exact import smallest_pow2_exponent_above, tower, tower_cmp, tower_from_json, tower_to_json
from tests.oracles.exact_rational import exp_bracket


def _mp(x: BigReal, dps=400):
    with mpmath.workprec(4 * 256 + 64):
        return mpmath.mpf(x.mpf)


def _contains(iv: Interval, ref) -> bool:
    return _mp(iv.lo) <= ref <= _mp(iv.hi)


# -- worked examples--------------------------------------------------------------------
def test_log_add_exp_examples():
    ln2 = enc.log(Interval.point(2, 256))
    r = log_add_exp(LogValue.from_log(0), LogValue.from_log(0))
    assert enc.compare(r.enc, ln2) is Verdict.INDETERMINATE  # overlaps ln 2
    assert r.enc.lo <= ln2.hi and ln2.lo <= r.enc.hi
    q = LogValue.from_log(Fraction(7, 3))
    assert log_add_exp(NEG_INFINITY, q) is q
    r = log_add_exp(LogValue.from_log(0), LogValue.of(3))
    ln4 = enc.log(Interval.point(4, 256))
    assert r.enc.lo <= ln4.hi and ln4.lo <= r.enc.hi


def test_log_sub_exp_examples():
    r = log_sub_exp(LogValue.of(4), LogValue.of(3))
    assert r.enc.lo <= 0 <= r.enc.hi
    assert r.enc.width().to_fraction() < Fraction(1, 10**70)
    q = LogValue.of(5)
    assert log_sub_exp(q, q) is NEG_INFINITY
    two = LogValue.of(2)
    assert log_sub_exp(two, NEG_INFINITY) is two


def test_log_sub_exp_negative_raises():
    with pytest.raises(DomainError, match="negative quantity in log domain"):
        log_sub_exp(LogValue.of(3), LogValue.of(4))


def test_certified_compare_examples():
    I = lambda a, b: Interval.from_bounds(a, b)
    assert certified_compare(I(1, 2), I(3, 4)) is Verdict.LESS
    assert certified_compare(I(1, 3), I(2, 4)) is Verdict.INDETERMINATE
    assert certified_compare(I(5, 6), I(0, 1)) is Verdict.GREATER
    assert Verdict.LESS.value == "CertainlyLess"


def test_certified_compare_escalates():
    # 1 + 2^-300 vs 1 cannot be split at 64 bits but can at 512
    a = lambda p: enc.add(Interval.point(1, p), enc.exp2(Interval.point(-300, p)))
    b = lambda p: Interval.point(1, p)
    assert certified_compare(a, b, prec=64) is Verdict.GREATER


def test_exp_ln_examples():
    e0 = exp_enclosure(Interval.point(0, 256))
    assert e0.contains(1)
    assert e0.width().to_fraction() <= 2 * Fraction(1, 2**255)
    assert ln_enclosure(Interval.point(1, 256)).contains(0)
    ln2 = ln_enclosure(Interval.point(2, 256))
    two = exp_enclosure(ln2)
    assert two.contains(2)
    with pytest.raises(DomainError):
        ln_enclosure(Interval.from_bounds(-2, -1))
    with pytest.raises(DomainError):
        ln_enclosure(Interval.from_bounds(-1, 0))
    # straddling zero is undecided, which lets callers escalate precision
    with pytest.raises(Indeterminate):
        ln_enclosure(Interval.from_bounds(-1, 2))


def test_interval_alias():
    assert IntervalReal is Interval


# -- containment against a 4x-precision reference ---------------------------------------------
@given(st.fractions(min_value=-60, max_value=60, max_denominator=10**6))
def test_exp_containment(q):
    iv = enc.exp(Interval.point(q, 256))
    with mpmath.workprec(1024):
        ref = mpmath.exp(mpmath.mpf(q.numerator) / q.denominator)
    assert _contains(iv, ref)


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=10**9, max_denominator=10**6))
def test_log_containment(q):
    iv = enc.log(Interval.point(q, 256))
    with mpmath.workprec(1024):
        ref = mpmath.log(mpmath.mpf(q.numerator) / q.denominator)
    assert _contains(iv, ref)


@given(st.fractions(min_value=-5, max_value=5, max_denominator=1000))
def test_exp_against_rational_bracket(q):
    # independent of mpmath: Taylor bracket with exact remainder
    lo, hi = exp_bracket(q, 80)
    iv = enc.exp(Interval.point(q, 200))
    assert iv.lo.to_fraction() <= hi and lo <= iv.hi.to_fraction()


@given(st.fractions(min_value=-30, max_value=30, max_denominator=10**4),
       st.fractions(min_value=-30, max_value=30, max_denominator=10**4))
def test_arith_containment(x, y):
    X, Y = Interval.point(x, 128), Interval.point(y, 128)
    for iv, exact in ((enc.add(X, Y), x + y), (enc.sub(X, Y), x - y), (enc.mul(X, Y), x * y)):
        assert iv.lo.to_fraction() <= exact <= iv.hi.to_fraction()
    if y != 0:
        d = enc.div(X, Y)
        assert d.lo.to_fraction() <= x / y <= d.hi.to_fraction()


@given(st.fractions(min_value=-20, max_value=20, max_denominator=997))
def test_monotone_refinement(q):
    widths = []
    for p in (64, 128, 256, 512):
        iv = enc.exp(Interval.point(q, p))
        widths.append(iv.width().to_fraction())
    assert all(w2 <= w1 for w1, w2 in zip(widths, widths[1:]))


@given(st.fractions(min_value=-40, max_value=40, max_denominator=64),
       st.fractions(min_value=0, max_value=40, max_denominator=64))
def test_add_sub_roundtrip(y, gap):
    x = y + gap
    X, Y = LogValue.from_log(x), LogValue.from_log(y)
    back = log_sub_exp(log_add_exp(X, Y), Y)
    assert back.enc.lo.to_fraction() <= x <= back.enc.hi.to_fraction()
    assert back.enc.width().to_fraction() <= Fraction(abs(int(x)) + 1, 2**200)


def test_no_silent_overflow():
    big = LogValue.from_log(10**6)
    small = LogValue.from_log(-(10**6))
    one = (big * small).value()
    assert one.contains(1)
    assert one.width().to_fraction() <= Fraction(1, 2**250)


def test_huge_magnitudes_are_representable():
    # e^(e^1000)
    inner = enc.exp(Interval.point(1000, 256))
    x = enc.exp(inner)
    assert isinstance(x, HugeInterval) and x.sign() == 1
    back = enc.log(x)
    assert back.lo <= inner.hi and inner.lo <= back.hi
    tiny = enc.exp(enc.neg(inner))
    prod = enc.mul(x, tiny)
    # e^1000 carries ~2^1186 absolute error at 256 bits, so the product is wide but still contains 1
    assert enc.contains(prod, 1)


# -- BigReal ------------------------------------------------------------------------------
@given(st.integers(min_value=-(2**200), max_value=2**200), st.integers(min_value=-5000, max_value=5000))
def test_bigreal_json_roundtrip(man, exp):
    x = BigReal.from_man_exp(man, exp)
    assert BigReal.from_json(x.to_json()) == x


def test_bigreal_pow2_json():
    assert BigReal.pow2(10).to_json() == {"pow2": 10}
    assert BigReal.from_json({"pow2": -3}) == BigReal.from_fraction(Fraction(1, 8), 10, Rounding.NEAREST)


def test_bigreal_unbounded_exponent():
    x = BigReal.pow2(10**40)
    assert x.magnitude() == 10**40 + 1
    assert BigReal.from_json(x.to_json()) == x


@given(st.fractions(min_value=-100, max_value=100, max_denominator=10**9))
def test_directed_rounding_one_ulp(q):
    lo = BigReal.from_fraction(q, 64, Rounding.FLOOR)
    hi = BigReal.from_fraction(q, 64, Rounding.CEILING)
    assert lo.to_fraction() <= q <= hi.to_fraction()
    if q != 0:
        ulp = Fraction(2) ** (abs(lo).magnitude() - 64) if not lo.is_zero() else Fraction(0)
        assert hi.to_fraction() - lo.to_fraction() <= max(ulp, Fraction(2) ** (hi.magnitude() - 64))


# -- exact values ---------------------------------------------------------------------------
def test_exact_rational_arithmetic():
    a = ExactReal(Fraction(-5, 3))
    assert (a * 3).as_fraction() == -5
    assert str(a.to_json()) == "-5/3"
    assert ExactReal.from_json("-5/3") == a


def test_exact_powers_of_two_cancel():
    k = 10**30
    x = ExactReal.pow2(k)
    y = x * Fraction(-1, 2) + ExactReal.pow2(k - 1)
    assert y.is_zero()
    assert x.power_of_two_exponent() == k


def test_tower_values_roundtrip():
    t = tower(3, tower(1, 10**40))
    assert tower_from_json(tower_to_json(t)) == t
    assert tower_cmp(t, tower(1, 10**40)) > 0
    x = ExactReal.pow2(t, Fraction(-1, 7)) + Fraction(1, 3)
    assert ExactReal.from_json(x.to_json()) == x
    assert x.sign() < 0


def test_smallest_pow2_exponent_above():
    assert smallest_pow2_exponent_above(Interval.point(Fraction(3), 64), 64) == 2
    assert smallest_pow2_exponent_above(Interval.point(4, 64), 64) == 3
    assert smallest_pow2_exponent_above(enc.log(Interval.point(4, 64)), 64) == 1


def test_escalate_raises_at_cap():
    def never(p):
        raise Indeterminate("no")

    with pytest.raises(Indeterminate):
        enc.escalate(never, 64, 256)


@given(st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**6))
def test_logvalue_product_is_sum(x):
    a, b = LogValue.from_log(x), LogValue.from_log(-x)
    r = a * b
    assert r.enc.lo <= 0 <= r.enc.hi


def test_containment_ten_thousand():
    rng = __import__("random").Random(11)
    with mpmath.workprec(1024):
        for i in range(10**4):
            q = Fraction(rng.randint(-(10**6), 10**6), rng.randint(1, 10**4))
            x = mpmath.mpf(q.numerator) / q.denominator
            if i % 2:
                iv, ref = enc.exp(Interval.point(q, 256)), mpmath.exp(x)
            else:
                q = abs(q) + Fraction(1, 10**4)
                iv, ref = enc.log(Interval.point(q, 256)), mpmath.log(mpmath.mpf(q.numerator) / q.denominator)
            assert mpmath.mpf(iv.lo.mpf) <= ref <= mpmath.mpf(iv.hi.mpf)
