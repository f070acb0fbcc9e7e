"""Outward-rounded enclosures of reals, including magnitudes past any exponent.

Two concrete shapes share one arithmetic:

* :class:`Interval` -- ``[lo, hi]`` with :class:`BigReal` endpoints, used while
  ``log2|x|`` stays below ``2**CUT_BITS``;
* :class:`HugeInterval` -- ``sign * 2**L`` where ``L`` is itself an enclosure,
  so ``2**(2**(2**k))`` towers stay representable.

Every operation encloses the exact result. When a result cannot be certified
at the current precision (an interval straddles a decision point, or two huge
magnitudes are too close to subtract) :class:`Indeterminate` is raised so the
caller can retry at a higher precision.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from typing import Callable, TypeVar, Union

from . import bigreal as br
from .bigreal import BigReal, Rounding

FLOOR, CEIL = Rounding.FLOOR, Rounding.CEILING

CUT_BITS = 128
CUT = BigReal.pow2(CUT_BITS)
_TINY = BigReal.pow2(-(1 << CUT_BITS))  # 2**-(2**128), below every plain magnitude
_HUGE_FLOOR = BigReal.pow2(1 << CUT_BITS)

DEFAULT_CAP = 16384


class Indeterminate(ArithmeticError):
    """Raised when an enclosure is too wide to decide or to continue."""


class DomainError(ValueError):
    """Argument certainly outside the domain of the operation."""


class Verdict(enum.Enum):
    LESS = "CertainlyLess"
    GREATER = "CertainlyGreater"
    INDETERMINATE = "Indeterminate"

    def __bool__(self):
        return self is not Verdict.INDETERMINATE


Scalar = Union[int, Fraction, BigReal]


def _bigreal_bounds(x: Scalar, prec: int) -> tuple[BigReal, BigReal]:
    if isinstance(x, BigReal):
        if x.bits <= prec:
            return x, x
        return x.round(prec, FLOOR), x.round(prec, CEIL)
    if isinstance(x, int):
        b = BigReal.from_int(x)
        return _bigreal_bounds(b, prec)
    if isinstance(x, Fraction):
        return BigReal.from_fraction(x, prec, FLOOR), BigReal.from_fraction(x, prec, CEIL)
    raise TypeError(f"cannot enclose {type(x).__name__}")


def enclose(x, prec: int) -> "Enclosure":
    if isinstance(x, (Interval, HugeInterval)):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a number here")
    if isinstance(x, BigReal) and not x.is_zero() and abs(x.magnitude()) > (1 << CUT_BITS):
        raise OverflowError("BigReal beyond the plain range; build a HugeInterval")
    lo, hi = _bigreal_bounds(x, prec)
    return Interval(lo, hi, prec)


class Interval:
    """Closed interval ``[lo, hi]`` with directed-rounded endpoints."""

    __slots__ = ("lo", "hi", "prec")

    def __init__(self, lo: BigReal, hi: BigReal, prec: int = br.DEFAULT_PREC):
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi
        self.prec = prec

    @classmethod
    def point(cls, x: Scalar, prec: int = br.DEFAULT_PREC) -> "Interval":
        lo, hi = _bigreal_bounds(x, prec)
        return cls(lo, hi, prec)

    @classmethod
    def from_bounds(cls, lo: Scalar, hi: Scalar, prec: int = br.DEFAULT_PREC) -> "Interval":
        return cls(_bigreal_bounds(lo, prec)[0], _bigreal_bounds(hi, prec)[1], prec)

    @classmethod
    def ln2(cls, prec: int) -> "Interval":
        return cls(br.ln2(prec, FLOOR), br.ln2(prec, CEIL), prec)

    @classmethod
    def log2e(cls, prec: int) -> "Interval":
        one = BigReal.from_int(1)
        return cls(br.div(one, br.ln2(prec, CEIL), prec, FLOOR),
                   br.div(one, br.ln2(prec, FLOOR), prec, CEIL), prec)

    def with_prec(self, prec: int) -> "Interval":
        return Interval(self.lo, self.hi, prec)

    # -- queries ---------------------------------------------------------
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return cmp_exact(self.lo, x) <= 0 <= cmp_exact(self.hi, x)

    def width(self) -> BigReal:
        return br.sub(self.hi, self.lo, self.prec, CEIL)

    def mid(self) -> BigReal:
        return br.add(self.lo, self.hi, self.prec + 1, Rounding.NEAREST).shift(-1)

    def sign(self) -> int:
        """+1/-1 when the sign is certain, 0 otherwise (includes the point 0)."""
        if self.lo.sign > 0:
            return 1
        if self.hi.sign < 0:
            return -1
        return 0

    def mag(self) -> BigReal:
        return max(abs(self.lo), abs(self.hi))

    def __repr__(self):
        return f"Interval[{self.lo}, {self.hi}]"

    def __float__(self):
        return float(self.mid())

    # -- arithmetic ------------------------------------------------------
    def __neg__(self):
        return Interval(-self.hi, -self.lo, self.prec)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(other, -self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def exp2(self):
        return pow2(self)

    def log2(self):
        return log2(self)

    def exp(self):
        return exp(self)

    def log(self):
        return log(self)


class HugeInterval:
    """``sign * [2**L.lo, 2**L.hi]`` for an enclosure ``L`` reaching past ``CUT``."""

    __slots__ = ("sgn", "lg", "prec")

    def __init__(self, sgn: int, lg: "Enclosure"):
        if sgn not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        self.sgn = sgn
        self.lg = lg  # enclosure of log2|x|
        self.prec = lg.prec

    def sign(self) -> int:
        return self.sgn

    def __repr__(self):
        return f"HugeInterval({'+' if self.sgn > 0 else '-'}2**{self.lg!r})"

    def __neg__(self):
        return HugeInterval(-self.sgn, self.lg)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(other, -self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def exp2(self):
        return pow2(self)

    def log2(self):
        return log2(self)

    def exp(self):
        return exp(self)

    def log(self):
        return log(self)


Enclosure = Union[Interval, HugeInterval]


def _as_enc(x, prec: int) -> Enclosure:
    return x if isinstance(x, (Interval, HugeInterval)) else enclose(x, prec)


def _prec(*xs) -> int:
    return max((x.prec for x in xs if isinstance(x, (Interval, HugeInterval))), default=br.DEFAULT_PREC)


def neg(x):
    return -x


# -- bounds ---------------------------------------------------------------
def lower(x: Enclosure) -> BigReal | None:
    """A BigReal lower bound, or ``None`` when none is representable."""
    if isinstance(x, Interval):
        return x.lo
    if x.sgn < 0:
        u = upper(-x)
        return None if u is None else -u
    ll = lower(x.lg)
    if ll is None or ll <= -CUT:
        return BigReal()
    if ll >= CUT:
        return _HUGE_FLOOR
    return br.exp2(ll, x.prec, FLOOR)


def upper(x: Enclosure) -> BigReal | None:
    """A BigReal upper bound, or ``None`` when none is representable."""
    if isinstance(x, Interval):
        return x.hi
    if x.sgn < 0:
        lo = lower(-x)
        return -lo
    ul = upper(x.lg)
    if ul is None or ul >= CUT:
        return None
    if ul <= -CUT:
        return _TINY
    return br.exp2(ul, x.prec, CEIL)


def to_plain(x: Enclosure) -> Interval:
    """Plain interval containing ``x``; raises if ``x`` may be beyond the plain range."""
    if isinstance(x, Interval):
        return x
    lo, hi = lower(x), upper(x)
    if lo is None or hi is None:
        raise Indeterminate("magnitude beyond the plain range")
    return Interval(lo, hi, x.prec)


def _bounded(h: HugeInterval) -> bool:
    u = upper(h.lg)
    return u is not None and u < CUT


def sign_of(x: Enclosure) -> int:
    return x.sign()


# -- construction helpers -----------------------------------------------
def pow2(L, sgn: int = 1) -> Enclosure:
    """``sgn * 2**L`` as a normalised enclosure."""
    if isinstance(L, Interval) and -CUT < L.lo and L.hi < CUT:
        prec = L.prec
        t = Interval(br.exp2(L.lo, prec, FLOOR), br.exp2(L.hi, prec, CEIL), prec)
        return t if sgn > 0 else -t
    return HugeInterval(sgn, L)


def _huge(sgn: int, L: Enclosure) -> Enclosure:
    return pow2(L, sgn)


# -- core ops -------------------------------------------------------------
def add(x, y) -> Enclosure:
    p = _prec(x, y)
    x, y = _as_enc(x, p), _as_enc(y, p)
    if isinstance(x, Interval) and isinstance(y, Interval):
        return Interval(br.add(x.lo, y.lo, p, FLOOR), br.add(x.hi, y.hi, p, CEIL), p)
    if isinstance(x, Interval):
        x, y = y, x
    if isinstance(y, Interval):
        return _add_huge_plain(x, y)
    return _add_huge_huge(x, y)


def _is_zero(x: Interval) -> bool:
    return x.lo.is_zero() and x.hi.is_zero()


def _add_huge_plain(h: HugeInterval, p: Interval) -> Enclosure:
    if _is_zero(p):
        return h
    if _bounded(h):
        return add(to_plain(h), p)
    prec = max(h.prec, p.prec)
    lm = br.log2(p.mag(), prec, CEIL)
    d = sub(h.lg, Interval.point(lm, prec))
    dlo = lower(d)
    if dlo is None or dlo < 2:
        raise Indeterminate("plain term not dominated by huge term")
    u = _TINY if dlo >= CUT else br.exp2(-dlo, prec, CEIL)
    two_u = u.shift(1)
    zero = BigReal()
    rel = p.sign() * h.sgn
    if rel > 0:
        delta = Interval(zero, two_u, prec)
    elif rel < 0:
        delta = Interval(-two_u, zero, prec)
    else:
        delta = Interval(-two_u, two_u, prec)
    return _huge(h.sgn, add(h.lg, delta))


def _log2_1p_pow2(t: Enclosure) -> Enclosure:
    """``log2(1 + 2**t)`` for an enclosure ``t``."""
    return log2(add(1, pow2(t)))


def _log2_1m_pow2(d: Enclosure) -> Enclosure:
    """``log2(1 - 2**-d)`` for ``d`` certainly positive."""
    if isinstance(d, HugeInterval):
        if d.sgn < 0 or lower(d) < 2:
            raise Indeterminate("magnitudes too close to subtract")
        if lower(d) >= CUT:
            return Interval(-_TINY.shift(1), BigReal(), d.prec)
        d = to_plain(d)
    if d.lo.sign <= 0:
        raise Indeterminate("magnitudes too close to subtract")
    prec = d.prec
    if d.lo >= CUT:
        return Interval(-_TINY.shift(1), BigReal(), prec)
    # 1 - 2**-d cancels for small d; carry enough extra bits
    wp = prec + max(0, -d.lo.magnitude()) + 16
    dd = Interval(d.lo, d.hi, wp)
    r = log2(add(1, -pow2(-dd)))
    if isinstance(r, HugeInterval):
        r = to_plain(r)
    return Interval(r.lo.round(prec, FLOOR), r.hi.round(prec, CEIL), prec)


def _add_huge_huge(x: HugeInterval, y: HugeInterval) -> Enclosure:
    if _bounded(x) and _bounded(y):
        return add(to_plain(x), to_plain(y))
    d = sub(x.lg, y.lg)
    s = d.sign()
    if x.sgn == y.sgn:
        if s >= 0:
            base, dd = x.lg, d
        else:
            base, dd = y.lg, neg(d)
        return _huge(x.sgn, add(base, _log2_1p_pow2(neg(dd))))
    if s == 0:
        raise Indeterminate("cannot order huge magnitudes of opposite sign")
    if s > 0:
        return _huge(x.sgn, add(x.lg, _log2_1m_pow2(d)))
    return _huge(y.sgn, add(y.lg, _log2_1m_pow2(neg(d))))


def sub(x, y) -> Enclosure:
    p = _prec(x, y)
    return add(_as_enc(x, p), neg(_as_enc(y, p)))


def mul(x, y) -> Enclosure:
    p = _prec(x, y)
    x, y = _as_enc(x, p), _as_enc(y, p)
    if isinstance(x, Interval) and isinstance(y, Interval):
        return _mul_plain(x, y, p)
    if isinstance(x, Interval):
        x, y = y, x
    if isinstance(y, Interval):
        if _is_zero(y):
            return Interval(BigReal(), BigReal(), p)
        s = y.sign()
        if s == 0:
            if _bounded(x):
                return _mul_plain(to_plain(x), y, p)
            raise Indeterminate("huge magnitude times an interval containing zero")
        ay = y if s > 0 else -y
        return _huge(x.sgn * s, add(x.lg, log2(ay)))
    return _huge(x.sgn * y.sgn, add(x.lg, y.lg))


def _mul_plain(x: Interval, y: Interval, p: int) -> Interval:
    if x.is_point() and y.is_point():
        return Interval(br.mul(x.lo, y.lo, p, FLOOR), br.mul(x.lo, y.lo, p, CEIL), p)
    pairs = [(x.lo, y.lo), (x.lo, y.hi), (x.hi, y.lo), (x.hi, y.hi)]
    los = [br.mul(a, b, p, FLOOR) for a, b in pairs]
    his = [br.mul(a, b, p, CEIL) for a, b in pairs]
    return Interval(min(los), max(his), p)


def div(x, y) -> Enclosure:
    p = _prec(x, y)
    x, y = _as_enc(x, p), _as_enc(y, p)
    if isinstance(y, Interval):
        s = y.sign()
        if s == 0:
            if _is_zero(y):
                raise ZeroDivisionError("division by zero")
            raise Indeterminate("divisor interval contains zero")
        if isinstance(x, Interval):
            cands_lo = [br.div(a, b, p, FLOOR) for a in (x.lo, x.hi) for b in (y.lo, y.hi)]
            cands_hi = [br.div(a, b, p, CEIL) for a in (x.lo, x.hi) for b in (y.lo, y.hi)]
            return Interval(min(cands_lo), max(cands_hi), p)
        ay = y if s > 0 else -y
        return _huge(x.sgn * s, sub(x.lg, log2(ay)))
    # huge divisor
    if isinstance(x, HugeInterval):
        return _huge(x.sgn * y.sgn, sub(x.lg, y.lg))
    return mul(x, pow2(neg(y.lg), y.sgn))


def log2(x) -> Enclosure:
    if isinstance(x, HugeInterval):
        if x.sgn < 0:
            raise DomainError("log of a negative quantity")
        return x.lg
    x = _as_enc(x, br.DEFAULT_PREC)
    if x.hi.sign <= 0:
        raise DomainError("log of a non-positive interval")
    if x.lo.sign <= 0:
        raise Indeterminate("log of an interval reaching zero")
    p = x.prec
    return Interval(br.log2(x.lo, p, FLOOR), br.log2(x.hi, p, CEIL), p)


def log(x) -> Enclosure:
    """Natural log enclosure."""
    lx = log2(x)
    return mul(lx, Interval.ln2(lx.prec))


def exp(x) -> Enclosure:
    x = _as_enc(x, br.DEFAULT_PREC)
    if isinstance(x, Interval) and x.is_point() and x.lo.is_zero():
        return Interval.point(1, x.prec)
    return pow2(mul(x, Interval.log2e(x.prec)))


def exp2(x) -> Enclosure:
    return pow2(_as_enc(x, br.DEFAULT_PREC))


# -- comparison ------------------------------------------------------------
def compare(a, b) -> Verdict:
    """Certified three-way comparison; never claims an inequality that could be false."""
    p = _prec(a, b)
    a, b = _as_enc(a, p), _as_enc(b, p)
    if isinstance(a, Interval) and isinstance(b, Interval):
        if a.hi < b.lo:
            return Verdict.LESS
        if a.lo > b.hi:
            return Verdict.GREATER
        return Verdict.INDETERMINATE
    try:
        s = sub(a, b).sign()
    except Indeterminate:
        return Verdict.INDETERMINATE
    if s > 0:
        return Verdict.GREATER
    if s < 0:
        return Verdict.LESS
    return Verdict.INDETERMINATE


def hull(a: Enclosure, b: Enclosure) -> Enclosure:
    if isinstance(a, Interval) and isinstance(b, Interval):
        return Interval(min(a.lo, b.lo), max(a.hi, b.hi), max(a.prec, b.prec))
    if isinstance(a, HugeInterval) and isinstance(b, HugeInterval) and a.sgn == b.sgn:
        return HugeInterval(a.sgn, hull(a.lg, b.lg))
    raise Indeterminate("hull of enclosures of different kinds")


def cmp_exact(b: BigReal, x: Scalar) -> int:
    """Exact sign of ``b - x`` for a BigReal and an int/Fraction/BigReal."""
    from mpmath import libmp

    if isinstance(x, BigReal):
        return libmp.mpf_cmp(b.mpf, x.mpf)
    x = Fraction(x)
    lhs = libmp.mpf_mul(b.mpf, libmp.from_int(x.denominator))
    return libmp.mpf_cmp(lhs, libmp.from_int(x.numerator))


def contains(enc: Enclosure, x: Scalar) -> bool:
    if isinstance(enc, Interval):
        return enc.contains(x)
    xb = BigReal.coerce(x) if not isinstance(x, BigReal) else x
    if xb.sign != enc.sgn:
        return False
    lx = br.log2(abs(xb), enc.prec + 64, Rounding.FLOOR), br.log2(abs(xb), enc.prec + 64, Rounding.CEILING)
    inner = enc.lg
    if isinstance(inner, Interval):
        return inner.lo <= lx[0] and lx[1] <= inner.hi
    return contains(inner, lx[0]) and contains(inner, lx[1])


# -- JSON -------------------------------------------------------------------
def to_json(x: Enclosure):
    if isinstance(x, Interval):
        return {"lo": x.lo.to_json(), "hi": x.hi.to_json()}
    return {"sign": x.sgn, "log2": to_json(x.lg)}


def from_json(obj, prec: int = br.DEFAULT_PREC) -> Enclosure:
    if "log2" in obj:
        return HugeInterval(int(obj["sign"]), from_json(obj["log2"], prec))
    return Interval(BigReal.from_json(obj["lo"]), BigReal.from_json(obj["hi"]), prec)


# -- precision escalation ---------------------------------------------------
T = TypeVar("T")


def escalate(fn: Callable[[int], T], prec: int = br.DEFAULT_PREC, cap: int = DEFAULT_CAP) -> tuple[T, int]:
    """Run ``fn(prec)`` doubling ``prec`` while it is indeterminate.

    Returns ``(result, precision_used)``. An :class:`Indeterminate` raised at
    the cap propagates; an indeterminate :class:`Verdict` at the cap is
    returned as is.
    """
    p = prec
    while True:
        try:
            out = fn(p)
        except Indeterminate:
            if p * 2 > cap:
                raise
            p *= 2
            continue
        if isinstance(out, Verdict) and out is Verdict.INDETERMINATE and p * 2 <= cap:
            p *= 2
            continue
        return out, p


def certified_compare(a, b, prec: int | None = None, cap: int = DEFAULT_CAP) -> Verdict:
    """Compare two enclosures (or callables building them at a precision).

    Plain enclosures are compared as given. Callables ``f(prec)`` are
    re-evaluated with doubled precision while the verdict is indeterminate.
    """
    if callable(a) or callable(b):
        fa = a if callable(a) else (lambda p, _a=a: _a)
        fb = b if callable(b) else (lambda p, _b=b: _b)
        v, _ = escalate(lambda p: compare(fa(p), fb(p)), prec or br.DEFAULT_PREC, cap)
        return v
    return compare(a, b)


def rel_width(x: Enclosure) -> BigReal:
    """Relative width ``(hi-lo)/min|x|`` of a plain enclosure away from zero."""
    if not isinstance(x, Interval):
        raise TypeError("relative width needs a plain interval")
    if x.sign() == 0:
        raise Indeterminate("interval touches zero")
    return br.div(x.width(), min(abs(x.lo), abs(x.hi)), 64, CEIL)
