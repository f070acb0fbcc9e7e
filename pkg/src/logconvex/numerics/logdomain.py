"""Positive quantities carried by their natural logarithm.

A :class:`LogValue` holds an enclosure of ``ln q``; ``q = 0`` is the distinct
element :data:`NEG_INFINITY`. Products are sums of logs, and sums go through
:func:`log_add_exp`, so ``e**(10**6) * e**(-10**6)`` never leaves the log
domain.
"""

from __future__ import annotations

from fractions import Fraction

from . import bigreal as br
from . import enclosure as enc
from .bigreal import BigReal
from .enclosure import DomainError, Enclosure, HugeInterval, Indeterminate, Interval, Verdict

__all__ = ["LogValue", "NEG_INFINITY", "log_add_exp", "log_sub_exp", "log1mexp", "log1pexp"]


class LogValue:
    """``ln q`` for ``q >= 0``; ``enc is None`` means ``q = 0``."""

    __slots__ = ("enc",)

    def __init__(self, value: Enclosure | None):
        self.enc = value

    @classmethod
    def of(cls, x, prec: int = br.DEFAULT_PREC) -> "LogValue":
        """Log of a positive number or enclosure."""
        e = enc.enclose(x, prec) if not isinstance(x, (Interval, HugeInterval)) else x
        if isinstance(e, Interval) and e.lo.is_zero() and e.hi.is_zero():
            return NEG_INFINITY
        return cls(enc.log(e))

    @classmethod
    def from_log(cls, x, prec: int = br.DEFAULT_PREC) -> "LogValue":
        return cls(enc.enclose(x, prec))

    def is_zero(self) -> bool:
        return self.enc is None

    @property
    def prec(self) -> int:
        return br.DEFAULT_PREC if self.enc is None else self.enc.prec

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.enc is None or other.enc is None:
            return NEG_INFINITY
        return LogValue(enc.add(self.enc, other.enc))

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.enc is None:
            raise ZeroDivisionError("division by a zero LogValue")
        if self.enc is None:
            return NEG_INFINITY
        return LogValue(enc.sub(self.enc, other.enc))

    def scale(self, log_factor) -> "LogValue":
        """Multiply the quantity by ``e**log_factor``."""
        if self.enc is None:
            return self
        return LogValue(enc.add(self.enc, log_factor))

    def value(self) -> Enclosure:
        """Enclosure of ``q`` itself."""
        if self.enc is None:
            return Interval.point(0, br.DEFAULT_PREC)
        return enc.exp(self.enc)

    def log10(self) -> Enclosure:
        if self.enc is None:
            raise DomainError("log10 of zero")
        p = self.enc.prec
        ln10 = enc.log(Interval.point(10, p))
        return enc.div(self.enc, ln10)

    def __repr__(self):
        return "LogValue(-inf)" if self.enc is None else f"LogValue({self.enc!r})"

    def to_json(self):
        return None if self.enc is None else enc.to_json(self.enc)


NEG_INFINITY = LogValue(None)


def _as_log(x) -> LogValue:
    if isinstance(x, LogValue):
        return x
    return LogValue.from_log(x)


def log1pexp(d: Enclosure) -> Enclosure:
    """``ln(1 + e**d)``."""
    if d.sign() > 0:
        # ln(1+e^d) = d + ln(1+e^-d)
        return enc.add(d, log1pexp(enc.neg(d)))
    t = enc.exp(d)
    if isinstance(t, HugeInterval):
        t = enc.to_plain(t)
    return enc.log(enc.add(1, t))


def log1mexp(d: Enclosure) -> Enclosure:
    """``ln(1 - e**d)`` for ``d < 0``, accurate when ``d`` is near zero."""
    s = d.sign()
    if s >= 0:
        if isinstance(d, Interval) and d.hi.sign > 0 and d.lo.sign >= 0:
            raise DomainError("negative quantity in log domain")
        raise Indeterminate("gap enclosure touches zero")
    if isinstance(d, HugeInterval):
        if d.lg.sign() > 0:
            # e**d is below every plain magnitude
            t = enc.to_plain(enc.exp(d))
            return enc.log(enc.sub(1, t))
        d = enc.to_plain(d)
    p = d.prec
    # 1 - e^d loses about log2(1/|d|) bits to cancellation
    lost = max(0, -d.hi.magnitude()) if not d.hi.is_zero() else 0
    wp = p + lost + 16
    dw = Interval(d.lo, d.hi, wp)
    one_minus = enc.sub(1, enc.exp(dw))
    if one_minus.sign() <= 0:
        raise Indeterminate("cannot separate 1 - e**d from zero")
    r = enc.log(one_minus)
    return Interval(r.lo.round(p, br.Rounding.FLOOR), r.hi.round(p, br.Rounding.CEILING), p)


def log_add_exp(x, y) -> LogValue:
    """``ln(e**x + e**y)``; never overflows, and NEG_INFINITY is the identity."""
    x, y = _as_log(x), _as_log(y)
    if x.enc is None:
        return y
    if y.enc is None:
        return x
    a, b = x.enc, y.enc
    # pivot on the larger upper end so the exponent gap is mostly negative
    if enc.compare(a, b) is Verdict.LESS:
        a, b = b, a
    return LogValue(enc.add(a, log1pexp(enc.sub(b, a))))


def log_sub_exp(x, y) -> LogValue:
    """``ln(e**x - e**y)`` for ``x >= y``; NEG_INFINITY when ``x == y``."""
    x, y = _as_log(x), _as_log(y)
    if y.enc is None:
        return x
    if x.enc is None:
        raise DomainError("negative quantity in log domain")
    a, b = x.enc, y.enc
    if _same_point(a, b):
        return NEG_INFINITY
    v = enc.compare(a, b)
    if v is Verdict.LESS:
        raise DomainError("negative quantity in log domain")
    if v is Verdict.INDETERMINATE:
        raise Indeterminate("cannot order the operands of log_sub_exp")
    return LogValue(enc.add(a, log1mexp(enc.sub(b, a))))


def log_sub_exp_gap(x: Enclosure, gap: Enclosure) -> Enclosure:
    """``ln(e**x - e**(x+gap))`` with the gap supplied exactly (``gap < 0``)."""
    return enc.add(x, log1mexp(gap))


def _same_point(a: Enclosure, b: Enclosure) -> bool:
    # identical enclosures are read as the same quantity (x - x = 0)
    if a is b:
        return True
    if isinstance(a, Interval) and isinstance(b, Interval):
        return a.lo == b.lo and a.hi == b.hi
    if isinstance(a, HugeInterval) and isinstance(b, HugeInterval):
        return a.sgn == b.sgn and _same_point(a.lg, b.lg)
    return False
