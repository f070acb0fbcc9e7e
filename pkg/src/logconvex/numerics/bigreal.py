"""Binary floating point reals with an unbounded integer exponent.

A :class:`BigReal` is an exact dyadic rational ``sign * mantissa * 2**exponent``.
Rounding happens only inside the arithmetic helpers, which always take an
explicit precision (in mantissa bits) and a :class:`Rounding` direction.

The heavy lifting is done by the raw ``mpf`` routines of ``mpmath.libmp``
(gmpy2-backed when available). Transcendentals are evaluated with guard bits
and then widened outward so the directed results are safe.
"""

from __future__ import annotations

import enum
import re
from fractions import Fraction
from typing import Union

from mpmath import libmp

__all__ = [
    "BigReal",
    "Rounding",
    "DEFAULT_PREC",
    "GUARD_BITS",
    "add",
    "sub",
    "mul",
    "div",
    "exp",
    "log",
    "log2",
    "exp2",
    "ln2",
]

DEFAULT_PREC = 256
GUARD_BITS = 32
# decimal rendering is exact but grows with |exponent|; beyond this use p-form
_DECIMAL_EXP_LIMIT = 1100


class Rounding(enum.Enum):
    FLOOR = libmp.round_floor
    CEILING = libmp.round_ceiling
    NEAREST = libmp.round_nearest

    @property
    def opposite(self) -> "Rounding":
        if self is Rounding.FLOOR:
            return Rounding.CEILING
        if self is Rounding.CEILING:
            return Rounding.FLOOR
        return self


Number = Union[int, Fraction, "BigReal"]


class BigReal:
    """Exact dyadic rational with arbitrary precision mantissa and exponent."""

    __slots__ = ("_mpf",)

    def __init__(self, mpf=libmp.fzero):
        if mpf[1] == 0 and mpf != libmp.fzero:
            raise ValueError("special values (inf/nan) are not BigReals")
        self._mpf = mpf

    # -- construction -------------------------------------------------
    @classmethod
    def from_int(cls, n: int) -> "BigReal":
        return cls(libmp.from_int(int(n)))

    @classmethod
    def from_man_exp(cls, man: int, exp: int) -> "BigReal":
        return cls(libmp.from_man_exp(int(man), int(exp)))

    @classmethod
    def pow2(cls, k: int) -> "BigReal":
        return cls(libmp.from_man_exp(1, int(k)))

    @classmethod
    def from_fraction(cls, q: Fraction, prec: int, rnd: Rounding) -> "BigReal":
        q = Fraction(q)
        if q.denominator & (q.denominator - 1) == 0:
            # dyadic: exact
            return cls(libmp.from_man_exp(q.numerator, 1 - q.denominator.bit_length()))
        return cls(libmp.from_rational(q.numerator, q.denominator, prec, rnd.value))

    @classmethod
    def from_float(cls, x: float) -> "BigReal":
        return cls(libmp.from_float(float(x)))

    @classmethod
    def coerce(cls, x: Number) -> "BigReal":
        """Exact conversion; raises for non-dyadic rationals."""
        if isinstance(x, BigReal):
            return x
        if isinstance(x, int):
            return cls.from_int(x)
        if isinstance(x, Fraction):
            if x.denominator & (x.denominator - 1):
                raise ValueError(f"{x} is not a dyadic rational")
            return cls.from_fraction(x, 0, Rounding.NEAREST)
        if isinstance(x, float):
            return cls.from_float(x)
        raise TypeError(f"cannot convert {type(x).__name__} to BigReal")

    # -- fields -------------------------------------------------------
    @property
    def sign(self) -> int:
        if self._mpf[1] == 0:
            return 0
        return -1 if self._mpf[0] else 1

    @property
    def mantissa(self) -> int:
        return self._mpf[1]

    @property
    def exponent(self) -> int:
        return self._mpf[2]

    @property
    def bits(self) -> int:
        return self._mpf[3]

    @property
    def mpf(self):
        return self._mpf

    def is_zero(self) -> bool:
        return self._mpf[1] == 0

    def is_integer(self) -> bool:
        return self._mpf[1] == 0 or self._mpf[2] >= 0

    def magnitude(self) -> int:
        """Integer ``e`` with ``2**(e-1) <= |x| < 2**e``."""
        if self.is_zero():
            raise ValueError("zero has no magnitude")
        return self._mpf[2] + self._mpf[3]

    def to_fraction(self) -> Fraction:
        if abs(self.exponent) > 1 << 20:
            raise OverflowError("exponent too large for an exact Fraction")
        p, q = libmp.to_rational(self._mpf)
        return Fraction(p, q)

    def to_int(self) -> int:
        if not self.is_integer():
            raise ValueError("not an integer")
        return libmp.to_int(self._mpf)

    def floor(self) -> int:
        return libmp.to_int(libmp.mpf_floor(self._mpf))

    def __float__(self) -> float:
        return libmp.to_float(self._mpf)

    # -- exact comparisons --------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            try:
                other = BigReal.coerce(other)
            except ValueError:
                return False
        if not isinstance(other, BigReal):
            return NotImplemented
        return self._mpf == other._mpf

    def __hash__(self):
        return hash(self._mpf)

    def _cmp(self, other) -> int:
        if not isinstance(other, BigReal):
            other = BigReal.coerce(other)
        return libmp.mpf_cmp(self._mpf, other._mpf)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __neg__(self) -> "BigReal":
        return BigReal(libmp.mpf_neg(self._mpf))

    def __abs__(self) -> "BigReal":
        return BigReal(libmp.mpf_abs(self._mpf))

    def shift(self, k: int) -> "BigReal":
        """Exact multiplication by ``2**k``."""
        return BigReal(libmp.mpf_shift(self._mpf, int(k)))

    def round(self, prec: int, rnd: Rounding) -> "BigReal":
        return BigReal(libmp.mpf_pos(self._mpf, prec, rnd.value))

    def next_up(self, prec: int) -> "BigReal":
        """Smallest precision-``prec`` number strictly greater than ``self``."""
        x = self.round(prec, Rounding.CEILING)
        if x != self:
            return x
        if x.is_zero():
            raise ValueError("next_up(0) is unbounded below in this format")
        # ulp at the current binade
        e = x.magnitude() - prec
        return BigReal(libmp.mpf_add(x._mpf, libmp.from_man_exp(1, e), prec, libmp.round_ceiling))

    # -- serialization ------------------------------------------------
    def to_json(self):
        """Exact JSON form: ``{"pow2": k}``, a decimal string, or ``"<m>p<e>"``."""
        s, man, e, _ = self._mpf
        if man == 1 and not s:
            return {"pow2": e}
        return self.to_string()

    def to_string(self) -> str:
        s, man, e, _ = self._mpf
        if man == 0:
            return "0"
        sign = "-" if s else ""
        if abs(e) > _DECIMAL_EXP_LIMIT:
            return f"{sign}{man}p{e}"
        if e >= 0:
            digits, dexp = man << e, 0
        else:
            digits, dexp = man * 5 ** (-e), e
        stripped = str(digits).rstrip("0")
        dexp += len(str(digits)) - len(stripped)
        return f"{sign}{stripped}e{dexp}" if dexp else f"{sign}{stripped}"

    @classmethod
    def from_json(cls, obj) -> "BigReal":
        if isinstance(obj, dict):
            if set(obj) != {"pow2"}:
                raise ValueError(f"bad BigReal object {obj!r}")
            return cls.pow2(int(obj["pow2"]))
        if isinstance(obj, int) and not isinstance(obj, bool):
            return cls.from_int(obj)
        if not isinstance(obj, str):
            raise ValueError(f"bad BigReal value {obj!r}")
        return cls.parse(obj)

    _P_FORM = re.compile(r"^([+-]?\d+)p([+-]?\d+)$")
    _DEC_FORM = re.compile(r"^([+-]?)(\d+)(?:\.(\d*))?(?:[eE]([+-]?\d+))?$")

    @classmethod
    def parse(cls, text: str, prec: int | None = None, rnd: Rounding = Rounding.NEAREST) -> "BigReal":
        """Parse a p-form or decimal string.

        Without ``prec`` the value must be exactly representable (dyadic);
        with ``prec`` it is rounded in direction ``rnd``.
        """
        text = text.strip()
        m = cls._P_FORM.match(text)
        if m:
            return cls.from_man_exp(int(m.group(1)), int(m.group(2)))
        m = cls._DEC_FORM.match(text)
        if not m:
            raise ValueError(f"cannot parse BigReal from {text!r}")
        sign, ipart, fpart, dexp = m.groups()
        fpart = fpart or ""
        digits = int(ipart + fpart) * (-1 if sign == "-" else 1)
        dexp = int(dexp or 0) - len(fpart)
        if dexp >= 0:
            return cls.from_int(digits * 10**dexp)
        if prec is None:
            den5 = 5 ** (-dexp)
            if digits % den5:
                raise ValueError(f"{text!r} is not exactly representable in binary")
            return cls.from_man_exp(digits // den5, dexp)
        return cls.from_fraction(Fraction(digits, 10 ** (-dexp)), prec, rnd)

    def __repr__(self):
        return f"BigReal({self.to_string()!r})"

    def __str__(self):
        if self.is_zero():
            return "0"
        if abs(self.magnitude()) < 1000:
            return libmp.to_str(self._mpf, 20)
        return self.to_string()


# -- directed arithmetic ----------------------------------------------------
def add(x: BigReal, y: BigReal, prec: int, rnd: Rounding) -> BigReal:
    return BigReal(libmp.mpf_add(x.mpf, y.mpf, prec, rnd.value))


def sub(x: BigReal, y: BigReal, prec: int, rnd: Rounding) -> BigReal:
    return BigReal(libmp.mpf_sub(x.mpf, y.mpf, prec, rnd.value))


def mul(x: BigReal, y: BigReal, prec: int, rnd: Rounding) -> BigReal:
    return BigReal(libmp.mpf_mul(x.mpf, y.mpf, prec, rnd.value))


def div(x: BigReal, y: BigReal, prec: int, rnd: Rounding) -> BigReal:
    if y.is_zero():
        raise ZeroDivisionError("BigReal division by zero")
    return BigReal(libmp.mpf_div(x.mpf, y.mpf, prec, rnd.value))


def _widen(y, wp: int, prec: int, rnd: Rounding) -> BigReal:
    # y carries relative error < 2**-(wp-8); push it past that bound
    if y[1] == 0:
        return BigReal(y)
    slack = libmp.mpf_shift(libmp.mpf_abs(y), -(wp - 8))
    if rnd is Rounding.FLOOR:
        return BigReal(libmp.mpf_sub(y, slack, prec, libmp.round_floor))
    if rnd is Rounding.CEILING:
        return BigReal(libmp.mpf_add(y, slack, prec, libmp.round_ceiling))
    return BigReal(libmp.mpf_pos(y, prec, libmp.round_nearest))


def ln2(prec: int, rnd: Rounding) -> BigReal:
    wp = prec + GUARD_BITS
    return _widen(libmp.mpf_ln2(wp, libmp.round_nearest), wp, prec, rnd)


def exp(x: BigReal, prec: int, rnd: Rounding) -> BigReal:
    """Directed ``e**x``. Callers keep ``|x|`` below ~2**128."""
    if x.is_zero():
        return BigReal(libmp.fone)
    wp = prec + GUARD_BITS
    return _widen(libmp.mpf_exp(x.mpf, wp, libmp.round_nearest), wp, prec, rnd)


def log(x: BigReal, prec: int, rnd: Rounding) -> BigReal:
    if x.sign <= 0:
        raise ValueError("log of a non-positive BigReal")
    if x.mpf == libmp.fone:
        return BigReal()
    # libmp adds bits for the exponent itself; add the guard on top
    wp = prec + GUARD_BITS + max(0, abs(x.magnitude()).bit_length())
    return _widen(libmp.mpf_log(x.mpf, wp, libmp.round_nearest), wp, prec, rnd)


def log2(x: BigReal, prec: int, rnd: Rounding) -> BigReal:
    """Directed ``log2(x)``; exact for powers of two."""
    if x.sign <= 0:
        raise ValueError("log2 of a non-positive BigReal")
    s, man, e, bc = x.mpf
    if man == 1:
        return BigReal.from_int(e).round(prec, rnd)
    top = e + bc
    # frac = log2(man / 2**bc) in [-1, 0)
    wp = prec + GUARD_BITS + top.bit_length()
    mant = libmp.from_man_exp(man, -bc)
    frac = libmp.mpf_div(libmp.mpf_log(mant, wp, libmp.round_nearest),
                         libmp.mpf_ln2(wp, libmp.round_nearest), wp, libmp.round_nearest)
    # frac has relative error ~2**-(wp-2); widen before adding the integer part
    slack = libmp.mpf_shift(libmp.mpf_abs(frac), -(wp - 8))
    if rnd is Rounding.FLOOR:
        frac = libmp.mpf_sub(frac, slack, wp, libmp.round_floor)
    elif rnd is Rounding.CEILING:
        frac = libmp.mpf_add(frac, slack, wp, libmp.round_ceiling)
    return BigReal(libmp.mpf_add(libmp.from_int(top), frac, prec, rnd.value))


def exp2(x: BigReal, prec: int, rnd: Rounding) -> BigReal:
    """Directed ``2**x``; the integer part of ``x`` goes into the exponent exactly."""
    if not x.is_zero() and x.magnitude() < -(prec + 8):
        # |x| far below one ulp of 1: 1 - |x| <= 2**x <= 1 + 2|x|
        if x.sign > 0 and rnd is Rounding.CEILING:
            return BigReal(libmp.mpf_add(libmp.fone, libmp.from_man_exp(1, 1 - prec), 0))
        if x.sign < 0 and rnd is Rounding.FLOOR:
            return BigReal(libmp.mpf_sub(libmp.fone, libmp.from_man_exp(1, -prec), 0))
        return BigReal(libmp.fone)
    n = x.floor()
    frac = libmp.mpf_sub(x.mpf, libmp.from_int(n), 0)  # exact, in [0, 1)
    if frac[1] == 0:
        return BigReal.pow2(n)
    wp = prec + GUARD_BITS
    arg = libmp.mpf_mul(frac, libmp.mpf_ln2(wp + 8, libmp.round_nearest), wp + 8, libmp.round_nearest)
    y = libmp.mpf_exp(arg, wp, libmp.round_nearest)
    return _widen(y, wp, prec, rnd).shift(n)
