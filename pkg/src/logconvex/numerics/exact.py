"""Exact values too large for any rational: tower integers and power sums.

The breakpoints of the construction are powers of two ``2**E`` whose exponent
``E`` itself outgrows memory after a few levels, and the intercepts are sums of
rational multiples of such powers. Two small exact types cover this:

* a *tower number* is either a Python ``int`` or a :class:`Dyadic`
  ``man * 2**exp`` whose exponent is again a tower number;
* an :class:`ExactReal` is ``const + sum(coef_i * 2**E_i)`` with rational
  ``const`` and ``coef_i`` and tower-number keys ``E_i``.

Canonical forms make equality structural, which is how continuity of the
constructed function is checked without rounding.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

from . import bigreal as br
from . import enclosure as enc
from .bigreal import BigReal, Rounding
from .enclosure import Enclosure, HugeInterval, Indeterminate, Interval

__all__ = [
    "Dyadic",
    "TowerNum",
    "tower",
    "tower_cmp",
    "tower_enclose",
    "tower_from_bigreal",
    "tower_to_json",
    "tower_from_json",
    "pow2_exponent_above",
    "ExactReal",
    "INT_BITS_LIMIT",
    "FOLD_GAP",
]

# ints wider than this are stored as Dyadic
INT_BITS_LIMIT = 4096
# int-keyed atoms closer than this are merged; keys below it fold into const
FOLD_GAP = 4096
# decimal strings above this many bits are written in hex (int->str limits)
_DEC_BITS = 12000


def _q_str(q: Fraction) -> str:
    def one(n: int) -> str:
        if abs(n).bit_length() > _DEC_BITS:
            return ("-" if n < 0 else "") + hex(abs(n))
        return str(n)

    if q.denominator == 1:
        return one(q.numerator)
    return f"{one(q.numerator)}/{one(q.denominator)}"


def _parse_int(s: str) -> int:
    s = s.strip()
    neg = s.startswith("-")
    body = s[1:] if neg else s
    v = int(body, 16) if body.lower().startswith("0x") else int(body)
    return -v if neg else v


def parse_rational(s) -> Fraction:
    """Parse ``"p/q"``, an integer string, or an int."""
    if isinstance(s, bool):
        raise ValueError("bool is not a rational")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, Fraction):
        return s
    if not isinstance(s, str):
        raise ValueError(f"bad rational {s!r}")
    if "/" in s:
        p, q = s.split("/", 1)
        den = _parse_int(q)
        if den == 0:
            raise ValueError(f"zero denominator in {s!r}")
        return Fraction(_parse_int(p), den)
    if "." in s or "e" in s.lower() and not s.lower().lstrip("-").startswith("0x"):
        return Fraction(s)
    return Fraction(_parse_int(s))


# -- tower numbers ------------------------------------------------------------
class Dyadic:
    """Positive integer ``man * 2**exp`` too wide to hold as an ``int``."""

    __slots__ = ("man", "exp")

    def __init__(self, man: int, exp: "TowerNum"):
        self.man = man
        self.exp = exp

    def __eq__(self, other):
        return isinstance(other, Dyadic) and self.man == other.man and self.exp == other.exp

    def __hash__(self):
        return hash(("Dyadic", self.man, self.exp))

    def __repr__(self):
        return f"Dyadic({self.man}, {self.exp!r})"


TowerNum = Union[int, Dyadic]


def tower(man: int, exp: TowerNum = 0) -> TowerNum:
    """Canonical tower number for ``man * 2**exp`` (``man >= 0``)."""
    if man < 0:
        raise ValueError("tower numbers used as exponents here are nonnegative")
    if man == 0:
        return 0
    if isinstance(exp, int):
        if exp < 0:
            raise ValueError("negative shift")
        tz = (man & -man).bit_length() - 1
        man >>= tz
        exp += tz
        if exp + man.bit_length() <= INT_BITS_LIMIT:
            return man << exp
        return Dyadic(man, exp)
    return Dyadic(man, exp)


def tower_cmp(x: TowerNum, y: TowerNum) -> int:
    """Exact three-way comparison of canonical tower numbers."""
    if isinstance(x, int) and isinstance(y, int):
        return (x > y) - (x < y)
    if isinstance(x, int):
        return -1
    if isinstance(y, int):
        return 1
    c = tower_cmp(x.exp, y.exp)
    if c == 0:
        return (x.man > y.man) - (x.man < y.man)
    if isinstance(x.exp, int) and isinstance(y.exp, int):
        d = x.exp - y.exp
        if abs(d) <= 4 * INT_BITS_LIMIT + max(x.man.bit_length(), y.man.bit_length()):
            a, b = (x.man << d, y.man) if d > 0 else (x.man, y.man << -d)
            return (a > b) - (a < b)
    # distinct huge exponents differ by far more than any mantissa width
    return c


def tower_from_bigreal(x: BigReal) -> TowerNum:
    if x.sign < 0:
        raise ValueError("negative tower number")
    if not x.is_integer():
        raise ValueError("tower numbers are integers")
    if x.is_zero():
        return 0
    return tower(x.mantissa, x.exponent)


def tower_enclose(t: TowerNum, prec: int) -> Enclosure:
    """Enclosure of the value of a tower number."""
    if isinstance(t, int):
        return Interval.point(BigReal.from_int(t), prec)
    if isinstance(t.exp, int):
        return Interval.point(BigReal.from_man_exp(t.man, t.exp), prec)
    lg = enc.add(enc.log2(Interval.point(t.man, prec)), tower_enclose(t.exp, prec))
    return HugeInterval(1, lg)


def tower_log2_enclose(t: TowerNum, prec: int) -> Enclosure:
    """Enclosure of ``log2`` of a positive tower number."""
    if isinstance(t, int):
        return enc.log2(Interval.point(t, prec))
    return enc.add(enc.log2(Interval.point(t.man, prec)), tower_enclose(t.exp, prec))


def tower_to_json(t: TowerNum):
    if isinstance(t, int):
        return t if t.bit_length() <= 64 * 8 else _q_str(Fraction(t))
    return {"man": _q_str(Fraction(t.man)), "exp2": tower_to_json(t.exp)}


def tower_from_json(obj) -> TowerNum:
    if isinstance(obj, bool):
        raise ValueError("bad tower number")
    if isinstance(obj, int):
        return obj
    if isinstance(obj, str):
        return _parse_int(obj)
    if isinstance(obj, dict) and set(obj) == {"man", "exp2"}:
        t = tower(_parse_int(str(obj["man"])), tower_from_json(obj["exp2"]))
        return t
    raise ValueError(f"bad tower number {obj!r}")


def tower_str(t: TowerNum) -> str:
    if isinstance(t, int):
        return str(t) if t.bit_length() < 200 else f"~2^{t.bit_length()}"
    return f"{t.man}*2^({tower_str(t.exp)})"


def pow2_exponent_above(L: Enclosure, prec: int) -> TowerNum:
    """A tower number ``E`` with ``E > L`` for every point of the enclosure ``L``.

    When ``floor(L.hi) + 1`` fits an int it is returned, so ``2**E`` is the
    smallest power of two above ``2**L.hi``. Past that, ``E`` is the next
    precision-``prec`` number above the bound (nested for towers).
    """
    if isinstance(L, Interval):
        hi = L.hi
        if hi.sign <= 0:
            return 0 if hi.sign < 0 else 1
        if hi.magnitude() <= INT_BITS_LIMIT:
            return hi.floor() + 1
        return tower_from_bigreal(hi.next_up(prec))
    if L.sgn < 0:
        # L is negative: any nonnegative E works
        return 0
    x = pow2_exponent_above(L.lg, prec)
    return tower(1, x)


def smallest_pow2_exponent_above(T: Enclosure, prec: int) -> TowerNum:
    """Exponent of the smallest power of two certainly above the enclosure ``T``.

    Exact when ``T`` is a plain interval; otherwise defers to
    :func:`pow2_exponent_above` on ``log2 T``.
    """
    if isinstance(T, Interval):
        hi = T.hi
        if hi.sign <= 0:
            raise ValueError("threshold must be positive")
        man, e = hi.mantissa, hi.exponent
        # man odd: hi = 2**e exactly when man == 1, else 2**(e+bitlen-1) < hi < 2**(e+bitlen)
        k = e + man.bit_length() if man != 1 else e + 1
        if k < 0:
            raise ValueError("breakpoints are at least 1")
        return k
    if T.sgn < 0:
        raise ValueError("threshold must be positive")
    return pow2_exponent_above(T.lg, prec)


# -- exact reals ----------------------------------------------------------------
def _v2(n: int) -> int:
    return (n & -n).bit_length() - 1


class ExactReal:
    """``const + sum(coef * 2**key)`` in canonical form.

    Int keys closer than :data:`FOLD_GAP` are merged and their coefficients
    have odd numerator and denominator; int keys with ``|key| < FOLD_GAP`` are
    folded into ``const``. Tower (Dyadic) keys merge only when equal.
    """

    __slots__ = ("const", "terms")

    def __init__(self, const=0, terms: Iterable[tuple[Fraction, TowerNum]] = ()):
        const = Fraction(const)
        self.const, self.terms = _canonical(const, list(terms))

    @classmethod
    def _raw(cls, const: Fraction, terms: tuple) -> "ExactReal":
        obj = object.__new__(cls)
        obj.const = const
        obj.terms = terms
        return obj

    # -- constructors ----------------------------------------------------
    @classmethod
    def pow2(cls, key: TowerNum, coef=1) -> "ExactReal":
        return cls(0, [(Fraction(coef), key)])

    @classmethod
    def coerce(cls, x) -> "ExactReal":
        if isinstance(x, ExactReal):
            return x
        if isinstance(x, BigReal):
            return cls.from_bigreal(x)
        if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
            return cls(x)
        if isinstance(x, str):
            return cls(parse_rational(x))
        raise TypeError(f"cannot make an ExactReal from {type(x).__name__}")

    @classmethod
    def from_bigreal(cls, x: BigReal) -> "ExactReal":
        if x.is_zero():
            return cls(0)
        man = -x.mantissa if x.sign < 0 else x.mantissa
        e = x.exponent
        if abs(e) < FOLD_GAP:
            return cls(Fraction(man) * Fraction(2) ** e)
        return cls(0, [(Fraction(man), e)])

    # -- queries -----------------------------------------------------------
    def is_rational(self) -> bool:
        return not self.terms

    def as_fraction(self) -> Fraction:
        if self.terms:
            raise OverflowError("value is not held as a plain rational")
        return self.const

    def is_zero(self) -> bool:
        return not self.terms and self.const == 0

    def key(self):
        return (self.const, self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExactReal(other)
        if not isinstance(other, ExactReal):
            return NotImplemented
        return self.const == other.const and self.terms == other.terms

    def __hash__(self):
        return hash((self.const, self.terms))

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        other = ExactReal.coerce(other)
        return ExactReal(self.const + other.const, list(self.terms) + list(other.terms))

    __radd__ = __add__

    def __neg__(self):
        return ExactReal._raw(-self.const, tuple((-c, k) for c, k in self.terms))

    def __sub__(self, other):
        return self + (-ExactReal.coerce(other))

    def __rsub__(self, other):
        return ExactReal.coerce(other) + (-self)

    def __mul__(self, q):
        if isinstance(q, ExactReal):
            if q.terms and self.terms:
                raise TypeError("product of two non-rational ExactReals is not supported")
            if q.terms:
                return q * self.const
            q = q.const
        q = Fraction(q)
        if q == 0:
            return ExactReal(0)
        return ExactReal(self.const * q, [(c * q, k) for c, k in self.terms])

    __rmul__ = __mul__

    def __truediv__(self, q):
        q = Fraction(q.as_fraction() if isinstance(q, ExactReal) else q)
        return self * (1 / q)

    # -- enclosures ------------------------------------------------------------
    def enclose(self, prec: int = br.DEFAULT_PREC) -> Enclosure:
        acc: Enclosure = Interval.point(self.const, prec)
        for c, k in self.terms:
            acc = enc.add(acc, _atom_enclose(c, k, prec))
        return acc

    def sign(self, prec: int = br.DEFAULT_PREC, cap: int = enc.DEFAULT_CAP) -> int:
        """Exact sign; escalates precision, raises :class:`Indeterminate` at the cap."""
        if not self.terms:
            return (self.const > 0) - (self.const < 0)
        # the largest atom decides when it dwarfs the rest
        s, _ = enc.escalate(lambda p: _sign_at(self, p), prec, cap)
        return s

    def cmp(self, other, prec: int = br.DEFAULT_PREC) -> int:
        other = ExactReal.coerce(other)
        if self == other:
            return 0
        if not self.terms and not other.terms:
            return (self.const > other.const) - (self.const < other.const)
        return (self - other).sign(prec)

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __float__(self):
        if not self.terms:
            return float(self.const)
        e = self.enclose(64)
        if isinstance(e, HugeInterval):
            return float("inf") * e.sgn if e.lg.sign() > 0 else 0.0
        return float(e.mid())

    def power_of_two_exponent(self) -> TowerNum | None:
        """``E`` when the value is exactly ``2**E`` with ``E >= 0``, else None."""
        if not self.terms:
            q = self.const
            if q.denominator == 1 and q.numerator > 0 and q.numerator & (q.numerator - 1) == 0:
                return q.numerator.bit_length() - 1
            return None
        if self.const == 0 and len(self.terms) == 1 and self.terms[0][0] == 1:
            return self.terms[0][1]
        return None

    def log2_magnitude(self, prec: int = br.DEFAULT_PREC) -> Enclosure:
        return enc.log2(enc.mul(self.enclose(prec), self.sign(prec)))

    # -- serialization -----------------------------------------------------
    def to_json(self):
        if not self.terms:
            return _q_str(self.const)
        if self.const == 0 and len(self.terms) == 1 and self.terms[0][0] == 1:
            return {"pow2": tower_to_json(self.terms[0][1])}
        return {
            "const": _q_str(self.const),
            "terms": [{"coef": _q_str(c), "pow2": tower_to_json(k)} for c, k in self.terms],
        }

    @classmethod
    def from_json(cls, obj) -> "ExactReal":
        if isinstance(obj, dict):
            if set(obj) == {"pow2"}:
                return cls.pow2(tower_from_json(obj["pow2"]))
            if set(obj) == {"const", "terms"}:
                terms = [(parse_rational(t["coef"]), tower_from_json(t["pow2"])) for t in obj["terms"]]
                return cls(parse_rational(obj["const"]), terms)
            raise ValueError(f"bad exact value {obj!r}")
        if isinstance(obj, str) and "p" in obj and "/" not in obj and not obj.lower().lstrip("-").startswith("0x"):
            return cls.from_bigreal(BigReal.parse(obj))
        if isinstance(obj, str) and ("e" in obj.lower() or "." in obj) and not obj.lower().lstrip("-").startswith("0x"):
            return cls.from_bigreal(BigReal.parse(obj))
        return cls(parse_rational(obj))

    def __repr__(self):
        if not self.terms:
            return f"ExactReal({self.const})"
        parts = [str(self.const)] if self.const else []
        parts += [f"{c}*2^({tower_str(k)})" for c, k in self.terms]
        return "ExactReal(" + " + ".join(parts) + ")"


def _atom_enclose(c: Fraction, k: TowerNum, prec: int) -> Enclosure:
    if isinstance(k, int):
        base = Interval.point(BigReal.pow2(k), prec)
    else:
        base = enc.pow2(tower_enclose(k, prec))
    return enc.mul(base, Interval.point(c, prec))


def _sign_at(x: ExactReal, prec: int) -> int:
    e = x.enclose(prec)
    s = e.sign()
    if s == 0:
        raise Indeterminate("sign not decided at this precision")
    return s


def _canonical(const: Fraction, terms: list) -> tuple[Fraction, tuple]:
    ints: dict[int, Fraction] = {}
    towers: dict[Dyadic, Fraction] = {}
    for c, k in terms:
        c = Fraction(c)
        if c == 0:
            continue
        if isinstance(k, int) and k.bit_length() > INT_BITS_LIMIT:
            k = tower(k)
        if isinstance(k, int):
            ints[k] = ints.get(k, Fraction(0)) + c
        else:
            towers[k] = towers.get(k, Fraction(0)) + c
    while True:
        items = sorted((k, c) for k, c in ints.items() if c != 0)
        changed = False
        new: dict[int, Fraction] = {}
        clusters: list[list[tuple[int, Fraction]]] = []
        for k, c in items:
            if clusters and k - clusters[-1][-1][0] < FOLD_GAP:
                clusters[-1].append((k, c))
            else:
                clusters.append([(k, c)])
        for cl in clusters:
            kmin = cl[0][0]
            tot = sum((c * (1 << (k - kmin)) for k, c in cl), Fraction(0))
            if len(cl) > 1:
                changed = True
            if tot == 0:
                continue
            if kmin < FOLD_GAP and cl[-1][0] > -FOLD_GAP:
                const += tot * Fraction(2) ** kmin
                changed = True
                continue
            v = _v2(tot.numerator) - _v2(tot.denominator)
            if v:
                tot = tot / Fraction(2) ** v
                changed = True
            new[kmin + v] = new.get(kmin + v, Fraction(0)) + tot
        ints = new
        if not changed:
            break
    int_terms = sorted(ints.items())
    tower_terms = sorted(((k, c) for k, c in towers.items() if c != 0),
                         key=lambda kc: _TowerKey(kc[0]))
    out = tuple((c, k) for k, c in int_terms) + tuple((c, k) for k, c in tower_terms)
    return const, out


class _TowerKey:
    __slots__ = ("t",)

    def __init__(self, t):
        self.t = t

    def __lt__(self, other):
        return tower_cmp(self.t, other.t) < 0
