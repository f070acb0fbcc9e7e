"""Piecewise log-linear functions ``h = exp(f)`` with ``f`` piecewise linear.

Slopes are exact rationals; intercepts and breakpoints are
:class:`~logconvex.numerics.ExactReal` values, so continuity and every
breakpoint comparison are exact. Pieces are closed on the left and open on the
right, and the last piece runs to ``+inf``.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .numerics import enclosure as enc
from .numerics.bigreal import DEFAULT_PREC
from .numerics.enclosure import DomainError, Enclosure, Interval
from .numerics.exact import ExactReal, parse_rational
from .numerics.logdomain import NEG_INFINITY, LogValue, log1mexp, log_add_exp

__all__ = [
    "Piece",
    "PiecewiseLogLinear",
    "DivergenceError",
    "Attained",
    "MaximalResult",
    "eval_log",
    "eval_exact",
    "piece_index",
    "segment_integral_log",
    "integral_log",
    "ratio_transform",
    "maximal_function",
    "is_log_convex",
    "chord_slope",
    "eval_batch",
]


class DivergenceError(ArithmeticError):
    """The requested integral is infinite."""


def _x(v) -> ExactReal:
    return ExactReal.coerce(v)


def _cmp(a: ExactReal, b: ExactReal) -> int:
    return a.cmp(b)


@dataclass(frozen=True)
class Piece:
    slope: Fraction
    intercept: ExactReal
    lo: ExactReal
    hi: ExactReal | None  # None: unbounded

    def value_at(self, x: ExactReal) -> ExactReal:
        return _x(x) * self.slope + self.intercept


class PiecewiseLogLinear:
    """``f(x) = m_k x + b_k`` on ``[a_k, a_{k+1})``, ``a_0 = 0``, last piece unbounded.

    ``convex`` is a flag: when set, construction checks that slopes are
    nondecreasing. Continuity is not enforced here (a tampered function can be
    loaded and then diagnosed with :meth:`continuity_defects`).
    """

    __slots__ = ("slopes", "intercepts", "breaks", "convex")

    def __init__(self, slopes: Sequence, intercepts: Sequence, breaks: Sequence = (), convex: bool = False):
        slopes = tuple(Fraction(m) if not isinstance(m, str) else parse_rational(m) for m in slopes)
        intercepts = tuple(_x(b) for b in intercepts)
        breaks = tuple(_x(a) for a in breaks)
        if not slopes:
            raise ValueError("at least one piece is required")
        if len(intercepts) != len(slopes) or len(breaks) != len(slopes) - 1:
            raise ValueError("need one intercept per slope and one breakpoint between pieces")
        prev = ExactReal(0)
        for k, a in enumerate(breaks, start=1):
            if _cmp(a, prev) <= 0:
                raise ValueError(f"breakpoints must strictly increase (at index {k})")
            prev = a
        if convex and any(m1 > m2 for m1, m2 in zip(slopes, slopes[1:])):
            raise ValueError("convex flag set but slopes decrease")
        self.slopes = slopes
        self.intercepts = intercepts
        self.breaks = breaks  # a_1 .. a_N
        self.convex = bool(convex)

    @classmethod
    def from_pieces(cls, pieces: Sequence[tuple], convex: bool = False) -> "PiecewiseLogLinear":
        """From ``(slope, intercept, lo)`` triples; the first ``lo`` must be 0."""
        if _x(pieces[0][2]) != ExactReal(0):
            raise ValueError("the first piece starts at 0")
        return cls([p[0] for p in pieces], [p[1] for p in pieces], [p[2] for p in pieces[1:]], convex)

    # -- structure ---------------------------------------------------------
    def __len__(self):
        return len(self.slopes)

    @property
    def breakpoints(self) -> tuple[ExactReal, ...]:
        """``a_0 = 0, a_1, ..., a_N``."""
        return (ExactReal(0),) + self.breaks

    def piece(self, k: int) -> Piece:
        lo = ExactReal(0) if k == 0 else self.breaks[k - 1]
        hi = self.breaks[k] if k < len(self.breaks) else None
        return Piece(self.slopes[k], self.intercepts[k], lo, hi)

    @property
    def pieces(self) -> list[Piece]:
        return [self.piece(k) for k in range(len(self))]

    def continuity_defects(self) -> list[int]:
        """Breakpoint indices ``k`` where ``m_{k-1} a_k + b_{k-1} != m_k a_k + b_k`` exactly."""
        bad = []
        for k, a in enumerate(self.breaks, start=1):
            left = a * self.slopes[k - 1] + self.intercepts[k - 1]
            right = a * self.slopes[k] + self.intercepts[k]
            if left != right:
                bad.append(k)
        return bad

    def is_continuous(self) -> bool:
        return not self.continuity_defects()

    def shifted(self, c) -> "PiecewiseLogLinear":
        """``f + c``."""
        return PiecewiseLogLinear(self.slopes, [b + _x(c) for b in self.intercepts], self.breaks, self.convex)

    def __eq__(self, other):
        if not isinstance(other, PiecewiseLogLinear):
            return NotImplemented
        return (self.slopes, self.intercepts, self.breaks, self.convex) == (
            other.slopes, other.intercepts, other.breaks, other.convex)

    def __hash__(self):
        return hash((self.slopes, self.intercepts, self.breaks, self.convex))

    def __repr__(self):
        return f"PiecewiseLogLinear({len(self)} pieces, convex={self.convex})"

    # -- JSON ----------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "convex": self.convex,
            "pieces": [
                {"slope": _q(p.slope), "intercept": p.intercept.to_json(), "lo": p.lo.to_json()}
                for p in self.pieces
            ],
        }

    @classmethod
    def from_json(cls, doc: dict, check_convex: bool = True) -> "PiecewiseLogLinear":
        try:
            pieces = doc["pieces"]
            slopes = [parse_rational(p["slope"]) for p in pieces]
            intercepts = [ExactReal.from_json(p["intercept"]) for p in pieces]
            los = [ExactReal.from_json(p["lo"]) for p in pieces]
            convex = bool(doc.get("convex", False))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed piecewise function document: {exc}") from exc
        if not pieces or los[0] != ExactReal(0):
            raise ValueError("the first piece must start at 0")
        return cls(slopes, intercepts, los[1:], convex and check_convex)

    # -- numeric export ----------------------------------------------------------
    def fits_double(self) -> bool:
        """True when every breakpoint and intercept is a rational small enough for floats."""
        vals = list(self.breaks) + list(self.intercepts)
        return all(v.is_rational() and abs(v.const) < 1e300 for v in vals)

    def float_arrays(self):
        """``(breaks, slopes, intercepts)`` as float lists (requires :meth:`fits_double`)."""
        if not self.fits_double():
            raise OverflowError("function has values outside double range")
        return ([float(a) for a in self.breaks], [float(m) for m in self.slopes],
                [float(b) for b in self.intercepts])


def _q(q: Fraction) -> str:
    return str(q)


# -- evaluation ---------------------------------------------------------------
def piece_index(F: PiecewiseLogLinear, x) -> int:
    """Index ``k`` with ``a_k <= x < a_{k+1}``; a breakpoint belongs to the right piece."""
    x = _x(x)
    if x.sign() < 0:
        raise DomainError("x must be nonnegative")
    lo, hi = 0, len(F.breaks)
    # number of breakpoints <= x
    while lo < hi:
        mid = (lo + hi) // 2
        if _cmp(F.breaks[mid], x) <= 0:
            lo = mid + 1
        else:
            hi = mid
    return lo


def eval_exact(F: PiecewiseLogLinear, x) -> ExactReal:
    """Exact ``f(x)``."""
    x = _x(x)
    k = piece_index(F, x)
    return x * F.slopes[k] + F.intercepts[k]


def eval_log(F: PiecewiseLogLinear, x, prec: int = DEFAULT_PREC) -> Enclosure:
    """Enclosure of ``f(x) = ln h(x)``."""
    return eval_exact(F, x).enclose(prec)


def _ln_abs_rational(q: Fraction, prec: int) -> Enclosure:
    return enc.log(Interval.point(abs(q), prec))


def segment_integral_log(m, b, x1, x2, prec: int = DEFAULT_PREC, cap: int = enc.DEFAULT_CAP) -> LogValue:
    """``ln`` of the integral of ``exp(m x + b)`` over ``[x1, x2]`` (``x2=None`` is ``+inf``).

    The exponent gap ``m (x2 - x1)`` is formed exactly, so nearby endpoints do
    not cancel. Precision doubles (up to ``cap``) while a step is undecided.
    """
    out, _ = enc.escalate(lambda p: _segment(m, b, x1, x2, p), prec, cap)
    return out


def _segment(m, b, x1, x2, prec: int) -> LogValue:
    m = Fraction(m)
    b, x1 = _x(b), _x(x1)
    if x2 is None:
        if m >= 0:
            raise DivergenceError("nonnegative slope on an unbounded segment")
        u1 = (x1 * m + b).enclose(prec)
        return LogValue(enc.sub(u1, _ln_abs_rational(m, prec)))
    x2 = _x(x2)
    c = _cmp(x1, x2)
    if c == 0:
        return NEG_INFINITY
    if c > 0:
        raise ValueError("segment endpoints out of order")
    width = x2 - x1
    if m == 0:
        return LogValue(enc.add(enc.log(width.enclose(prec)), b.enclose(prec)))
    if m < 0:
        top = x1 * m + b
        gap = width * m
    else:
        top = x2 * m + b
        gap = width * (-m)
    body = enc.add(top.enclose(prec), log1mexp(gap.enclose(prec)))
    return LogValue(enc.sub(body, _ln_abs_rational(m, prec)))


def _clipped(F: PiecewiseLogLinear, lo: ExactReal, hi: ExactReal | None) -> Iterator[tuple[int, ExactReal, ExactReal | None]]:
    for k, p in enumerate(F.pieces):
        s = p.lo if _cmp(p.lo, lo) >= 0 else lo
        if p.hi is None:
            e = hi
        elif hi is None:
            e = p.hi
        else:
            e = p.hi if _cmp(p.hi, hi) <= 0 else hi
        if e is not None and _cmp(s, e) >= 0:
            continue
        yield k, s, e


def integral_log(F: PiecewiseLogLinear, lo=0, hi=None, prec: int = DEFAULT_PREC,
                 cap: int = enc.DEFAULT_CAP) -> LogValue:
    """``ln`` of the integral of ``h`` over ``[lo, hi]`` (``hi=None`` is ``+inf``)."""
    lo = _x(lo)
    if lo.sign() < 0:
        raise DomainError("integration starts at a negative point")
    if hi is not None:
        hi = _x(hi)
        c = _cmp(lo, hi)
        if c == 0:
            return NEG_INFINITY
        if c > 0:
            raise ValueError("integration bounds out of order")
    elif F.slopes[-1] >= 0:
        raise DivergenceError("final slope is nonnegative: the tail integral diverges")
    segs = list(_clipped(F, lo, hi))

    def run(p: int) -> LogValue:
        total = NEG_INFINITY
        for k, s, e in segs:
            total = log_add_exp(total, _segment(F.slopes[k], F.intercepts[k], s, e, p))
        return total

    out, _ = enc.escalate(run, prec, cap)
    return out


# -- ratio transform ------------------------------------------------------------
def _sorted_unique(values: list[ExactReal]) -> list[ExactReal]:
    vals = sorted(values, key=functools.cmp_to_key(_cmp))
    out: list[ExactReal] = []
    for v in vals:
        if not out or _cmp(out[-1], v) != 0:
            out.append(v)
    return out


def ratio_transform(F: PiecewiseLogLinear, r) -> PiecewiseLogLinear:
    """Exact ``g_r`` with ``ln g_r(x) = r f(x) - f(r x)``.

    Breakpoints are the sorted union of ``{a_k}`` and ``{a_k / r}``; adjacent
    sub-pieces with the same line are merged.
    """
    r = parse_rational(r) if isinstance(r, str) else Fraction(r)
    if r <= 0:
        raise DomainError("r must be positive")
    cands = _sorted_unique([ExactReal(0)] + list(F.breaks) + [a / r for a in F.breaks])
    slopes: list[Fraction] = []
    intercepts: list[ExactReal] = []
    los: list[ExactReal] = []
    for t in cands:
        k = piece_index(F, t)
        j = piece_index(F, t * r)
        m = r * (F.slopes[k] - F.slopes[j])
        b = F.intercepts[k] * r - F.intercepts[j]
        if slopes and slopes[-1] == m and intercepts[-1] == b:
            continue
        slopes.append(m)
        intercepts.append(b)
        los.append(t)
    return PiecewiseLogLinear(slopes, intercepts, los[1:], convex=False)


# -- maximal function ---------------------------------------------------------------
class Attained(enum.Enum):
    AT_POINT = "AtPoint"
    SUPREMUM_AT_INFINITY = "SupremumAtInfinity"


@dataclass(frozen=True)
class MaximalResult:
    log_value: Enclosure
    argmax: ExactReal
    attained: Attained
    exact_value: ExactReal

    def to_json(self) -> dict:
        return {
            "log_value": enc.to_json(self.log_value),
            "exact_log_value": self.exact_value.to_json(),
            "argmax": self.argmax.to_json(),
            "attained": self.attained.value,
        }


def maximal_function(F: PiecewiseLogLinear, a, prec: int = DEFAULT_PREC) -> MaximalResult:
    """``ln H_h(a)``: the max over ``b >= a`` of ``f(b) - f(a + b)``, smallest maximiser.

    The objective is piecewise linear in ``b`` with kinks at ``a_k`` and
    ``a_k - a``; past the last kink both arguments sit on the final piece and
    the objective is constant, so the maximum is attained at a kink (or ``a``).
    """
    a = _x(a)
    if a.sign() <= 0:
        raise DomainError("the maximal function needs a > 0")
    cands = [a]
    for ak in F.breaks:
        if _cmp(ak, a) >= 0:
            cands.append(ak)
        d = ak - a
        if _cmp(d, a) >= 0:
            cands.append(d)
    cands = _sorted_unique(cands)
    best_b, best_v = None, None
    for b in cands:
        v = eval_exact(F, b) - eval_exact(F, a + b)
        if best_v is None or _cmp(v, best_v) > 0:
            best_b, best_v = b, v
    if F.convex and _cmp(best_b, a) != 0:
        raise AssertionError("convex function with a maximiser other than a")
    return MaximalResult(best_v.enclose(prec), best_b, Attained.AT_POINT, best_v)


# -- convexity -----------------------------------------------------------------------
def is_log_convex(F: PiecewiseLogLinear) -> bool:
    """True iff the slopes are nondecreasing (with continuity, ``f`` is convex)."""
    return all(m1 <= m2 for m1, m2 in zip(F.slopes, F.slopes[1:]))


def is_strictly_log_convex(F: PiecewiseLogLinear) -> bool:
    return all(m1 < m2 for m1, m2 in zip(F.slopes, F.slopes[1:]))


def chord_slope(F: PiecewiseLogLinear, x, prec: int = DEFAULT_PREC) -> Enclosure:
    """Enclosure of ``f(x) / x``."""
    x = _x(x)
    if x.sign() <= 0:
        raise DomainError("chord slope needs x > 0")
    fx = eval_exact(F, x)
    if x.is_rational():
        return (fx / x.as_fraction()).enclose(prec)
    out, _ = enc.escalate(lambda p: enc.div(fx.enclose(p), x.enclose(p)), prec, enc.DEFAULT_CAP)
    return out


def eval_batch(F: PiecewiseLogLinear, xs):
    """float64 ``f`` at many points through the kernels (needs :meth:`~PiecewiseLogLinear.fits_double`)."""
    import numpy as np

    from . import kernels

    breaks, slopes, icpt = (np.asarray(v, dtype=np.float64) for v in F.float_arrays())
    return kernels.eval_pwl(breaks, slopes, icpt, np.ascontiguousarray(xs, dtype=np.float64))
