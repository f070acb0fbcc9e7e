"""Executable form of the integral comparison for log-convex ``h``.

For convex ``f = ln h`` either ``h`` is nonincreasing on ``(0, inf)``, in which
case ``h(2x) <= h(x)`` and ``h <= h**2(x)/h(2x)`` pointwise, or ``f`` has a
positive slope ``c`` from some ``A`` on, so ``h(n+1)/h(n) >= e**c`` and the
ratio condition ``h(n)/h(n+1) -> 1`` is impossible. The ``x**x`` example shows
the comparison cannot be reversed without the ratio condition.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from .numerics import enclosure as enc
from .numerics.bigreal import DEFAULT_PREC
from .numerics.enclosure import DomainError, Enclosure, HugeInterval, Indeterminate, Interval, Verdict
from .numerics.exact import ExactReal
from .numerics.logdomain import LogValue, _same_point
from .piecewise import (
    PiecewiseLogLinear,
    eval_exact,
    integral_log,
    is_log_convex,
    ratio_transform,
)

__all__ = [
    "Monotonicity",
    "MonotonicityVerdict",
    "classify_monotonicity",
    "RatioCondition",
    "ratio_condition_check",
    "WitnessReport",
    "integrability_witness",
    "XXReport",
    "xx_demo",
    "xx_value",
]


class Monotonicity(enum.Enum):
    DECREASING_EVERYWHERE = "DecreasingEverywhere"
    INCREASING_BEYOND = "IncreasingBeyond"


@dataclass(frozen=True)
class MonotonicityVerdict:
    kind: Monotonicity
    A: ExactReal | None = None
    c: Fraction | None = None

    def to_json(self) -> dict:
        d = {"kind": self.kind.value}
        if self.kind is Monotonicity.INCREASING_BEYOND:
            d.update({"A": self.A.to_json(), "c": str(self.c)})
        return d


def _require_convex(F: PiecewiseLogLinear) -> None:
    if not is_log_convex(F):
        raise DomainError("function is not log-convex (slopes decrease)")


def classify_monotonicity(F: PiecewiseLogLinear) -> MonotonicityVerdict:
    """Decreasing everywhere iff the final slope is ``<= 0`` (a zero tail counts as decreasing)."""
    _require_convex(F)
    if F.slopes[-1] <= 0:
        return MonotonicityVerdict(Monotonicity.DECREASING_EVERYWHERE)
    k = next(i for i, m in enumerate(F.slopes) if m > 0)
    return MonotonicityVerdict(Monotonicity.INCREASING_BEYOND, F.breakpoints[k], F.slopes[k])


@dataclass
class RatioCondition:
    holds: bool
    ratios: list[Enclosure]
    gaps: list[ExactReal]
    slope_magnitudes: list[Fraction]
    limit_ratio_log: Fraction
    schedule_limit_zero: bool | None = None

    def to_json(self) -> dict:
        return {
            "verdict": "Holds" if self.holds else "Fails",
            "slope_magnitudes": [str(abs(m)) for m in self.slope_magnitudes],
            "tail_log_ratio": str(self.limit_ratio_log),
            "schedule_limit_zero": self.schedule_limit_zero,
            "ratios": [enc.to_json(r) for r in self.ratios],
        }


def ratio_condition_check(F: PiecewiseLogLinear, n_max: int = 50, schedule=None,
                          prec: int = DEFAULT_PREC) -> RatioCondition:
    """Trend verdict for ``h(n)/h(n+1) -> 1`` on ``n = 1..n_max``.

    ``ln(h(n)/h(n+1)) = f(n) - f(n+1)`` lies between adjacent slopes, so the
    condition holds on the prefix iff the slopes are negative and strictly
    increase (toward 0); a truncated function's last slope stays nonzero, so
    this is a trend, with the schedule's closed-form limit reported beside it.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    gaps, ratios = [], []
    for n in range(1, n_max + 1):
        d = eval_exact(F, n) - eval_exact(F, n + 1)
        gaps.append(d)
        ratios.append(enc.exp(d.enclose(prec)))
    ms = list(F.slopes)
    trend = len(ms) >= 2 and all(m < 0 for m in ms) and all(x < y for x, y in zip(ms, ms[1:]))
    lim = schedule.tends_to_zero() if schedule is not None else None
    if lim is False:
        trend = False
    return RatioCondition(trend, ratios, gaps, [abs(m) for m in ms], -ms[-1], lim)


@dataclass
class WitnessReport:
    monotonicity: MonotonicityVerdict
    ratio_condition: RatioCondition | None
    hypotheses: dict
    pointwise: list[dict] = field(default_factory=list)
    pointwise_ok: bool | None = None
    integral_h: LogValue | None = None
    integral_g2: LogValue | None = None
    windows: list[dict] = field(default_factory=list)
    comparison_ok: bool | None = None
    contradiction_gap: Fraction | None = None
    ratio_bound: Enclosure | None = None

    @property
    def ok(self) -> bool:
        if self.monotonicity.kind is Monotonicity.INCREASING_BEYOND:
            return self.contradiction_gap is not None and self.contradiction_gap > 0
        return bool(self.pointwise_ok and self.comparison_ok)

    def to_json(self) -> dict:
        d = {
            "monotonicity": self.monotonicity.to_json(),
            "hypotheses": self.hypotheses,
            "ok": self.ok,
        }
        if self.ratio_condition is not None:
            d["ratio_condition"] = self.ratio_condition.to_json()
        if self.monotonicity.kind is Monotonicity.INCREASING_BEYOND:
            d["contradiction"] = {"c": str(self.contradiction_gap), "ratio_lower_bound": enc.to_json(self.ratio_bound)}
        else:
            d["pointwise_ok"] = self.pointwise_ok
            d["integral_h_log"] = self.integral_h.to_json() if self.integral_h else "inf"
            d["integral_g2_log"] = self.integral_g2.to_json() if self.integral_g2 else "inf"
            d["windows"] = self.windows
            d["comparison_ok"] = self.comparison_ok
        return d


def _endpoint(e: Enclosure, side: int) -> Enclosure:
    """Point enclosure of the lower (``side=-1``) or upper (``side=1``) end of ``e``."""
    if isinstance(e, Interval):
        b = e.lo if side < 0 else e.hi
        return Interval(b, b, e.prec)
    return HugeInterval(e.sgn, _endpoint(e.lg, side * e.sgn))


def _end_le(x: Enclosure, y: Enclosure) -> bool:
    if _same_point(x, y):
        return True
    v = enc.compare(x, y)
    if v is Verdict.INDETERMINATE:
        raise Indeterminate("enclosure endpoints too close to order")
    return v is Verdict.LESS


def _le_enclosures(x: LogValue, y: LogValue) -> bool:
    """upper(x) <= upper(y) and lower(x) <= lower(y) for log-domain values."""
    if x.enc is None:
        return True
    if y.enc is None:
        return False
    return _end_le(_endpoint(x.enc, 1), _endpoint(y.enc, 1)) and _end_le(_endpoint(x.enc, -1), _endpoint(y.enc, -1))


def _window(F, g2, X, prec: int):
    def run(p):
        lh, lg = integral_log(F, 0, X, p), integral_log(g2, 0, X, p)
        return lh, lg, _le_enclosures(lh, lg)

    try:
        out, _ = enc.escalate(run, prec, enc.DEFAULT_CAP)
    except Indeterminate:
        return None
    return out


def integrability_witness(F: PiecewiseLogLinear, n_max: int = 50, prec: int = DEFAULT_PREC,
                          max_windows: int | None = None) -> WitnessReport:
    """Run the dichotomy and report on each hypothesis.

    Decreasing branch: checks ``f(x) - f(2x) >= 0`` exactly at every
    breakpoint of ``g_2`` (and on the tail), then compares certified
    integrals of ``h`` and ``g_2`` on ``[0, X]`` for each breakpoint ``X`` of
    ``g_2`` and on the whole line. Increasing branch: returns the gap ``c``.
    Hypothesis failures are reported, never dropped.
    """
    verdict = classify_monotonicity(F)
    hyp: dict = {"log_convex": True}
    if verdict.kind is Monotonicity.INCREASING_BEYOND:
        rc = ratio_condition_check(F, max(2, n_max), prec=prec)
        hyp["ratio_condition"] = "Holds" if rc.holds else "Fails"
        c = verdict.c
        return WitnessReport(verdict, rc, hyp, contradiction_gap=c,
                             ratio_bound=enc.exp(Interval.point(c, prec)))
    rc = ratio_condition_check(F, max(2, n_max), prec=prec)
    hyp["ratio_condition"] = "Holds" if rc.holds else "Fails"
    g2 = ratio_transform(F, 2)
    # g_2 is the constant e^{b_N} on its final piece, so its full integral is finite only if b_N = -inf
    g2_finite = g2.slopes[-1] < 0
    hyp["g2_integrable"] = "Holds" if g2_finite else "Fails"
    rows = []
    ok = True
    for x in g2.breakpoints:
        d = eval_exact(F, x) - eval_exact(F, x * 2)
        s = d.sign(prec)
        rows.append({"x": x.to_json(), "f(x)-f(2x)": d.to_json(), "ok": s >= 0})
        ok = ok and s >= 0
    tail_ok = F.slopes[-1] <= 0  # f(x) - f(2x) = -m_N x on the common tail
    ok = ok and tail_ok
    ih = integral_log(F, 0, None, prec) if F.slopes[-1] < 0 else None
    ig = integral_log(g2, 0, None, prec) if g2_finite else None
    windows = []
    cmp_ok = True
    xs = [x for x in g2.breakpoints if x.sign() > 0]
    if max_windows is not None:
        xs = xs[:max_windows]
    for X in xs:
        res = _window(F, g2, X, prec)
        if res is None:
            cmp_ok = False
            windows.append({"X": X.to_json(), "ok": False, "verdict": "Indeterminate"})
            continue
        lh, lg, good = res
        cmp_ok = cmp_ok and good
        windows.append({"X": X.to_json(), "log_int_h": lh.to_json(), "log_int_g2": lg.to_json(), "ok": good})
    # whole line: finite <= infinite is automatic
    if ih is not None and ig is not None:
        res = _window(F, g2, None, prec)
        cmp_ok = cmp_ok and res is not None and res[2]
    elif ih is None and ig is not None:
        cmp_ok = False
    return WitnessReport(verdict, rc, hyp, rows, ok, ih, ig, windows, cmp_ok)


# -- the x**x example -------------------------------------------------------------------
def xx_value(x, prec: int = DEFAULT_PREC) -> Enclosure:
    """Enclosure of ``x**x = exp(x ln x)`` for rational ``x > 0``."""
    xe = Interval.point(Fraction(x), prec)
    return enc.exp(enc.mul(xe, enc.log(xe)))


@dataclass
class XXReport:
    ratio_integral: Enclosure
    partial_integrals: list[tuple[int, Enclosure]]
    ratios: list[tuple[int, Fraction]]

    def to_json(self) -> dict:
        return {
            "ratio_integral": enc.to_json(self.ratio_integral),
            "ratio_integral_float": float(self.ratio_integral.mid()),
            "partial_integrals": [
                {"X": X, "enclosure": enc.to_json(v), "lower_float": float(v.lo), "upper_float": float(v.hi)}
                for X, v in self.partial_integrals
            ],
            "ratios": [{"n": n, "value": str(q) if n <= 10 else None, "float": float(q)} for n, q in self.ratios],
        }


def _xx_bracket(lo: Fraction, hi: Fraction, pieces: int, prec: int) -> Enclosure:
    """Certified ``[midpoint, trapezoid]`` bracket of the integral of ``x**x`` over ``[lo, hi]``.

    ``x**x`` is convex for ``x > 0``, so the midpoint rule underestimates and the
    trapezoid rule overestimates.
    """
    h = (hi - lo) / pieces
    mids = Interval.point(0, prec)
    ends = enc.add(enc.mul(xx_value(lo, prec), Fraction(1, 2)), enc.mul(xx_value(hi, prec), Fraction(1, 2)))
    for i in range(pieces):
        mids = enc.add(mids, xx_value(lo + (i + Fraction(1, 2)) * h, prec))
        if i:
            ends = enc.add(ends, xx_value(lo + i * h, prec))
    hq = Interval.point(h, prec)
    low, up = enc.mul(mids, hq), enc.mul(ends, hq)
    return Interval(low.lo, up.hi, prec)


def xx_demo(X_max: int = 12, quad_points: int = 256, n_max: int = 100, prec: int = 128) -> XXReport:
    """``h(x) = x**x``: ``h**2(x)/h(2x) = 2**(-2x)`` integrates to ``1/ln 4``, yet ``h`` does not.

    Partial integrals over ``[1, X]`` for ``X = 2..X_max`` are certified
    brackets; ``h(n)/h(n+1) = n**n/(n+1)**(n+1)`` is exact.
    """
    if X_max <= 1:
        raise ValueError("X_max must exceed 1")
    one = Interval.point(1, prec)
    ratio_int = enc.div(one, enc.mul(Interval.ln2(prec), 2))
    parts = []
    acc = Interval.point(0, prec)
    for X in range(2, int(X_max) + 1):
        acc = enc.add(acc, _xx_bracket(Fraction(X - 1), Fraction(X), quad_points, prec))
        parts.append((X, acc))
    ratios = [(n, Fraction(n**n, (n + 1) ** (n + 1))) for n in range(1, n_max + 1)]
    return XXReport(ratio_int, parts, ratios)
