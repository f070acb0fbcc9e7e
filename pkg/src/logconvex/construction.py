"""Inductive construction of a log-convex ``h`` whose ratio transforms diverge.

Given negative slopes ``m_n`` increasing to 0, breakpoints ``a_n`` and
intercepts ``b_n`` are chosen level by level so that

* (C1) ``-exp(m_n a_{n+1} + b_n) / m_{n+1} < 2**-(n+1)``;
* (C2) ``a_{n+1} > a_n + exp((1 - n) b_n)`` for ``n >= 1``, and ``a_1 > 1``;
* ``b_{n+1} = (m_n - m_{n+1}) a_{n+1} + b_n`` keeps ``f`` continuous.

Every inequality is certified with enclosures (escalating precision when
needed), and every equality is checked exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .numerics import enclosure as enc
from .numerics.bigreal import DEFAULT_PREC
from .numerics.enclosure import Enclosure, HugeInterval, Indeterminate, Interval, Verdict
from .numerics.exact import ExactReal, parse_rational, smallest_pow2_exponent_above
from .numerics.logdomain import NEG_INFINITY, LogValue, log_add_exp
from .piecewise import PiecewiseLogLinear, integral_log, segment_integral_log

__all__ = [
    "ScheduleError",
    "CertificationError",
    "SlopeSchedule",
    "LevelRecord",
    "ConstructionReport",
    "c1_lower_bound",
    "c2_lower_bound",
    "next_intercept",
    "next_breakpoint",
    "certify_level",
    "construct",
    "verify",
    "integral_upper_bound",
    "tail_bound",
    "chord_slopes",
    "subexponential_check",
    "DivergenceCertificate",
    "divergence_certificate",
]

DEFAULT_DEPTH = 8
DEFAULT_CAP = enc.DEFAULT_CAP


class ScheduleError(ValueError):
    """The slope schedule is not negative and strictly increasing."""


class CertificationError(ArithmeticError):
    """A required inequality could not be certified (or is false)."""

    def __init__(self, level: int, constraint: str, detail: str = ""):
        self.level = level
        self.constraint = constraint
        msg = f"{constraint} failure at level {level}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


# -- slope schedules ------------------------------------------------------------
@dataclass(frozen=True)
class SlopeSchedule:
    """``m_n`` as exact rationals.

    ``harmonic:c`` gives ``-c/(n+1)``, ``geometric:c,q`` gives ``-c q**n``,
    ``explicit:m0,m1,...`` lists a finite prefix.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind == "harmonic":
            (c,) = self.params
            if c <= 0:
                raise ScheduleError("harmonic schedule needs c > 0")
        elif self.kind == "geometric":
            c, q = self.params
            if c <= 0 or not 0 < q < 1:
                raise ScheduleError("geometric schedule needs c > 0 and 0 < q < 1")
        elif self.kind == "explicit":
            if not self.params:
                raise ScheduleError("explicit schedule is empty")
        else:
            raise ScheduleError(f"unknown schedule kind {self.kind!r}")

    @classmethod
    def harmonic(cls, c=1) -> "SlopeSchedule":
        return cls("harmonic", (Fraction(c),))

    @classmethod
    def geometric(cls, c, q) -> "SlopeSchedule":
        return cls("geometric", (Fraction(c), Fraction(q)))

    @classmethod
    def explicit(cls, values: Sequence) -> "SlopeSchedule":
        return cls("explicit", tuple(parse_rational(v) if isinstance(v, str) else Fraction(v) for v in values))

    @classmethod
    def parse(cls, text: str) -> "SlopeSchedule":
        kind, _, rest = text.strip().partition(":")
        vals = [parse_rational(v) for v in rest.split(",") if v.strip()] if rest else []
        if kind == "harmonic":
            return cls.harmonic(vals[0] if vals else 1)
        if kind == "geometric":
            if len(vals) != 2:
                raise ScheduleError("geometric schedule takes c,q")
            return cls.geometric(*vals)
        if kind == "explicit":
            return cls.explicit(vals)
        raise ScheduleError(f"unknown schedule kind {kind!r}")

    def descriptor(self) -> str:
        return f"{self.kind}:" + ",".join(str(v) for v in self.params)

    def m(self, n: int) -> Fraction:
        if n < 0:
            raise IndexError("negative level")
        if self.kind == "harmonic":
            return -self.params[0] / (n + 1)
        if self.kind == "geometric":
            c, q = self.params
            return -c * q**n
        if n >= len(self.params):
            raise ScheduleError(f"explicit schedule has no entry m_{n}")
        return self.params[n]

    def prefix(self, count: int) -> list[Fraction]:
        return [self.m(n) for n in range(count)]

    def validate(self, count: int) -> None:
        ms = self.prefix(count)
        for n, m in enumerate(ms):
            if m >= 0:
                raise ScheduleError(f"m_{n} = {m} is not negative")
        for n in range(1, len(ms)):
            if ms[n] <= ms[n - 1]:
                raise ScheduleError(f"schedule not strictly increasing at n={n} ({ms[n - 1]} -> {ms[n]})")

    def tends_to_zero(self) -> bool | None:
        """Closed-form limit of ``m_n``: True for harmonic/geometric, unknown for a finite list."""
        return None if self.kind == "explicit" else True


# -- level operations -------------------------------------------------------------
def _enc(x, prec: int) -> Enclosure:
    if isinstance(x, ExactReal):
        return x.enclose(prec)
    if isinstance(x, (Interval, HugeInterval)):
        return x
    return Interval.point(Fraction(x), prec)


def c1_lower_bound(n: int, m_n, m_next, b_n, prec: int = DEFAULT_PREC) -> Enclosure:
    """Threshold ``(ln(-m_{n+1}) - (n+1) ln 2 - b_n) / m_n``; ``a > threshold`` gives C1."""
    m_n, m_next = Fraction(m_n), Fraction(m_next)
    if not m_n < m_next < 0:
        raise ScheduleError(f"need m_n < m_(n+1) < 0 at n={n}")
    top = enc.sub(enc.log(Interval.point(-m_next, prec)),
                  enc.add(enc.mul(Interval.ln2(prec), n + 1), _enc(ExactReal.coerce(b_n), prec)))
    return enc.div(top, Interval.point(m_n, prec))


def c2_lower_bound(n: int, a_n, b_n, prec: int = DEFAULT_PREC) -> Enclosure:
    """``a_n + exp((1 - n) b_n)`` (sup over ``t`` in ``(0, n]`` sits at ``t = n``); ``a_0 + exp(-b_0)`` at n=0."""
    a_n, b_n = ExactReal.coerce(a_n), ExactReal.coerce(b_n)
    if n >= 1 and b_n.sign() > 0:
        raise ValueError("b_n must be nonpositive for n >= 1")
    expo = -b_n if n == 0 else b_n * (1 - n)
    return enc.add(a_n.enclose(prec), enc.exp(expo.enclose(prec)))


def next_intercept(n: int, m_n, m_next, a_next, b_n) -> ExactReal:
    """Exact ``b_{n+1} = (m_n - m_{n+1}) a_{n+1} + b_n``."""
    return ExactReal.coerce(a_next) * (Fraction(m_n) - Fraction(m_next)) + ExactReal.coerce(b_n)


def _enc_max(x: Enclosure, y: Enclosure) -> Enclosure:
    v = enc.compare(x, y)
    if v is Verdict.LESS:
        return y
    if v is Verdict.GREATER:
        return x
    if isinstance(x, Interval) and isinstance(y, Interval):
        return Interval(max(x.lo, y.lo), max(x.hi, y.hi), max(x.prec, y.prec))
    raise Indeterminate("cannot order the two thresholds")


def next_breakpoint(n: int, a_n, b_n, schedule: SlopeSchedule, prec: int = DEFAULT_PREC,
                    cap: int = DEFAULT_CAP) -> tuple[ExactReal, int]:
    """Smallest power of two above both thresholds (see the module notes for huge levels).

    Returns ``(a_{n+1}, precision_used)``.
    """
    m_n, m_next = schedule.m(n), schedule.m(n + 1)

    def pick(p: int):
        t = _enc_max(c1_lower_bound(n, m_n, m_next, b_n, p), c2_lower_bound(n, a_n, b_n, p))
        return ExactReal.pow2(smallest_pow2_exponent_above(t, p))

    return enc.escalate(pick, prec, cap)


# -- level certification ------------------------------------------------------------
VERDICT_KEYS = ("c1", "c2", "gap", "convexity", "continuity")


@dataclass
class LevelRecord:
    """Breakpoint ``a_k`` with the intercept ``b_k`` and slope ``m_k`` of the piece it opens."""

    level: int
    a: ExactReal
    b: ExactReal
    slope: Fraction
    c1_threshold: Enclosure | None = None
    c2_threshold: Enclosure | None = None
    verdicts: dict = field(default_factory=dict)
    precision: int = DEFAULT_PREC

    def ok(self) -> bool:
        return all(v in ("CertainlyLess", "CertainlyGreater", "Equal") for v in self.verdicts.values())

    def to_json(self) -> dict:
        d = {"level": self.level, "a": self.a.to_json(), "b": self.b.to_json(), "slope": str(self.slope)}
        if self.level:
            d.update({
                "c1_threshold": enc.to_json(self.c1_threshold),
                "c2_threshold": enc.to_json(self.c2_threshold),
                "verdicts": dict(self.verdicts),
                "precision": self.precision,
            })
        return d


def _certify_at(n: int, a_n: ExactReal, b_n: ExactReal, a_next: ExactReal, b_next: ExactReal,
                m_n: Fraction, m_next: Fraction, p: int) -> LevelRecord:
    k = n + 1
    rec = LevelRecord(k, a_next, b_next, m_next, precision=p)
    rec.c1_threshold = c1_lower_bound(n, m_n, m_next, b_n, p)
    rec.c2_threshold = c2_lower_bound(n, a_n, b_n, p)
    # C1 directly: ln(-e^{m_n a + b_n}/m_{n+1}) vs -(n+1) ln 2
    lhs = enc.sub((a_next * m_n + b_n).enclose(p), enc.log(Interval.point(-m_next, p)))
    rhs = enc.mul(Interval.ln2(p), -(n + 1))
    v1 = enc.compare(lhs, rhs)
    v2 = enc.compare(a_next.enclose(p), rec.c2_threshold)
    if Verdict.INDETERMINATE in (v1, v2):
        raise Indeterminate(f"level {k} undecided at {p} bits")
    rec.verdicts["c1"] = v1.value
    rec.verdicts["c2"] = v2.value
    if n >= 1:
        g = (a_next - a_n - 1).sign(p)
        rec.verdicts["gap"] = "CertainlyGreater" if g > 0 else "Violated"
    rec.verdicts["convexity"] = "CertainlyLess" if m_n < m_next else "Violated"
    left = a_next * m_n + b_n
    right = a_next * m_next + b_next
    rec.verdicts["continuity"] = "Equal" if left == right else "NotEqual"
    return rec


def certify_level(n: int, a_n, b_n, a_next, b_next, m_n, m_next, prec: int = DEFAULT_PREC,
                  cap: int = DEFAULT_CAP) -> LevelRecord:
    """Certify C1, C2, the unit gap, convexity and continuity for breakpoint ``a_{n+1}``."""
    args = [ExactReal.coerce(v) for v in (a_n, b_n, a_next, b_next)]
    rec, _ = enc.escalate(lambda p: _certify_at(n, *args, Fraction(m_n), Fraction(m_next), p), prec, cap)
    return rec


def _expected(rec: LevelRecord) -> dict:
    want = {"c1": "CertainlyLess", "c2": "CertainlyGreater", "convexity": "CertainlyLess", "continuity": "Equal"}
    if rec.level >= 2:
        want["gap"] = "CertainlyGreater"
    return want


def level_failures(rec: LevelRecord) -> list[str]:
    names = {"c1": "C1", "c2": "C2", "gap": "unit gap", "convexity": "convexity", "continuity": "continuity"}
    out = []
    for key in ("continuity", "convexity", "c1", "c2", "gap"):
        want = _expected(rec).get(key)
        if want is not None and rec.verdicts.get(key) != want:
            out.append(f"{names[key]} failure at level {rec.level}")
    return out


# -- the report ----------------------------------------------------------------------
@dataclass
class IntegralBound:
    chain: Fraction
    log_integral: LogValue
    integral: Enclosure
    verdict: Verdict

    def relative_width(self) -> float:
        return float(enc.rel_width(self.integral))

    def to_json(self) -> dict:
        return {
            "chain_bound": str(self.chain),
            "log_integral": self.log_integral.to_json(),
            "integral": enc.to_json(self.integral),
            "verdict": self.verdict.value,
        }


@dataclass
class ConstructionReport:
    schedule: SlopeSchedule
    depth: int
    precision: int
    levels: list[LevelRecord]
    function: PiecewiseLogLinear
    bound: IntegralBound | None = None
    tail: dict | None = None

    @property
    def breakpoints(self) -> list[ExactReal]:
        return [rec.a for rec in self.levels]

    @property
    def intercepts(self) -> list[ExactReal]:
        return [rec.b for rec in self.levels]

    @property
    def slopes(self) -> list[Fraction]:
        return [rec.slope for rec in self.levels]

    @property
    def precision_used(self) -> int:
        return max([self.precision] + [rec.precision for rec in self.levels])

    def failures(self) -> list[str]:
        out = []
        for rec in self.levels[1:]:
            out.extend(level_failures(rec))
        if self.bound is not None and self.bound.verdict is not Verdict.LESS:
            out.append("integral bound failure")
        if self.tail is not None and self.tail["verdict"] != Verdict.LESS.value:
            out.append(f"tail bound failure at level {self.depth}")
        return out

    def ok(self) -> bool:
        return not self.failures()

    def verdict_table(self) -> list[dict]:
        return [dict(rec.verdicts, level=rec.level) for rec in self.levels[1:]]

    def to_json(self) -> dict:
        return {
            "schedule": self.schedule.descriptor(),
            "depth": self.depth,
            "precision": self.precision,
            "precision_used": self.precision_used,
            "levels": [rec.to_json() for rec in self.levels],
            "function": self.function.to_json(),
            "integral_upper_bound": self.bound.to_json() if self.bound else None,
            "tail_bound": self.tail,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def _assemble(schedule: SlopeSchedule, depth: int, precision: int, a: list[ExactReal],
              b: list[ExactReal], cap: int, convex_flag: bool = True) -> ConstructionReport:
    ms = [schedule.m(n) for n in range(depth + 1)]
    levels = [LevelRecord(0, a[0], b[0], ms[0])]
    for n in range(depth):
        levels.append(certify_level(n, a[n], b[n], a[n + 1], b[n + 1], ms[n], ms[n + 1], precision, cap))
    F = PiecewiseLogLinear(ms, b, a[1:], convex=convex_flag)
    rep = ConstructionReport(schedule, depth, precision, levels, F)
    if all(rec.verdicts.get("continuity") == "Equal" for rec in levels[1:]):
        rep.bound = integral_upper_bound(rep)
        rep.tail = tail_bound(rep)
    return rep


def construct(schedule: SlopeSchedule | str = "harmonic:1", depth: int = DEFAULT_DEPTH,
              precision: int = DEFAULT_PREC, cap: int = DEFAULT_CAP) -> ConstructionReport:
    """Build ``a_0..a_N``, ``b_0..b_N`` and certify every level.

    Raises :class:`CertificationError` naming the level and constraint when a
    constraint cannot be certified.
    """
    if isinstance(schedule, str):
        schedule = SlopeSchedule.parse(schedule)
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if precision < 64:
        raise ValueError("precision must be at least 64 bits")
    schedule.validate(depth + 1)
    a = [ExactReal(0)]
    b = [ExactReal(0)]
    for n in range(depth):
        try:
            a_next, _ = next_breakpoint(n, a[n], b[n], schedule, precision, cap)
        except Indeterminate as exc:
            raise CertificationError(n + 1, "breakpoint selection", str(exc)) from exc
        a.append(a_next)
        b.append(next_intercept(n, schedule.m(n), schedule.m(n + 1), a_next, b[n]))
    try:
        rep = _assemble(schedule, depth, precision, a, b, cap)
    except Indeterminate as exc:
        raise CertificationError(-1, "certification", str(exc)) from exc
    bad = rep.failures()
    if bad:
        first = rep.levels[1:]
        for rec in first:
            fails = level_failures(rec)
            if fails:
                raise CertificationError(rec.level, fails[0].split(" failure")[0])
        raise CertificationError(depth, bad[0])
    return rep


# -- verification of a stored report ------------------------------------------------------
@dataclass
class Verification:
    ok: bool
    failures: list[str]
    identical: bool
    report: ConstructionReport | None

    def to_json(self) -> dict:
        return {"ok": self.ok, "failures": self.failures, "byte_identical": self.identical}


def report_from_json(doc: dict) -> tuple[SlopeSchedule, int, int, list[ExactReal], list[ExactReal], PiecewiseLogLinear]:
    try:
        schedule = SlopeSchedule.parse(doc["schedule"])
        depth = int(doc["depth"])
        precision = int(doc["precision"])
        levels = doc["levels"]
        a = [ExactReal.from_json(lv["a"]) for lv in levels]
        b = [ExactReal.from_json(lv["b"]) for lv in levels]
        F = PiecewiseLogLinear.from_json(doc["function"], check_convex=False)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed report: missing {exc}") from exc
    if len(a) != depth + 1:
        raise ValueError("report depth does not match its level list")
    return schedule, depth, precision, a, b, F


def verify(text: str, cap: int = DEFAULT_CAP) -> Verification:
    """Re-certify a serialized report from its stored ``a_k``, ``b_k``.

    Failures are named by constraint and level; ``identical`` says whether the
    re-serialized report matches the input byte for byte.
    """
    doc = json.loads(text)
    schedule, depth, precision, a, b, F = report_from_json(doc)
    failures: list[str] = []
    try:
        schedule.validate(depth + 1)
    except ScheduleError as exc:
        return Verification(False, [f"schedule failure: {exc}"], False, None)
    ms = schedule.prefix(depth + 1)
    if list(F.slopes) != ms:
        failures.append("slope failure: function slopes differ from the schedule")
    if list(F.intercepts) != b or list(F.breaks) != a[1:]:
        failures.append("function failure: pieces differ from the level list")
    if a[0] != ExactReal(0) or b[0] != ExactReal(0):
        failures.append("start failure at level 0")
    for k in range(1, depth + 1):
        if a[k].power_of_two_exponent() is None:
            failures.append(f"power-of-two failure at level {k}")
    rep = _assemble(schedule, depth, precision, a, b, cap, convex_flag=bool(doc["function"].get("convex")))
    failures.extend(rep.failures())
    for k in range(1, depth + 1):
        if k < len(doc["levels"]) and doc["levels"][k].get("verdicts") != rep.levels[k].verdicts:
            failures.append(f"verdict mismatch at level {k}")
    identical = rep.dumps() == text
    if not identical and not failures:
        failures.append("re-serialized report differs from the input")
    # order by level for readable messages
    return Verification(not failures, failures, identical, rep)


# -- bounds ------------------------------------------------------------------------------
def integral_upper_bound(report: ConstructionReport, prec: int | None = None) -> IntegralBound:
    """The chain bound ``-1/m_0 + sum_{n=1}^{N} 2**-n`` next to the exact integral."""
    p = prec or report.precision
    ms = report.slopes
    chain = -1 / ms[0] + sum((Fraction(1, 2**n) for n in range(1, report.depth + 1)), Fraction(0))

    def run(pp: int):
        li = integral_log(report.function, 0, None, pp)
        val = enc.exp(li.enc)
        v = enc.compare(val, Interval.point(chain, pp))
        if v is Verdict.INDETERMINATE:
            raise Indeterminate("integral not separated from the chain bound")
        return li, val, v

    (li, val, v), _ = enc.escalate(run, p, DEFAULT_CAP)
    return IntegralBound(chain, li, val, v)


def tail_bound(report: ConstructionReport, prec: int | None = None) -> dict:
    """Certify that the extended final piece integrates to less than ``2**-N``."""
    p = prec or report.precision
    N = report.depth
    rec = report.levels[N]
    li = segment_integral_log(rec.slope, rec.b, rec.a, None, p)
    rhs = enc.mul(Interval.ln2(p), -N)
    v = enc.compare(li.enc, rhs)
    return {"level": N, "log_tail": li.to_json(), "log_bound": enc.to_json(rhs), "verdict": v.value}


def chord_slopes(report: ConstructionReport, prec: int | None = None) -> list[Enclosure]:
    """Enclosures of ``f(a_k)/a_k = m_{k-1} + b_{k-1}/a_k`` for ``k = 1..N``."""
    p = prec or report.precision
    out = []
    for k in range(1, report.depth + 1):
        prev = report.levels[k - 1]
        a = report.levels[k].a
        if a.is_rational() and prev.b.is_rational():
            out.append(Interval.point(prev.slope + prev.b.as_fraction() / a.as_fraction(), p))
        else:
            out.append(enc.add(Interval.point(prev.slope, p), enc.div(prev.b.enclose(p), a.enclose(p))))
    return out


def subexponential_check(report: ConstructionReport, prec: int | None = None) -> dict:
    """Chord-slope sandwich and trend at the breakpoints.

    With ``lam = a_k / a_{k+1}`` in ``(0, 1)`` the identity
    ``c_{k+1} - m_k = lam (c_k - m_k)`` puts ``c_{k+1}`` strictly between ``c_k``
    and ``m_k`` whenever ``c_k != m_k``; both facts are certified per level.
    """
    p = prec or report.precision
    chords = chord_slopes(report, p)
    rows = []
    for k in range(1, report.depth):
        a_k, a_next = report.levels[k].a, report.levels[k + 1].a
        m_k = report.levels[k].slope
        lam_ok = a_k.sign() > 0 and a_k.cmp(a_next) < 0
        # c_k - m_k = (m_{k-1} - m_k) + b_{k-1}/a_k
        diff = enc.sub(chords[k - 1], Interval.point(m_k, p))
        s = diff.sign()
        rows.append({
            "level": k + 1,
            "lambda_in_unit_interval": lam_ok,
            "chord_minus_slope_sign": s,
            "sandwich": bool(lam_ok and s != 0),
            # c_{k+1} - c_k = (1 - lam)(m_k - c_k): |c| shrinks when c_k < m_k < 0
            "magnitude_decreasing": bool(lam_ok and s < 0 and m_k < 0),
        })
    last = chords[-1]
    abs_last = enc.neg(last) if last.sign() < 0 else last
    m0 = abs(report.slopes[0])
    return {
        "chords": [enc.to_json(c) for c in chords],
        "chords_float": [float(c.mid()) if isinstance(c, Interval) else None for c in chords],
        "rows": rows,
        "last_below_m0": enc.compare(abs_last, Interval.point(m0, p)) is Verdict.LESS,
        "last_abs": abs_last,
    }


# -- divergence ---------------------------------------------------------------------------
@dataclass
class Contribution:
    level: int
    lo: ExactReal
    hi: ExactReal
    log_value: LogValue
    exact: ExactReal | None
    passes: bool

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "lo": self.lo.to_json(),
            "hi": self.hi.to_json(),
            "log_value": self.log_value.to_json(),
            "exact": self.exact.to_json() if self.exact is not None else None,
            "passes": self.passes,
        }


@dataclass
class DivergenceCertificate:
    r: Fraction
    n0: int
    threshold: Fraction
    contributions: list[Contribution]
    partial_sums: list[LogValue]
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures

    def lower_bounds(self) -> list[Enclosure]:
        return [c.log_value.value() for c in self.contributions]

    def to_json(self) -> dict:
        return {
            "r": str(self.r),
            "n0": self.n0,
            "threshold": str(self.threshold),
            "contributions": [c.to_json() for c in self.contributions],
            "log_partial_sums": [s.to_json() for s in self.partial_sums],
            "failures": self.failures,
            "ok": self.ok,
        }


def _contribution(report: ConstructionReport, n: int, r: Fraction, tau: Fraction, p: int) -> Contribution:
    a_n, a_next = report.levels[n].a, report.levels[n + 1].a
    b_n = report.levels[n].b
    if r >= 1:
        lo, hi = a_n, a_next / r
    else:
        lo, hi = a_n / r, a_next
    width = hi - lo
    exact = width if r == 1 else None
    if width.sign(p) <= 0:
        return Contribution(n, lo, hi, NEG_INFINITY, exact, False)
    lv = LogValue(enc.add((b_n * (r - 1)).enclose(p), enc.log(width.enclose(p))))
    v = enc.compare(lv.enc, enc.log(Interval.point(tau, p)))
    if v is Verdict.INDETERMINATE:
        raise Indeterminate(f"contribution at level {n} undecided")
    return Contribution(n, lo, hi, lv, exact, v is Verdict.GREATER)


def divergence_certificate(report: ConstructionReport, r, n0: int | None = None,
                           prec: int | None = None) -> DivergenceCertificate:
    """Per-piece lower bounds on the integral of ``g_r = h(x)**r / h(r x)``.

    On the part of piece ``n`` where ``x`` and ``r x`` share the piece,
    ``g_r`` is the constant ``exp((r-1) b_n)``; ``c_n`` is that constant times the
    part's length. With ``n0=None`` the smallest admissible ``n0 >= ceil(r)``
    from which every level passes is reported.
    """
    r = parse_rational(r) if isinstance(r, str) else Fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    p = prec or report.precision
    N = report.depth
    tau = Fraction(1, 2) / max(r, Fraction(1))
    lowest = max(1, math.ceil(r))
    if n0 is not None and n0 < lowest:
        raise ValueError(f"n0 must be at least ceil(r) = {lowest}")
    start = lowest if n0 is None else n0
    contribs = []
    for n in range(start, N):
        c, _ = enc.escalate(lambda pp, n=n: _contribution(report, n, r, tau, pp), p, DEFAULT_CAP)
        contribs.append(c)
    if n0 is None:
        # first index after the last failing level
        k = 0
        for i, c in enumerate(contribs):
            if not c.passes:
                k = i + 1
        contribs = contribs[k:]
        n0 = start + k
    failures = [f"divergence failure at level {c.level}" for c in contribs if not c.passes]
    if not contribs:
        failures.append("no levels left to certify")
    sums: list[LogValue] = []
    acc = NEG_INFINITY
    for c in contribs:
        acc = log_add_exp(acc, c.log_value)
        sums.append(acc)
    return DivergenceCertificate(r, n0, tau, contribs, sums, failures)
