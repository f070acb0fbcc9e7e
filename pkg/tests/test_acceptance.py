"""Acceptance criteria 1-10, one PASS/FAIL line each.

Lines are printed in the pytest terminal summary; running this file directly
(``python3 tests/test_acceptance.py``) prints them without pytest.
"""

import functools
import io
import json
import math
import random
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy import integrate

from logconvex import kernels
from logconvex.cli import main as cli_main
from logconvex.construction import (
    construct,
    divergence_certificate,
    integral_upper_bound,
    subexponential_check,
    verify,
)
from logconvex.numerics import ExactReal, Interval, Verdict
from logconvex.numerics import enclosure as enc
from logconvex.piecewise import eval_exact, maximal_function, segment_integral_log
from logconvex.theorems import Monotonicity, classify_monotonicity, integrability_witness, xx_demo
from tests.conftest import exact_f, random_convex
from tests.oracles.exact_rational import construct_levels

RESULTS: dict[int, tuple[bool, str]] = {}
_DETAIL: dict[int, str] = {}


def criterion(n: int, title: str):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            _DETAIL[n] = ""
            try:
                fn(*args, **kwargs)
            except BaseException as exc:
                RESULTS[n] = (False, f"{title}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
                raise
            RESULTS[n] = (True, f"{title}: {_DETAIL[n]}")

        return wrapper

    return deco


def note(n: int, text: str) -> None:
    _DETAIL[n] = text


@pytest.fixture(scope="module")
def report():
    return construct("harmonic:1", 8, 256)


@criterion(1, "construction soundness")
def test_c1_construction_soundness(tmp_path):
    out = tmp_path / "h8.json"
    t0 = time.perf_counter()
    code = cli_main(["construct", "--schedule", "harmonic:1", "--depth", "8", "--precision", "256",
                     "--out", str(out)], out=io.StringIO())
    elapsed = time.perf_counter() - t0
    assert code == 0
    doc = json.loads(out.read_text())
    verdicts = [v for lv in doc["levels"][1:] for v in lv["verdicts"].values()]
    assert "Indeterminate" not in verdicts
    assert elapsed < 30
    a_ref, b_ref = construct_levels(3)
    a = [ExactReal.from_json(lv["a"]).as_fraction() for lv in doc["levels"][:4]]
    b = [ExactReal.from_json(lv["b"]).as_fraction() for lv in doc["levels"][:3]]
    assert a == a_ref == [0, 2, 4, 16]
    assert b == b_ref[:3] == [0, -1, Fraction(-5, 3)]
    note(1, f"{elapsed:.2f} s, {len(verdicts)} verdicts certain, a_1..a_3 = 2, 4, 16, b_2 = -5/3")


@criterion(2, "integrability bound")
def test_c2_integrability_bound(report):
    bd = integral_upper_bound(report)
    assert bd.chain == 2 - Fraction(1, 2**8)
    assert bd.verdict is Verdict.LESS
    w = bd.relative_width()
    assert w < 1e-20
    note(2, f"integral {float(bd.integral.mid()):.12f} < {bd.chain}, relative width {w:.1e}")


@criterion(3, "divergence of h^r(x)/h(rx)")
def test_c3_divergence(report):
    parts = []
    for r in (Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3)):
        cert = divergence_certificate(report, r)
        assert cert.ok
        assert cert.n0 <= math.ceil(r) + 2
        levels = [c.level for c in cert.contributions]
        assert levels == list(range(cert.n0, report.depth))
        tau = Fraction(1, 2) / max(r, 1)
        for c in cert.contributions:
            assert enc.compare(c.log_value.enc, enc.log(Interval.point(tau, 256))) is Verdict.GREATER
        if r == 1:
            a = report.breakpoints
            for c in cert.contributions:
                assert c.exact == a[c.level + 1] - a[c.level] and c.exact.cmp(ExactReal(1)) > 0
        parts.append(f"r={r}: n0={cert.n0}")
    note(3, ", ".join(parts))


@criterion(4, "subexponential condition")
def test_c4_subexponential(report):
    chk = subexponential_check(report)
    assert all(row["sandwich"] for row in chk["rows"])
    last = chk["last_abs"]
    assert enc.compare(last, Interval.point(Fraction(1, 5), 256)) is Verdict.LESS
    # |c_k| strictly decreasing from level 3 on
    assert all(row["magnitude_decreasing"] for row in chk["rows"] if row["level"] >= 3)
    chords = [abs(c) for c in chk["chords_float"]]
    assert all(x > y for x, y in zip(chords[2:], chords[3:]))
    note(4, f"|f(a_8)/a_8| = {float(last.mid()):.4f} < 0.2, sandwich at all {len(chk['rows'])} levels")


def _grid_oracle(breaks, slopes, icpt, a: float, exact_top: float, width: float) -> bool:
    hi = max(breaks[-1] * 2 if breaks else 0.0, a * 8, 64.0)
    grid = np.unique(np.concatenate([np.linspace(a, a + 64, 4097), np.geomspace(a, hi, 4097)]))
    top, _ = kernels.grid_max_phi(np.asarray(breaks, float), np.asarray(slopes, float),
                                  np.asarray(icpt, float), a, grid)
    scale = max(1.0, abs(exact_top), max(abs(v) for v in icpt) if icpt else 1.0)
    return top <= exact_top + width + 1e-9 * scale


@criterion(5, "maximal function")
def test_c5_maximal_function(report):
    rng = random.Random(20240501)
    F = report.function
    # pieces 0..5 fit doubles and describe F exactly on [0, a_6)
    br = [float(x.as_fraction()) for x in F.breaks[:5]]
    sl = [float(m) for m in F.slopes[:6]]
    ic = [float(b.as_fraction()) for b in F.intercepts[:6]]
    checked = 0
    for _ in range(10):
        a = Fraction(rng.randint(1, 2**20), rng.randint(1, 64))
        res = maximal_function(F, a)
        assert res.argmax == ExactReal(a)
        assert res.exact_value == eval_exact(F, a) - eval_exact(F, a * 2)
        assert res.log_value.lo.to_fraction() <= exact_f(F, a) - exact_f(F, 2 * a) <= res.log_value.hi.to_fraction()
        assert _grid_oracle(br, sl, ic, float(a), float(res.log_value.mid()), float(res.log_value.width()))
        checked += 1
    for _ in range(100):
        G = random_convex(rng)
        gb = [float(x.as_fraction()) for x in G.breaks]
        gs = [float(m) for m in G.slopes]
        gi = [float(b.as_fraction()) for b in G.intercepts]
        for _ in range(10):
            a = Fraction(rng.randint(1, 400), rng.randint(1, 16))
            res = maximal_function(G, a)
            assert res.argmax == ExactReal(a)
            want = exact_f(G, a) - exact_f(G, 2 * a)
            assert res.log_value.lo.to_fraction() <= want <= res.log_value.hi.to_fraction()
            assert _grid_oracle(gb, gs, gi, float(a), float(res.log_value.mid()), float(res.log_value.width()))
            checked += 1
    note(5, f"{checked} (F, a) pairs, argmax = a, grid search finds nothing larger")


@criterion(6, "decreasing branch comparison")
def test_c6_decreasing_branch():
    rng = random.Random(6)
    windows = 0
    for _ in range(100):
        F = random_convex(rng, sign="neg")
        assert classify_monotonicity(F).kind is Monotonicity.DECREASING_EVERYWHERE
        w = integrability_witness(F, n_max=5)
        assert w.pointwise_ok
        for row in w.pointwise:
            x = ExactReal.from_json(row["x"]).as_fraction()
            assert exact_f(F, x) - exact_f(F, 2 * x) >= 0
        assert w.comparison_ok
        windows += len(w.windows)
        # g_2 is constant on its final piece, so "whenever finite" never triggers on the full line
        assert w.integral_g2 is None
    note(6, f"100 functions, pointwise exact, {windows} window comparisons [0, X] certified; "
            "full-line g_2 integral always infinite")


@criterion(7, "increasing branch gap")
def test_c7_increasing_branch():
    rng = random.Random(7)
    for _ in range(100):
        F = random_convex(rng, sign="pos")
        v = classify_monotonicity(F)
        assert v.kind is Monotonicity.INCREASING_BEYOND and v.c > 0
        A = v.A.as_fraction()
        n = math.floor(A) + 1
        for k in range(n, n + 50):
            assert exact_f(F, Fraction(k + 1)) - exact_f(F, Fraction(k)) >= v.c
        w = integrability_witness(F, n_max=5)
        assert w.contradiction_gap == v.c
        assert enc.compare(w.ratio_bound, Interval.point(1, 256)) is Verdict.GREATER
    note(7, "100 functions, f(n+1) - f(n) >= c exactly for 50 integers n > A each")


@criterion(8, "x^x example")
def test_c8_xx():
    rep = xx_demo(12, 256, n_max=100)
    with mpmath.workdps(50):
        ref = 1 / mpmath.log(4)
        err = max(abs(mpmath.mpf(rep.ratio_integral.lo.mpf) - ref), abs(mpmath.mpf(rep.ratio_integral.hi.mpf) - ref))
    assert err < 1e-12
    X, part = rep.partial_integrals[-1]
    assert X == 12 and float(part.lo) > 1e6
    with mpmath.workdps(34):
        quad = mpmath.quad(lambda t: t**t, mpmath.linspace(1, 12, 23))
    assert float(part.lo) <= float(quad) <= float(part.hi)
    q100 = dict(rep.ratios)[100]
    assert q100 == Fraction(100**100, 101**101) and q100 < Fraction(1, 100)
    note(8, f"1/ln4 error {float(err):.1e}, integral over [1,12] = {float(quad):.4e}, h(100)/h(101) = {float(q100):.5f}")


@criterion(9, "quadrature oracle equivalence")
def test_c9_quadrature():
    rng = random.Random(9)
    worst = 0.0
    done = 0
    while done < 1000:
        m = Fraction(rng.randint(-400, 400), rng.randint(1, 100))
        b = Fraction(rng.randint(-1000, 1000), 100)
        x1 = Fraction(rng.randint(0, 4000), 100)
        if done % 5 == 0 and m < 0:
            x2 = None
        else:
            x2 = x1 + Fraction(rng.randint(1, 2000), 100)
        # double range: the exponent stays within +-600 on the piece
        ends = [m * x1 + b] + ([m * x2 + b] if x2 is not None else [])
        if max(abs(e) for e in ends) > 600:
            continue
        done += 1
        got = float(enc.exp(segment_integral_log(m, b, x1, x2).enc).mid())
        f = lambda t, m=float(m), b=float(b): math.exp(m * t + b)
        if x2 is None:
            ref, _ = integrate.quad(f, float(x1), math.inf, epsabs=0, epsrel=1e-12, limit=500)
        else:
            ref, _ = integrate.quad(f, float(x1), float(x2), epsabs=0, epsrel=1e-12, limit=500)
        rel = abs(got - ref) / abs(ref)
        worst = max(worst, rel)
        assert rel < 1e-10, (m, b, x1, x2, got, ref)
    note(9, f"1000 pieces, worst relative error {worst:.1e}")


@criterion(10, "persistence round trip")
def test_c10_persistence(report, tmp_path):
    text = report.dumps()
    p = tmp_path / "r.json"
    p.write_text(text)
    ver = verify(p.read_text())
    assert ver.ok and ver.identical
    assert ver.report.dumps() == text
    assert ver.report.verdict_table() == report.verdict_table()
    code = cli_main(["verify", str(p)], out=io.StringIO())
    assert code == 0
    note(10, f"{len(text)} bytes re-serialized identically, {len(report.verdict_table())} level verdicts equal")


def summary_lines() -> list[str]:
    lines = []
    for n in range(1, 11):
        if n not in RESULTS:
            lines.append(f"criterion {n:>2}: NOT RUN")
            continue
        ok, detail = RESULTS[n]
        lines.append(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return lines


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    rep = construct("harmonic:1", 8, 256)
    tests = [
        (test_c1_construction_soundness, ("tmp",)), (test_c2_integrability_bound, ("rep",)),
        (test_c3_divergence, ("rep",)), (test_c4_subexponential, ("rep",)),
        (test_c5_maximal_function, ("rep",)), (test_c6_decreasing_branch, ()),
        (test_c7_increasing_branch, ()), (test_c8_xx, ()), (test_c9_quadrature, ()),
        (test_c10_persistence, ("rep", "tmp")),
    ]
    for fn, needs in tests:
        with tempfile.TemporaryDirectory() as d:
            args = [rep if k == "rep" else Path(d) for k in needs]
            try:
                fn(*args)
            except BaseException:
                pass
    print("\n".join(summary_lines()))
