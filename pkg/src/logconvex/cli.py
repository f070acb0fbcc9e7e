"""Command-line front end: construct, verify, integrate, ratio, maxfn, theorem, demo-xx, plot.

Every command prints a fixed-width summary (or JSON with ``--json``) and can
write its JSON document with ``--out``. Magnitudes outside double range are
rendered as ``log10:<value>``, nested when the logarithm is itself huge.

Exit codes: 0 when every certification in the run succeeded, 1 when one
failed, 2 for usage errors and 3 for unreadable input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .construction import (
    CertificationError,
    ConstructionReport,
    ScheduleError,
    SlopeSchedule,
    construct,
    divergence_certificate,
    subexponential_check,
    verify,
)
from .numerics import enclosure as enc
from .numerics.enclosure import DomainError, Enclosure, HugeInterval, Indeterminate, Interval
from .numerics.exact import ExactReal, parse_rational
from .piecewise import DivergenceError, PiecewiseLogLinear, eval_exact, integral_log, maximal_function
from .theorems import integrability_witness, xx_demo

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INPUT = 0, 1, 2, 3
PRECISION_ENV = "LOGCONVEX_PRECISION"
COMMANDS = ("construct", "verify", "integrate", "ratio", "maxfn", "theorem", "demo-xx", "plot")

_DOUBLE_MAX_LOG2 = 1000


class InputError(ValueError):
    """Input file is missing, truncated or not a recognised document."""


@dataclass
class RunConfig:
    command: str
    schedule: str = "harmonic:1"
    depth: int = 8
    precision_bits: int = 256
    r_values: list[Fraction] = field(default_factory=list)
    input_path: Path | None = None
    output_path: Path | None = None
    samples: int = 64

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.depth < 1:
            raise ValueError("depth must be at least 1")
        if self.precision_bits < 64:
            raise ValueError("precision must be at least 64 bits")
        if any(r <= 0 for r in self.r_values):
            raise ValueError("r values must be positive")
        if self.samples < 2:
            raise ValueError("samples must be at least 2")


# -- rendering -------------------------------------------------------------------------
def _log10_enclosure(lg2: Enclosure) -> Enclosure:
    p = lg2.prec
    ten = enc.log2(Interval.point(10, p))
    return enc.div(lg2, ten)


def render_enclosure(x: Enclosure, digits: int = 6) -> str:
    """Midpoint rendering; ``log10:`` prefix (nested as needed) outside double range."""
    if isinstance(x, HugeInterval):
        sign = "-" if x.sgn < 0 else ""
        return f"{sign}log10:{render_enclosure(_log10_enclosure(x.lg), digits)}"
    m = x.mid()
    if m.is_zero():
        return "0"
    if m.magnitude() < _DOUBLE_MAX_LOG2:
        return _fmt(float(m), digits)
    sign = "-" if m.sign < 0 else ""
    return f"{sign}log10:{render_enclosure(_log10_enclosure(enc.log2(Interval.point(abs(m), x.prec))), digits)}"


def _fmt(v: float, digits: int) -> str:
    return repr(v) if digits <= 0 else f"{v:.{digits}g}"


def render_exact(x: ExactReal, digits: int = 6, prec: int = 128) -> str:
    """Exact fraction when short, otherwise a float or ``log10:`` rendering."""
    if x.is_rational():
        q = x.as_fraction()
        s = str(q)
        if len(s) <= 24:
            return s
    if x.is_zero():
        return "0"
    return render_enclosure(x.enclose(prec), digits)


def csv_number(x: ExactReal, prec: int = 128) -> str:
    """Double rendering (round-trips with ``float``) or ``log10:`` outside double range."""
    if x.is_zero():
        return "0.0"
    if x.is_rational() and abs(x.as_fraction()) < 2**_DOUBLE_MAX_LOG2:
        return repr(float(x.as_fraction()))
    return render_enclosure(x.enclose(prec), digits=0)


def _ln10(prec: int) -> Enclosure:
    return enc.log(Interval.point(10, prec))


# -- input ------------------------------------------------------------------------------
def _read_doc(path: Path) -> tuple[str, dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"parse error in {path}: {exc.msg} at line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"parse error in {path}: expected a JSON object")
    return text, doc


def load_input(path: Path) -> tuple[PiecewiseLogLinear, ConstructionReport | None, list[str]]:
    """A stored construction report (re-certified) or a bare piecewise function."""
    text, doc = _read_doc(path)
    try:
        if "levels" in doc:
            ver = verify(text)
            if ver.report is None:
                raise InputError(f"{path}: {'; '.join(ver.failures)}")
            fails = [f for f in ver.failures if f != "re-serialized report differs from the input"]
            return ver.report.function, ver.report, fails
        if "pieces" in doc:
            return PiecewiseLogLinear.from_json(doc), None, []
    except (ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"parse error in {path}: {exc}") from exc
    raise InputError(f"{path} is neither a construction report nor a piecewise function")


def _rationals(text: str) -> list[Fraction]:
    return [parse_rational(t) for t in text.split(",") if t.strip()]


def _write(path: Path | None, text: str) -> None:
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# -- commands ---------------------------------------------------------------------------
def _level_table(rep: ConstructionReport) -> list[str]:
    head = f"{'k':>3} {'a_k':>26} {'b_k':>26} {'m_k':>8} {'C1':>5} {'C2':>5} {'gap':>5} {'cont':>5} {'bits':>6}"
    lines = [head, "-" * len(head)]
    for rec in rep.levels:
        v = rec.verdicts

        def mark(key, want):
            if key not in v:
                return "-"
            return "ok" if v[key] == want else "FAIL"

        lines.append(
            f"{rec.level:>3} {render_exact(rec.a):>26} {render_exact(rec.b):>26} {str(rec.slope):>8} "
            f"{mark('c1', 'CertainlyLess'):>5} {mark('c2', 'CertainlyGreater'):>5} "
            f"{mark('gap', 'CertainlyGreater'):>5} {mark('continuity', 'Equal'):>5} {rec.precision or '-':>6}"
        )
    return lines


def cmd_construct(cfg: RunConfig, as_json: bool, out) -> int:
    try:
        rep = construct(cfg.schedule, cfg.depth, cfg.precision_bits)
    except CertificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = rep.dumps()
    _write(cfg.output_path, text)
    if as_json:
        out.write(text)
        return EXIT_OK if rep.ok() else EXIT_FAIL
    lines = [f"schedule {rep.schedule.descriptor()}  depth {rep.depth}  precision {rep.precision} bits "
             f"(max used {rep.precision_used})"]
    lines += _level_table(rep)
    if rep.bound is not None:
        lines.append(f"integral of h      {render_enclosure(rep.bound.integral, 12)}  "
                     f"(relative width {rep.bound.relative_width():.2e})")
        lines.append(f"chain bound        {rep.bound.chain} = {float(rep.bound.chain):.12g}  [{rep.bound.verdict.value}]")
    if rep.tail is not None:
        lines.append(f"tail < 2^-{rep.tail['level']}        [{rep.tail['verdict']}]")
    fails = rep.failures()
    lines.append("all certifications passed" if not fails else "FAILED: " + "; ".join(fails))
    out.write("\n".join(lines) + "\n")
    return EXIT_OK if not fails else EXIT_FAIL


def cmd_verify(cfg: RunConfig, as_json: bool, out) -> int:
    text, _ = _read_doc(cfg.input_path)
    try:
        ver = verify(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"parse error in {cfg.input_path}: {exc}") from exc
    doc = ver.to_json()
    _write(cfg.output_path, _dumps(doc))
    if as_json:
        out.write(_dumps(doc))
    else:
        if ver.ok:
            out.write(f"verified: all certifications passed; byte-identical re-serialization: {ver.identical}\n")
        else:
            for f in ver.failures:
                out.write(f"FAIL {f}\n")
    return EXIT_OK if ver.ok else EXIT_FAIL


def cmd_integrate(cfg: RunConfig, lo: Fraction, hi: Fraction | None, as_json: bool, out) -> int:
    F, _, fails = load_input(cfg.input_path)
    try:
        lv = integral_log(F, lo, hi, cfg.precision_bits)
    except DivergenceError as exc:
        doc = {"lo": str(lo), "hi": "inf" if hi is None else str(hi), "integral": "inf", "detail": str(exc)}
        _write(cfg.output_path, _dumps(doc))
        out.write(_dumps(doc) if as_json else f"integral over [{doc['lo']}, {doc['hi']}) diverges: {exc}\n")
        return EXIT_OK if not fails else EXIT_FAIL
    doc = {
        "lo": str(lo),
        "hi": "inf" if hi is None else str(hi),
        "log_integral": lv.to_json(),
        "integral": None if lv.enc is None else enc.to_json(lv.value()),
        "input_failures": fails,
    }
    _write(cfg.output_path, _dumps(doc))
    if as_json:
        out.write(_dumps(doc))
    else:
        val = "0" if lv.enc is None else render_enclosure(lv.value(), 15)
        ln = "-inf" if lv.enc is None else render_enclosure(lv.enc, 15)
        out.write(f"range        [{doc['lo']}, {doc['hi']})\n")
        out.write(f"ln integral  {ln}\n")
        out.write(f"integral     {val}\n")
        for f in fails:
            out.write(f"FAIL {f}\n")
    return EXIT_OK if not fails else EXIT_FAIL


def cmd_ratio(cfg: RunConfig, partial_sums: bool, n0: int | None, as_json: bool, out) -> int:
    _, rep, fails = load_input(cfg.input_path)
    if rep is None:
        raise InputError("ratio needs a construction report (the certificate uses its levels)")
    certs = [divergence_certificate(rep, r, n0, cfg.precision_bits) for r in cfg.r_values]
    doc = {"certificates": [c.to_json() for c in certs], "input_failures": fails}
    _write(cfg.output_path, _dumps(doc))
    ok = not fails and all(c.ok for c in certs)
    if as_json:
        out.write(_dumps(doc))
        return EXIT_OK if ok else EXIT_FAIL
    for c in certs:
        out.write(f"r = {c.r}  n0 = {c.n0}  threshold {c.threshold}  {'ok' if c.ok else 'FAILED'}\n")
        out.write(f"{'level':>5} {'contribution':>28} {'pass':>5}" + (f" {'partial sum':>28}" if partial_sums else "") + "\n")
        exact_sum = ExactReal(0)
        for con, s in zip(c.contributions, c.partial_sums):
            if con.exact is not None:
                exact_sum = exact_sum + con.exact
                val = render_exact(con.exact)
                ps = render_exact(exact_sum)
            else:
                val = "0" if con.log_value.enc is None else render_enclosure(con.log_value.value())
                ps = "0" if s.enc is None else render_enclosure(s.value())
            line = f"{con.level:>5} {val:>28} {'ok' if con.passes else 'FAIL':>5}"
            if partial_sums:
                line += f" {ps:>28}"
            out.write(line + "\n")
        for f in c.failures:
            out.write(f"FAIL {f}\n")
    for f in fails:
        out.write(f"FAIL {f}\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_maxfn(cfg: RunConfig, points: list[Fraction], as_json: bool, out) -> int:
    F, _, fails = load_input(cfg.input_path)
    rows = []
    for a in points:
        res = maximal_function(F, a, cfg.precision_bits)
        rows.append((a, res))
    doc = {"points": [dict(res.to_json(), a=str(a)) for a, res in rows], "input_failures": fails}
    _write(cfg.output_path, _dumps(doc))
    if as_json:
        out.write(_dumps(doc))
    else:
        out.write(f"{'a':>12} {'ln H(a)':>24} {'H(a)':>24} {'argmax':>14} {'attained':>20}\n")
        for a, res in rows:
            H = enc.exp(res.log_value)
            out.write(f"{str(a):>12} {render_exact(res.exact_value, 15):>24} {render_enclosure(H, 15):>24} "
                      f"{render_exact(res.argmax):>14} {res.attained.value:>20}\n")
        for f in fails:
            out.write(f"FAIL {f}\n")
    return EXIT_OK if not fails else EXIT_FAIL


def cmd_theorem(cfg: RunConfig, n_max: int, as_json: bool, out) -> int:
    F, rep, fails = load_input(cfg.input_path)
    try:
        w = integrability_witness(F, n_max, cfg.precision_bits)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    doc = w.to_json()
    if rep is not None:
        doc["subexponential"] = {k: v for k, v in subexponential_check(rep).items() if k != "last_abs"}
    doc["input_failures"] = fails
    _write(cfg.output_path, _dumps(doc))
    ok = w.ok and not fails
    if as_json:
        out.write(_dumps(doc))
        return EXIT_OK if ok else EXIT_FAIL
    out.write(f"monotonicity      {w.monotonicity.kind.value}\n")
    if w.monotonicity.A is not None:
        out.write(f"  A = {render_exact(w.monotonicity.A)}  c = {w.monotonicity.c}  "
                  f"h(n+1)/h(n) >= {render_enclosure(w.ratio_bound, 12)}\n")
    for k, v in w.hypotheses.items():
        out.write(f"hypothesis {k:<18} {v}\n")
    if w.pointwise_ok is not None:
        out.write(f"pointwise h(2x) <= h(x) at {len(w.pointwise)} transform breakpoints: {'ok' if w.pointwise_ok else 'FAIL'}\n")
        out.write(f"window comparisons on [0, X]: {len(w.windows)}  {'ok' if w.comparison_ok else 'FAIL'}\n")
        ih = "inf" if w.integral_h is None else render_enclosure(w.integral_h.value(), 12)
        ig = "inf" if w.integral_g2 is None else render_enclosure(w.integral_g2.value(), 12)
        out.write(f"integral of h      {ih}\nintegral of g_2    {ig}\n")
    out.write("witness ok\n" if w.ok else "witness FAILED\n")
    for f in fails:
        out.write(f"FAIL {f}\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_demo_xx(cfg: RunConfig, X: int, quad_points: int, as_json: bool, out) -> int:
    rep = xx_demo(X, quad_points, prec=max(128, cfg.precision_bits // 2))
    doc = rep.to_json()
    _write(cfg.output_path, _dumps(doc))
    if as_json:
        out.write(_dumps(doc))
        return EXIT_OK
    ri = rep.ratio_integral
    out.write(f"integral of h(x)^2/h(2x) = 1/ln 4 in [{float(ri.lo):.17g}, {float(ri.hi):.17g}]\n")
    out.write(f"{'X':>4} {'lower':>24} {'upper':>24}\n")
    for x, v in rep.partial_integrals:
        out.write(f"{x:>4} {float(v.lo):>24.10g} {float(v.hi):>24.10g}\n")
    for n in (1, 2, 10, len(rep.ratios)):
        q = dict(rep.ratios)[n]
        out.write(f"h({n})/h({n + 1}) = {float(q):.6g}\n")
    return EXIT_OK


def _plot_points(F: PiecewiseLogLinear, samples: int, x_max: ExactReal) -> list[ExactReal]:
    pts = {ExactReal(0), x_max}
    for a in F.breaks:
        if a.cmp(x_max) <= 0:
            pts.add(a)
    fill = samples - len(pts)
    if fill > 0:
        lg = x_max.log2_magnitude(64)
        top = enc.upper(lg) if isinstance(lg, Interval) else None
        # fill only up to exponents that are plain integers
        hi_exp = float(top) if top is not None and float(top) < 2**62 else float(max(
            [b.power_of_two_exponent() for b in F.breaks if isinstance(b.power_of_two_exponent(), int)] or [0]))
        lo_exp = min(-4.0, hi_exp - 8)
        for i in range(fill):
            t = lo_exp + (hi_exp - lo_exp) * (i + 1) / (fill + 1)
            if t < _DOUBLE_MAX_LOG2:
                x = ExactReal(Fraction(2.0**t))
            else:
                x = ExactReal.pow2(int(round(t)))
            if x.cmp(x_max) < 0:
                pts.add(x)
    return sorted(pts, key=_SortKey)


class _SortKey:
    __slots__ = ("x",)

    def __init__(self, x):
        self.x = x

    def __lt__(self, other):
        return self.x.cmp(other.x) < 0


def cmd_plot(cfg: RunConfig, x_max: ExactReal | None, log10_x: bool, out) -> int:
    F, _, fails = load_input(cfg.input_path)
    if x_max is None:
        x_max = F.breaks[-1] * 2 if F.breaks else ExactReal(10)
    pts = _plot_points(F, cfg.samples, x_max)
    p = cfg.precision_bits
    ln10 = _ln10(p)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["x", "f", "log10_h"] + [f"log10_g_{r}" for r in cfg.r_values]
    if log10_x:
        head.insert(1, "log10_x")
    w.writerow(head)
    for x in pts:
        fx = eval_exact(F, x)
        row = [csv_number(x), csv_number(fx), _csv_enc(enc.div(fx.enclose(p), ln10)) if not fx.is_zero() else "0.0"]
        for r in cfg.r_values:
            g = fx * r - eval_exact(F, x * r)
            row.append("0.0" if g.is_zero() else _csv_enc(enc.div(g.enclose(p), ln10)))
        if log10_x:
            row.insert(1, "-inf" if x.is_zero() else _csv_enc(_log10_enclosure(x.log2_magnitude(p))))
        w.writerow(row)
    text = buf.getvalue()
    if cfg.output_path is not None:
        _write(cfg.output_path, text)
    else:
        out.write(text)
    for f in fails:
        print(f"FAIL {f}", file=sys.stderr)
    return EXIT_OK if not fails else EXIT_FAIL


def _csv_enc(x: Enclosure) -> str:
    return render_enclosure(x, digits=0)


# -- argument parsing ------------------------------------------------------------------------
def _default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if not raw:
        return 256
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"error: {PRECISION_ENV} must be an integer, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="logconvex", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=None,
                        help=f"working precision in bits (default ${PRECISION_ENV} or 256)")
    common.add_argument("--out", type=Path, default=None, help="write the JSON (CSV for plot) here")
    common.add_argument("--json", action="store_true", help="print JSON instead of the summary")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", parents=[common], help="build and certify a counterexample")
    c.add_argument("--schedule", default="harmonic:1", help="harmonic:c | geometric:c,q | explicit:m0,m1,...")
    c.add_argument("--depth", type=int, default=8)

    v = sub.add_parser("verify", parents=[common], help="re-certify a stored report")
    v.add_argument("path", type=Path)

    i = sub.add_parser("integrate", parents=[common], help="certified integral of h")
    i.add_argument("path", type=Path)
    i.add_argument("--lo", default="0")
    i.add_argument("--hi", default="inf")

    r = sub.add_parser("ratio", parents=[common], help="divergence certificates for h(x)^r/h(rx)")
    r.add_argument("path", type=Path)
    r.add_argument("--r", default="1/2,1,2,3", help="comma-separated rationals")
    r.add_argument("--partial-sums", action="store_true")
    r.add_argument("--n0", type=int, default=None)

    m = sub.add_parser("maxfn", parents=[common], help="maximal function at given points")
    m.add_argument("path", type=Path)
    m.add_argument("--points", default="1", help="comma-separated rationals a")

    t = sub.add_parser("theorem", parents=[common], help="monotonicity dichotomy and integral comparison")
    t.add_argument("path", type=Path)
    t.add_argument("--n-max", type=int, default=50)

    d = sub.add_parser("demo-xx", parents=[common], help="the x^x example")
    d.add_argument("--X", type=int, default=12)
    d.add_argument("--quad-points", type=int, default=256)

    p = sub.add_parser("plot", parents=[common], help="CSV samples of f, log10 h and log10 g_r")
    p.add_argument("path", type=Path)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--log10", action="store_true", help="add a log10(x) column")
    p.add_argument("--r", default="", help="comma-separated r values for g_r columns")
    p.add_argument("--x-max", default=None, help="range end (default twice the last breakpoint)")
    return ap


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    args = ap.parse_args(argv)
    prec = args.precision if args.precision is not None else _default_precision()
    try:
        rs = _rationals(getattr(args, "r", "") or "")
        cfg = RunConfig(
            command=args.command,
            schedule=getattr(args, "schedule", "harmonic:1"),
            depth=getattr(args, "depth", 8),
            precision_bits=prec,
            r_values=rs,
            input_path=getattr(args, "path", None),
            output_path=args.out,
            samples=getattr(args, "samples", 64),
        )
        if args.command == "construct":
            SlopeSchedule.parse(cfg.schedule).validate(cfg.depth + 1)
        if args.command == "demo-xx" and args.X <= 1:
            raise ValueError("--X must exceed 1")
    except (ValueError, ScheduleError) as exc:
        ap.error(str(exc))

    try:
        if args.command == "construct":
            return cmd_construct(cfg, args.json, out)
        if args.command == "verify":
            return cmd_verify(cfg, args.json, out)
        if args.command == "integrate":
            hi = None if args.hi in ("inf", "+inf") else parse_rational(args.hi)
            return cmd_integrate(cfg, parse_rational(args.lo), hi, args.json, out)
        if args.command == "ratio":
            if not cfg.r_values:
                ap.error("--r needs at least one value")
            return cmd_ratio(cfg, args.partial_sums, args.n0, args.json, out)
        if args.command == "maxfn":
            return cmd_maxfn(cfg, _rationals(args.points), args.json, out)
        if args.command == "theorem":
            return cmd_theorem(cfg, args.n_max, args.json, out)
        if args.command == "demo-xx":
            return cmd_demo_xx(cfg, args.X, args.quad_points, args.json, out)
        xm = None if args.x_max is None else ExactReal(parse_rational(args.x_max))
        return cmd_plot(cfg, xm, args.log10, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (Indeterminate, DomainError, DivergenceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
