import random
from fractions import Fraction

import pytest
from hypothesis import settings

from logconvex.construction import construct
from logconvex.numerics.exact import ExactReal
from logconvex.piecewise import PiecewiseLogLinear

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def harmonic8():
    return construct("harmonic:1", 8, 256)


@pytest.fixture
def two_piece():
    # f = -x on [0, 2), -x/2 - 1 on [2, inf)
    return PiecewiseLogLinear([-1, Fraction(-1, 2)], [0, -1], [2], convex=True)


def random_convex(rng: random.Random, pieces: int | None = None, sign: str = "any",
                  slope_den: int = 8, max_gap: int = 6) -> PiecewiseLogLinear:
    """Continuous convex F with rational data.

    sign="neg" keeps every slope <= 0 (decreasing h), sign="pos" forces a positive tail.
    """
    n = pieces or rng.randint(1, 6)
    slopes = sorted(Fraction(rng.randint(-4 * slope_den, 2 * slope_den), slope_den) for _ in range(n))
    if sign == "neg":
        slopes = [min(m, Fraction(0)) for m in slopes]
        slopes = [m if m < 0 else Fraction(-1, 16 * (i + 1)) for i, m in enumerate(slopes)]
        slopes.sort()
        if len(set(slopes)) < len(slopes):
            slopes = sorted({*slopes})
    elif sign == "pos":
        if slopes[-1] <= 0:
            slopes[-1] = Fraction(rng.randint(1, slope_den), slope_den)
    breaks, x = [], Fraction(0)
    for _ in range(len(slopes) - 1):
        x += Fraction(rng.randint(1, max_gap * 4), 4)
        breaks.append(x)
    b0 = Fraction(rng.randint(-8, 8), 4)
    icpt = [b0]
    for k in range(1, len(slopes)):
        icpt.append((slopes[k - 1] - slopes[k]) * breaks[k - 1] + icpt[k - 1])
    return PiecewiseLogLinear(slopes, icpt, breaks, convex=True)


def as_float_f(F: PiecewiseLogLinear):
    """Plain-float evaluator built from the raw data (oracle side)."""
    bs = [float(a.as_fraction()) for a in F.breaks]
    ms = [float(m) for m in F.slopes]
    cs = [float(b.as_fraction()) for b in F.intercepts]

    def f(x: float) -> float:
        k = sum(1 for a in bs if a <= x)
        return ms[k] * x + cs[k]

    return f


def exact_f(F: PiecewiseLogLinear, x: Fraction) -> Fraction:
    """Exact rational f(x) from the raw data (oracle side)."""
    k = sum(1 for a in F.breaks if a.cmp(ExactReal(x)) <= 0)
    return F.slopes[k] * x + F.intercepts[k].as_fraction()


__all__ = ["random_convex", "as_float_f", "exact_f", "ExactReal"]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
