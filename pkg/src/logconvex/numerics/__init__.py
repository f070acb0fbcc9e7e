"""Certified arithmetic: directed-rounding reals, enclosures, log domain, exact towers."""

from .bigreal import DEFAULT_PREC, BigReal, Rounding
from .enclosure import (
    DomainError,
    Enclosure,
    HugeInterval,
    Indeterminate,
    Interval,
    Verdict,
    certified_compare,
    compare,
    escalate,
)
from .exact import Dyadic, ExactReal, TowerNum, parse_rational, tower, tower_cmp
from .logdomain import NEG_INFINITY, LogValue, log_add_exp, log_sub_exp

# alternate names
IntervalReal = Interval


def exp_enclosure(x):
    from .enclosure import exp

    return exp(x)


def ln_enclosure(x):
    from .enclosure import log

    return log(x)


__all__ = [
    "DEFAULT_PREC",
    "BigReal",
    "Rounding",
    "DomainError",
    "Enclosure",
    "HugeInterval",
    "Indeterminate",
    "Interval",
    "IntervalReal",
    "Verdict",
    "certified_compare",
    "compare",
    "escalate",
    "exp_enclosure",
    "ln_enclosure",
    "Dyadic",
    "ExactReal",
    "TowerNum",
    "parse_rational",
    "tower",
    "tower_cmp",
    "NEG_INFINITY",
    "LogValue",
    "log_add_exp",
    "log_sub_exp",
]
