"""numpy versions of the compiled kernels (same signatures, same results up to rounding)."""

from __future__ import annotations

import numpy as np

from ._gk import WG, WGK, XGK

_X = np.array(XGK)
_WK = np.array(WGK)
_WG = np.array(WG)
# full 15-point node set, left to right
_NODES = np.concatenate([-_X[:7], [0.0], _X[6::-1]])
_WK15 = np.concatenate([_WK[:7], [_WK[7]], _WK[6::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5]] = _WG[:3]
_WG15[[13, 11, 9]] = _WG[:3]
_WG15[7] = _WG[3]


def _f(breaks, slopes, intercepts, xs):
    k = np.searchsorted(breaks, xs, side="right")
    return slopes[k] * xs + intercepts[k]


def eval_pwl(breaks, slopes, intercepts, xs):
    breaks, slopes, intercepts = (np.asarray(v, dtype=np.float64) for v in (breaks, slopes, intercepts))
    return _f(breaks, slopes, intercepts, np.asarray(xs, dtype=np.float64))


def grid_max_phi(breaks, slopes, intercepts, a, bs):
    breaks, slopes, intercepts = (np.asarray(v, dtype=np.float64) for v in (breaks, slopes, intercepts))
    bs = np.asarray(bs, dtype=np.float64)
    if bs.size == 0:
        raise ValueError("empty grid")
    phi = _f(breaks, slopes, intercepts, bs) - _f(breaks, slopes, intercepts, a + bs)
    i = int(np.argmax(phi))
    return float(phi[i]), i


def _gk15(m, b, lo, hi):
    c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
    fx = np.exp(m * (c + h * _NODES) + b)
    rk, rg = fx @ _WK15, fx @ _WG15
    return rk * h, abs((rk - rg) * h)


def gk_quad_exp(m, b, x1, x2, rtol=1e-13, max_intervals=4096):
    if not (x2 >= x1):
        raise ValueError("need x1 <= x2")
    parts = [(x1, x2) + _gk15(m, b, x1, x2)]
    while True:
        total = sum(p[2] for p in parts)
        etotal = sum(p[3] for p in parts)
        if etotal <= rtol * abs(total) or len(parts) >= max_intervals:
            return float(total), float(etotal)
        w = max(range(len(parts)), key=lambda i: parts[i][3])
        lo, hi, _, _ = parts[w]
        mid = 0.5 * (lo + hi)
        parts[w] = (lo, mid) + _gk15(m, b, lo, mid)
        parts.append((mid, hi) + _gk15(m, b, mid, hi))
