"""Certified construction and analysis of piecewise log-linear functions.

``h(x) = exp(f(x))`` with ``f`` piecewise linear: exact breakpoints and
intercepts, certified integrals, the ratio transform ``h(x)**r / h(r x)``,
the maximal function, and the log-convex counterexample built by
:func:`logconvex.construction.construct`.
"""

__version__ = "0.1.0"
