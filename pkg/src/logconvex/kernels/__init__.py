"""float64 kernels with a compiled core and a numpy fallback.

The compiled extension is used when it was built; setting ``LOGCONVEX_PURE=1``
forces the numpy versions. ``BACKEND`` names the active one.
"""

import os

if os.environ.get("LOGCONVEX_PURE", "") not in ("", "0"):
    from ._pykernels import eval_pwl, gk_quad_exp, grid_max_phi

    BACKEND = "numpy"
else:
    try:
        from ._ckernels import eval_pwl, gk_quad_exp, grid_max_phi

        BACKEND = "cython"
    except ImportError:
        from ._pykernels import eval_pwl, gk_quad_exp, grid_max_phi

        BACKEND = "numpy"

from . import _pykernels as pure

__all__ = ["BACKEND", "eval_pwl", "grid_max_phi", "gk_quad_exp", "pure"]
