"""Sweep-kernel backend selection.

The compiled Cython extension is preferred; a pure-NumPy twin with identical
arithmetic is used when the extension is unavailable or when the environment
variable FLATFLOW_FORCE_NUMPY is set.
"""

from __future__ import annotations

import os

from .weights import DEFAULT_NEIGHBORS, stencil

if os.environ.get("FLATFLOW_FORCE_NUMPY"):
    from . import numpy_backend as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _sweeps as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import numpy_backend as _impl

        BACKEND = "numpy"

dual_sweep = _impl.dual_sweep
adjoint_sum = _impl.adjoint_sum
primal_prox_quadratic = _impl.primal_prox_quadratic
primal_prox_box = _impl.primal_prox_box

__all__ = [
    "BACKEND",
    "DEFAULT_NEIGHBORS",
    "stencil",
    "dual_sweep",
    "adjoint_sum",
    "primal_prox_quadratic",
    "primal_prox_box",
]
