"""Minimizing-movement solvers for area-preserving curvature flow and the
periodic two-phase Mullins-Sekerka flow, with contour-level diagnostics for
the convergence to unions of equal disks."""

from ._kernels import BACKEND as kernel_backend

__all__ = ["kernel_backend"]
__version__ = "0.1.0"
