"""Shared NumPy reductions used by both kernel backends.

Kept out of the backend layer so gap computations and perimeter sums run
through identical code regardless of which sweep implementation is active.
"""

from __future__ import annotations

import numpy as np


def shift(u, a, b):
    """u evaluated at x + (a, b) cells, periodic."""
    return np.roll(u, (-a, -b), axis=(0, 1))


def apply_differences(u, offsets):
    """Stack of D_d u = u(x + v_d) - u(x), shape (ndir, n, n)."""
    out = np.empty((offsets.shape[0],) + u.shape, dtype=np.float64)
    for d in range(offsets.shape[0]):
        a, b = int(offsets[d, 0]), int(offsets[d, 1])
        out[d] = shift(u, a, b)
        out[d] -= u
    return out


def adjoint_sum_np(p, offsets):
    """sum_d (p_d(x - v_d) - p_d(x)); NumPy version for gap bookkeeping."""
    out = np.zeros(p.shape[1:], dtype=np.float64)
    for d in range(offsets.shape[0]):
        a, b = int(offsets[d, 0]), int(offsets[d, 1])
        t = np.roll(p[d], (a, b), axis=(0, 1))
        t -= p[d]
        out += t
    return out


def tv_sum(u, weights, offsets) -> float:
    """sum_d w_d sum_x |u(x + v_d) - u(x)| in cell units."""
    total = 0.0
    for d in range(offsets.shape[0]):
        a, b = int(offsets[d, 0]), int(offsets[d, 1])
        t = shift(u, a, b)
        t -= u
        total += weights[d] * float(np.abs(t).sum())
    return total
