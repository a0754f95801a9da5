"""Pure-NumPy twin of the compiled sweep kernels.

Every function mirrors the Cython implementation operation-for-operation so
the two backends produce bit-identical results (the extension is compiled
with fp-contraction disabled for the same reason).  Reductions are kept out
of this layer on purpose; both backends share the NumPy reduction code in
``ops.py``.
"""

from __future__ import annotations

import numpy as np


def dual_sweep(p, ubar, sigma, betas, offsets):
    """p[d] <- clamp(p[d] + sigma * (shift(ubar, v_d) - ubar), +-betas[d])."""
    for d in range(offsets.shape[0]):
        a, b = int(offsets[d, 0]), int(offsets[d, 1])
        t = np.roll(ubar, (-a, -b), axis=(0, 1))
        t -= ubar
        pd = p[d]
        pd += sigma * t
        np.clip(pd, -betas[d], betas[d], out=pd)


def adjoint_sum(p, offsets, out):
    """out <- sum_d (shift(p[d], -v_d) - p[d]), the negative divergence."""
    out[:] = 0.0
    for d in range(offsets.shape[0]):
        a, b = int(offsets[d, 0]), int(offsets[d, 1])
        t = np.roll(p[d], (a, b), axis=(0, 1))
        t -= p[d]
        out += t


def primal_prox_quadratic(v, div, w, tau, theta, vbar):
    """Prox step for (1/2)||v - w||^2; returns extrapolated vbar in place.

    vnew = (v - tau*div + tau*w) / (1 + tau); vbar = vnew + theta*(vnew - v).
    """
    vnew = v - tau * div
    vnew += tau * w
    vnew /= 1.0 + tau
    vbar[:] = vnew
    vbar -= v
    vbar *= theta
    vbar += vnew
    v[:] = vnew


def primal_prox_box(u, div, g, lam, tau, theta, ubar):
    """Prox step for the [0,1] box with linear field g + lam."""
    t = div + g
    t += lam
    unew = u - tau * t
    np.clip(unew, 0.0, 1.0, out=unew)
    ubar[:] = unew
    ubar -= u
    ubar *= theta
    ubar += unew
    u[:] = unew
