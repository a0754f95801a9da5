"""Direction stencils and calibrated weights for the pairwise total variation.

The solver's perimeter is a cut metric: sums of weighted absolute differences
over a fixed family of grid offsets.  Weights are minimax-calibrated so that
for a straight interface of any orientation the cut metric per unit length is
1 to within the quoted tolerance.  Constants are frozen (not re-fitted at
import time) for bit-exact reproducibility.

Convention: for a field u on an n-by-n periodic grid with spacing dx,

    tv_phys(u) = dx * sum_d  c_d * sum_x |u(x + v_d) - u(x)|

approximates the perimeter when u is a binary indicator.
"""

from __future__ import annotations

import numpy as np

# offset groups: axes, diagonals, (2,1) knights, (3,1) knights
_GROUPS = (
    ((1, 0), (0, 1)),
    ((1, 1), (1, -1)),
    ((2, 1), (1, 2), (2, -1), (1, -2)),
    ((3, 1), (1, 3), (3, -1), (1, -3)),
)

# minimax cut-metric weights per group; max relative anisotropy per family
_WEIGHTS = {
    8: ((0.397824734759, 0.281304567672), 0.0396),
    16: ((0.232866437162, 0.064362154097, 0.104142093376), 0.0136),
    24: ((0.161222700120, 0.114001583753, 0.051838748173, 0.036655432848), 0.0065),
}

DEFAULT_NEIGHBORS = 24


def stencil(neighbors: int = DEFAULT_NEIGHBORS):
    """Return (offsets, weights, anisotropy) for a neighborhood size.

    offsets is an (ndir, 2) int array of cell offsets (one per undirected
    pair direction), weights the matching (ndir,) float array of cut-metric
    coefficients, anisotropy the guaranteed relative deviation bound.
    """
    if neighbors not in _WEIGHTS:
        raise ValueError(f"neighbors must be one of {sorted(_WEIGHTS)}, got {neighbors}")
    group_weights, aniso = _WEIGHTS[neighbors]
    offsets = []
    weights = []
    for g, w in zip(_GROUPS, group_weights):
        for off in g:
            offsets.append(off)
            weights.append(w)
    return (
        np.array(offsets, dtype=np.intp),
        np.array(weights, dtype=np.float64),
        aniso,
    )
