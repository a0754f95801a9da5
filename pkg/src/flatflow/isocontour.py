"""Oriented marching-squares contour tracing on periodic grids.

Cells sit between the centers of four adjacent grid samples; crossings are
linearly interpolated along cell edges.  Segments are oriented with the
above-level region on the left, so outer boundaries come out
counterclockwise and holes clockwise.  Loops that wind around the torus are
traced in the universal cover and reported with their net displacement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# directed segments per marching-squares case: list of (entry_edge, exit_edge)
# edges: 0 bottom, 1 right, 2 top, 3 left; corner bit k set when sample > iso
# corners: 0 bottom-left, 1 bottom-right, 2 top-right, 3 top-left
_SEGMENTS = {
    0: (),
    1: ((0, 3),),
    2: ((1, 0),),
    3: ((1, 3),),
    4: ((2, 1),),
    6: ((2, 0),),
    7: ((2, 3),),
    8: ((3, 2),),
    9: ((0, 2),),
    11: ((1, 2),),
    12: ((3, 1),),
    13: ((0, 1),),
    14: ((3, 0),),
    15: (),
}
# saddle cases 5 and 10 are resolved with the cell-center average
_SADDLE = {
    5: {True: ((0, 1), (2, 3)), False: ((0, 3), (2, 1))},
    10: {True: ((3, 0), (1, 2)), False: ((3, 2), (1, 0))},
}

_EXIT_TO_NEIGHBOR = {
    0: (-1, 0, 2),  # down, enter through its top edge
    1: (0, 1, 3),
    2: (1, 0, 0),
    3: (0, -1, 1),
}


@dataclass
class Loop:
    """Closed polyline in physical coordinates (universal cover).

    vertices has shape (m, 2) as (x, y) pairs, first vertex not repeated.
    displacement is the (x, y) offset from the last vertex back to the first;
    nonzero only for loops winding around the torus.
    """

    vertices: np.ndarray
    displacement: tuple[float, float]

    @property
    def length(self) -> float:
        closed = np.vstack([self.vertices, self.vertices[:1] + self.displacement])
        return float(np.sum(np.hypot(*np.diff(closed, axis=0).T)))

    @property
    def winds(self) -> bool:
        return self.displacement != (0.0, 0.0)

    def signed_area(self) -> float:
        """Shoelace area; meaningful only for non-winding loops."""
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        x2, y2 = np.roll(x, -1), np.roll(y, -1)
        return float(0.5 * np.sum(x * y2 - x2 * y))


def _edge_point(edge, i_cell, j_cell, corners, iso, dx):
    """Crossing point of an edge in cell units relative to the grid origin."""
    a0, a1, a2, a3 = corners
    x0 = (j_cell + 0.5) * dx
    y0 = (i_cell + 0.5) * dx
    if edge == 0:
        t = (iso - a0) / (a1 - a0)
        return (x0 + t * dx, y0)
    if edge == 1:
        t = (iso - a1) / (a2 - a1)
        return (x0 + dx, y0 + t * dx)
    if edge == 2:
        t = (iso - a3) / (a2 - a3)
        return (x0 + t * dx, y0 + dx)
    t = (iso - a0) / (a3 - a0)
    return (x0, y0 + t * dx)


def trace_iso_contours(field: np.ndarray, iso: float, dx: float) -> list[Loop]:
    """All closed oriented iso-contours of a periodic scalar field."""
    n, m = field.shape
    above = field > iso
    case = (
        above.astype(np.int8)
        + 2 * np.roll(above, -1, axis=1)
        + 4 * np.roll(np.roll(above, -1, axis=0), -1, axis=1)
        + 8 * np.roll(above, -1, axis=0)
    )
    cells_i, cells_j = np.nonzero((case > 0) & (case < 15))

    # entry-edge -> exit-edge map per active cell
    entry_map: dict[tuple[int, int], dict[int, int]] = {}
    for i, j in zip(cells_i.tolist(), cells_j.tolist()):
        c = int(case[i, j])
        if c in _SADDLE:
            corners = _cell_corners(field, i, j)
            center_above = 0.25 * sum(corners) > iso
            segs = _SADDLE[c][bool(center_above)]
        else:
            segs = _SEGMENTS[c]
        entry_map[(i, j)] = {entry: exit_ for entry, exit_ in segs}

    loops: list[Loop] = []
    used: set[tuple[int, int, int]] = set()
    for i, j in zip(cells_i.tolist(), cells_j.tolist()):
        for entry in sorted(entry_map[(i, j)]):
            if (i, j, entry) in used:
                continue
            loop = _trace_loop(field, entry_map, used, i, j, entry, iso, dx, n, m)
            if loop is not None:
                loops.append(loop)
    return loops


def _cell_corners(field, i, j):
    n, m = field.shape
    i1 = (i + 1) % n
    j1 = (j + 1) % m
    return (
        float(field[i, j]),
        float(field[i, j1]),
        float(field[i1, j1]),
        float(field[i1, j]),
    )


def _trace_loop(field, entry_map, used, i0, j0, entry0, iso, dx, n, m):
    verts = []
    i, j = i0, j0  # wrapped indices
    ii, jj = i0, j0  # universal-cover indices
    entry = entry0
    first = True
    while True:
        key = (i, j, entry)
        if key in used:
            return None  # merged into a previously traced loop fragment
        used.add(key)
        exits = entry_map.get((i, j))
        if exits is None or entry not in exits:
            return None  # inconsistent tie configuration; drop fragment
        corners = _cell_corners(field, i, j)
        if first:
            verts.append(_edge_point(entry, ii, jj, corners, iso, dx))
            first = False
        exit_ = exits[entry]
        verts.append(_edge_point(exit_, ii, jj, corners, iso, dx))
        di, dj, next_entry = _EXIT_TO_NEIGHBOR[exit_]
        ii += di
        jj += dj
        i = (i + di) % n
        j = (j + dj) % m
        entry = next_entry
        if (i, j, entry) == (i0, j0, entry0):
            break
    if len(verts) < 3:
        return None
    # last emitted vertex coincides with the first one up to winding offset
    arr = np.asarray(verts[:-1], dtype=np.float64)
    closing = np.asarray(verts[-1]) - np.asarray(verts[0])
    wx = float(np.round(closing[0] / (m * dx))) * m * dx
    wy = float(np.round(closing[1] / (n * dx))) * n * dx
    return Loop(vertices=arr, displacement=(wx, wy))
