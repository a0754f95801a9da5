"""Contour-level geometry: extraction, curvature, disk fitting, deficits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import uniform_filter1d

from .errors import EmptyOrFullSet, NonSimpleContour, TooFewVertices
from .fields import BinaryField, DomainKind, GridSpec, smooth_mask
from .isocontour import Loop, trace_iso_contours


@dataclass
class Contour:
    """Closed polyline with uniform arc-length sampling.

    points: (m, 2) array of (x, y) vertices, first vertex not repeated.
    s: (m,) arc length at each vertex, s[0] = 0.
    kappa: (m,) curvature per vertex once filled, positive on convex arcs of
        positively oriented contours.
    displacement: closing offset; nonzero for torus-winding contours.
    """

    points: np.ndarray
    s: np.ndarray
    length: float
    displacement: tuple[float, float] = (0.0, 0.0)
    kappa: np.ndarray | None = None

    @property
    def winds(self) -> bool:
        return self.displacement != (0.0, 0.0)

    def signed_area(self) -> float:
        if self.winds:
            raise NonSimpleContour("enclosed area undefined for winding contours")
        x, y = self.points[:, 0], self.points[:, 1]
        x2, y2 = np.roll(x, -1), np.roll(y, -1)
        return float(0.5 * np.sum(x * y2 - x2 * y))

    def is_positively_oriented(self) -> bool:
        return not self.winds and self.signed_area() > 0.0

    def segment_angles(self) -> np.ndarray:
        """Unwrapped tangent angle per edge (edge i joins vertex i to i+1)."""
        closed = np.vstack([self.points, self.points[:1] + self.displacement])
        d = np.diff(closed, axis=0)
        return np.unwrap(np.arctan2(d[:, 1], d[:, 0]))


def _resample_loop(loop: Loop, spacing: float) -> Contour:
    pts = loop.vertices
    closed = np.vstack([pts, pts[:1] + loop.displacement])
    seg = np.hypot(*np.diff(closed, axis=0).T)
    s_nodes = np.concatenate([[0.0], np.cumsum(seg)])
    total = float(s_nodes[-1])
    m = max(16, int(np.ceil(total / spacing)))
    s_new = np.arange(m) * (total / m)
    x = np.interp(s_new, s_nodes, closed[:, 0])
    y = np.interp(s_new, s_nodes, closed[:, 1])
    return Contour(
        points=np.column_stack([x, y]),
        s=s_new,
        length=total,
        displacement=loop.displacement,
    )


def extract_contours(f: BinaryField, spacing: float | None = None) -> list[Contour]:
    """All 0.5-level contours of the smoothed mask, uniformly resampled.

    Outer boundaries are positively oriented, holes negatively; vertex
    spacing is at most one cell.
    """
    if f.is_empty() or f.is_full():
        raise EmptyOrFullSet("no boundary to extract")
    dx = f.spec.dx
    if spacing is None:
        spacing = dx
    loops = trace_iso_contours(smooth_mask(f.mask), 0.5, dx)
    contours = [_resample_loop(lp, spacing) for lp in loops if lp.length > 0]
    contours.sort(key=lambda c: (-c.length, c.points[0, 0], c.points[0, 1]))
    return contours


def default_smoothing_width(dx: float, ds: float) -> int:
    """Moving-average width that suppresses grid stair-step angle noise."""
    return max(3, int(round(4.0 * dx / ds)))


def curvature(c: Contour, smoothing_w: int = 3) -> Contour:
    """Fill vertex curvature from smoothed tangent-angle differences.

    The tangent angle is detrended by its turning-consistent linear part,
    smoothed with a circular moving average of smoothing_w samples, and
    differenced over arc length.  Returns the same contour with kappa set.
    """
    m = len(c.points)
    if m < 16:
        raise TooFewVertices(f"contour has {m} vertices, need at least 16")
    closed = np.vstack([c.points, c.points[:1] + np.asarray(c.displacement)])
    d = np.diff(closed, axis=0)
    raw = np.arctan2(d[:, 1], d[:, 0])
    theta = np.unwrap(raw)
    d_close = (raw[0] - raw[-1] + np.pi) % (2.0 * np.pi) - np.pi
    turn = (theta[-1] - theta[0]) + d_close  # 2 pi times the turning number
    trend = theta[0] + turn * (np.arange(m) / m)
    resid = theta - trend
    if smoothing_w > 1:
        resid = uniform_filter1d(resid, size=int(smoothing_w), mode="wrap")
    theta_s = resid + trend
    ds = c.length / m
    # vertex i sits between edge i-1 and edge i
    dtheta = theta_s - np.roll(theta_s, 1)
    dtheta[0] += turn  # close the angle cycle across the seam
    c.kappa = dtheta / ds
    return c


def gauss_bonnet(c: Contour) -> float:
    """Trapezoidal total curvature; 2 pi for a simple positive contour."""
    if c.kappa is None:
        raise ValueError("curvature not filled; call curvature() first")
    ds = c.length / len(c.points)
    return float(np.sum(c.kappa) * ds)


def fit_comparison_disk(c: Contour):
    """Fit the arc-length comparison circle to a nearly circular contour.

    The radial direction is reconstructed by integrating the curvature along
    arc length; the center is the mean offset between the contour and the
    circle of radius length/(2 pi) in that direction.  The radius matches the
    enclosed area, and the returned residual is the sup distance to the
    uniform-speed circle model after optimizing its phase (720-point scan
    plus golden-section refinement).

    Returns (center, radius, sup_residual).
    """
    if c.winds:
        raise NonSimpleContour("winding contour cannot be fitted by a disk")
    area = c.signed_area()
    if area <= 0:
        raise NonSimpleContour("contour must be positively oriented")
    if c.kappa is None:
        raise ValueError("curvature not filled; call curvature() first")
    pts = c.points
    m = len(pts)
    l = c.length
    ds = l / m
    r = float(np.sqrt(area / np.pi))
    # tangent angle from integrated curvature, anchored on the first edge;
    # the outward radial direction trails the tangent by pi/2
    d0 = (pts[1] - pts[0]) if m > 1 else np.array([1.0, 0.0])
    alpha0 = float(np.arctan2(d0[1], d0[0]))
    mids = 0.5 * (c.kappa + np.roll(c.kappa, -1))
    theta_hat = alpha0 + np.concatenate([[0.0], np.cumsum(mids[:-1]) * ds])
    psi_hat = theta_hat - 0.5 * np.pi
    rho = l / (2.0 * np.pi)
    center = np.mean(
        pts - rho * np.column_stack([np.cos(psi_hat), np.sin(psi_hat)]), axis=0
    )

    base = 2.0 * np.pi * np.arange(m) / m + (alpha0 - 0.5 * np.pi)

    def residual_at(phi):
        psi = base + phi
        model = center + r * np.column_stack([np.cos(psi), np.sin(psi)])
        return float(np.max(np.hypot(*(pts - model).T)))

    phis = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
    k = int(np.argmin([residual_at(p) for p in phis]))
    a = phis[k] - 2.0 * np.pi / 720
    b = phis[k] + 2.0 * np.pi / 720
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    c1 = b - golden * (b - a)
    c2 = a + golden * (b - a)
    f1, f2 = residual_at(c1), residual_at(c2)
    for _ in range(60):
        if f1 <= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - golden * (b - a)
            f1 = residual_at(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + golden * (b - a)
            f2 = residual_at(c2)
    residual = min(f1, f2)
    return np.asarray(center), r, residual


@dataclass
class DiskConfiguration:
    """Candidate limit set: d disks of one common radius."""

    centers: np.ndarray
    r: float

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=np.float64))
        if not self.r > 0:
            raise ValueError("radius must be positive")
        if len(self.centers) < 1:
            raise ValueError("need at least one disk")

    @property
    def d(self) -> int:
        return len(self.centers)


@dataclass
class DeficitReport:
    d_star: int
    P_d: float
    perimeter: float
    deficit: float
    curv_norm_sq: float
    ratio: float
    mean_curvature: float = field(default=0.0)


def alexandrov_deficit(contours: list[Contour], m: float) -> DeficitReport:
    """Perimeter deficit against the best union of d equal disks of area m.

    Requires kappa filled on every contour.  d is searched over the finite
    bracket 1..ceil(P^2 / (4 pi m)) past which the disk perimeter exceeds P.
    """
    if m <= 0:
        raise ValueError("total area m must be positive")
    P = 0.0
    total_curv = 0.0
    for c in contours:
        if c.kappa is None:
            raise ValueError("curvature not filled on a contour")
        P += c.length
        total_curv += gauss_bonnet(c)
    kbar = total_curv / P
    curv_sq = 0.0
    for c in contours:
        ds = c.length / len(c.points)
        curv_sq += float(np.sum((c.kappa - kbar) ** 2) * ds)
    d_max = max(1, int(np.ceil(P**2 / (4.0 * np.pi * m))))
    ds_all = np.arange(1, d_max + 1)
    P_ds = 2.0 * np.sqrt(np.pi * m * ds_all)
    d_star = int(ds_all[np.argmin(np.abs(P - P_ds))])
    P_d = float(2.0 * np.sqrt(np.pi * m * d_star))
    deficit = P - P_d
    ratio = np.inf if curv_sq == 0 else deficit / curv_sq
    return DeficitReport(
        d_star=d_star,
        P_d=P_d,
        perimeter=P,
        deficit=deficit,
        curv_norm_sq=curv_sq,
        ratio=ratio,
        mean_curvature=kbar,
    )


def equal_radius_target(areas) -> tuple[float, float]:
    """Common radius of equal disks with the same total area, and the
    pairwise squared radius spread controlling the perimeter gap."""
    areas = np.asarray(areas, dtype=np.float64)
    if np.any(areas <= 0):
        raise ValueError("areas must be positive")
    radii = np.sqrt(areas / np.pi)
    d = len(radii)
    r = float(np.sqrt(np.sum(radii**2) / d))
    diff = radii[:, None] - radii[None, :]
    gap = float(np.sum(np.triu(diff**2, k=1)))
    return r, gap


def _periodic_delta(a, b, L):
    d = a - b
    return (d + 0.5 * L) % L - 0.5 * L


def rasterize_disks(cfg: DiskConfiguration, spec: GridSpec) -> BinaryField:
    n, L = spec.n, spec.side_length
    coords = (np.arange(n) + 0.5) * spec.dx
    X, Y = np.meshgrid(coords, coords)  # X varies along columns, Y along rows
    mask = np.zeros((n, n), dtype=bool)
    for cx, cy in cfg.centers:
        if spec.domain is DomainKind.TORUS:
            dxs = _periodic_delta(X, cx, L)
            dys = _periodic_delta(Y, cy, L)
        else:
            dxs, dys = X - cx, Y - cy
        mask |= dxs**2 + dys**2 <= cfg.r**2
    return BinaryField(spec, mask)


def hausdorff_boundary_gap(f: BinaryField, cfg: DiskConfiguration) -> float:
    """Max distance from cells of the symmetric difference to the disk
    boundaries of the configuration (rasterized on the same grid)."""
    if f.is_empty():
        raise EmptyOrFullSet("empty set has no boundary gap")
    ref = rasterize_disks(cfg, f.spec)
    xor = np.logical_xor(f.mask, ref.mask)
    if not xor.any():
        return 0.0
    n, L = f.spec.n, f.spec.side_length
    coords = (np.arange(n) + 0.5) * f.spec.dx
    ii, jj = np.nonzero(xor)
    x, y = coords[jj], coords[ii]
    dist = np.full(x.shape, np.inf)
    for cx, cy in cfg.centers:
        if f.spec.domain is DomainKind.TORUS:
            ddx = _periodic_delta(x, cx, L)
            ddy = _periodic_delta(y, cy, L)
        else:
            ddx, ddy = x - cx, y - cy
        dist = np.minimum(dist, np.abs(np.hypot(ddx, ddy) - cfg.r))
    return float(dist.max())


def export_contour_csv(c: Contour, path) -> None:
    """Write one contour as CSV rows (s, x, y, kappa) with a header."""
    kappa = c.kappa if c.kappa is not None else np.full(len(c.points), np.nan)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("s,x,y,kappa\n")
        for s, (x, y), k in zip(c.s, c.points, kappa):
            fh.write(f"{s:.17g},{x:.17g},{y:.17g},{k:.17g}\n")
