"""Trace analysis and inequality checkers for flow runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import (
    DiskConfiguration,
    alexandrov_deficit,
    curvature,
    default_smoothing_width,
    equal_radius_target,
    extract_contours,
    fit_comparison_disk,
    rasterize_disks,
)
from .errors import EmptyOrFullSet, FlatFlowError, InsufficientWindow
from .fields import (
    BinaryField,
    ScalarField,
    bv_l1_norms,
    label_components,
    perimeter_estimate,
    symmetric_difference_area,
)
from .solver import FlowKind, MIN_COMPONENT_CELLS
from .spectral import SpectralWorkspace, hminus_norm_sq


@dataclass
class TraceRow:
    step: int
    time: float
    area: float
    perimeter_poly: float
    perimeter_tv: float
    dissipation: float
    lam: float
    clamped: bool
    n_components: int
    deficit_d: int
    deficit_value: float


@dataclass
class FlowTrace:
    """Per-step record of a flow run; h and m are the run parameters."""

    rows: list[TraceRow]
    h: float
    m: float

    def __post_init__(self):
        times = self.column("time")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("trace times must increase strictly")
        if np.any(self.column("dissipation") < 0):
            raise ValueError("dissipation must be nonnegative")

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=np.float64)

    def __len__(self):
        return len(self.rows)


@dataclass
class EnergyReport:
    max_violation: float
    violating_steps: list[int]
    tol_energy: float

    @property
    def ok(self) -> bool:
        return not self.violating_steps


def check_energy_monotone(trace: FlowTrace, flow_kind: FlowKind,
                          h: float | None = None,
                          tol_energy: float = 1e-5) -> EnergyReport:
    """Per-step energy comparison between consecutive trace rows.

    For the curvature flow the compared quantity is the cut-metric perimeter
    plus the area penalty plus dissipation over h; for Mullins-Sekerka the
    perimeter plus h/2 times the dissipation.
    """
    if h is None:
        h = trace.h
    ptv = trace.column("perimeter_tv")
    diss = trace.column("dissipation")
    ar = trace.column("area")
    if flow_kind is FlowKind.APMCF:
        pen = np.abs(ar - trace.m) / np.sqrt(h)
        lhs = ptv[1:] + pen[1:] + diss[1:] / h
        rhs = ptv[:-1] + pen[:-1]
    else:
        lhs = ptv[1:] + 0.5 * h * diss[1:]
        rhs = ptv[:-1]
    viol = lhs - rhs
    bad = np.nonzero(viol > tol_energy)[0] + 1
    max_violation = float(viol.max()) if len(viol) else 0.0
    return EnergyReport(
        max_violation=max_violation,
        violating_steps=[int(b) for b in bad],
        tol_energy=tol_energy,
    )


def tail_decay_check(a, c: float, I=()) -> tuple[bool, int, float]:
    """Geometric tail-sum bound for a nonnegative sequence.

    Hypothesis: for every 1-based index i not in I, the tail sum from i is at
    most c * a_i.  Conclusion: the tail from i+1 is at most
    (1 - 1/c)^(i - |I|) times the total.  Returns (passed, worst_index,
    worst_margin) with margin = bound - tail (negative means failure).
    """
    if not c > 1:
        raise ValueError("the tail constant c must exceed 1")
    a = np.asarray(a, dtype=np.float64)
    K = len(a)
    tails = np.concatenate([np.cumsum(a[::-1])[::-1], [0.0]])  # tails[i-1] from i
    excluded = set(int(i) for i in I)
    worst_idx, worst_margin = 0, np.inf
    ok = True
    for i in range(1, K + 1):
        if i in excluded:
            continue
        margin = c * a[i - 1] - tails[i - 1]
        if margin < worst_margin:
            worst_margin, worst_idx = margin, i
        if margin < -1e-12 * max(1.0, c * a[i - 1]):
            ok = False
    S = float(a.sum())
    q = 1.0 - 1.0 / c
    for i in range(1, K + 1):
        bound = q ** (i - len(excluded)) * S
        margin = bound - tails[i]
        if margin < worst_margin:
            worst_margin, worst_idx = margin, i
        if margin < -1e-12 * max(1.0, bound):
            ok = False
    return ok, worst_idx, float(worst_margin)


def ekeland_perimeter_check(E: BinaryField, cfg: DiskConfiguration):
    """Perimeter of the disk union vs perimeter of E plus the cube-root of
    the symmetric difference; returns (P(F), (P(E), |E xor F|^(1/3)))."""
    if E.is_empty() or E.is_full():
        raise EmptyOrFullSet("comparison set must have a boundary")
    F = rasterize_disks(cfg, E.spec)
    lhs = perimeter_estimate(F)
    sym = symmetric_difference_area(E, F)
    return lhs, (perimeter_estimate(E), sym ** (1.0 / 3.0))


def interpolation_check(phi: ScalarField, rho_grid, w: SpectralWorkspace) -> float:
    """min over rho of (rho * BV + H^-1 / rho) / L1; zero for the zero field."""
    l1, bv = bv_l1_norms(phi)
    if l1 == 0.0:
        return 0.0
    hm = float(np.sqrt(hminus_norm_sq(phi, w)))
    rho = np.asarray(rho_grid, dtype=np.float64)
    vals = (rho * bv + hm / rho) / l1
    return float(vals.min())


@dataclass
class DecayFit:
    rate: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    floor: float


def fit_exponential_decay(trace: FlowTrace, target_P: float, floor: float) -> DecayFit:
    """Least-squares exponential fit of the perimeter residual above a floor.

    Fits log(perimeter - target_P) against time on the window where the
    residual lies in [floor, half the initial residual].
    """
    t = trace.column("time")
    resid = trace.column("perimeter_poly") - target_P
    if not len(resid) or np.nanmin(resid) > 10.0 * floor:
        raise InsufficientWindow(
            "perimeter never comes within ten floors of the target"
        )
    initial = resid[0]
    sel = (resid >= floor) & (resid <= 0.5 * initial)
    if sel.sum() < 8:
        raise InsufficientWindow(f"only {int(sel.sum())} samples in the fit window")
    tt = t[sel]
    yy = np.log(resid[sel])
    A = np.column_stack([tt, np.ones_like(tt)])
    coef, *_ = np.linalg.lstsq(A, yy, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    pred = A @ coef
    ss_res = float(np.sum((yy - pred) ** 2))
    ss_tot = float(np.sum((yy - yy.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return DecayFit(
        rate=-slope,
        intercept=intercept,
        r_squared=r2,
        window=(float(tt.min()), float(tt.max())),
        floor=floor,
    )


@dataclass
class NotDisks:
    """Returned when a set is not a union of equal disks; carries the reason."""

    reason: str

    def __bool__(self):
        return False


_RESIDUAL_FRACTION = 0.05
_RADIUS_AGREEMENT = 0.05


def detect_limit_configuration(f: BinaryField):
    """Fit every component by a disk; accept only equal, clean disks.

    Returns a DiskConfiguration with the common radius, or NotDisks with the
    failing criterion.
    """
    if f.is_empty():
        return NotDisks("empty set")
    labels, count = label_components(f)
    centers = []
    areas = []
    radii = []
    dx = f.spec.dx
    for lab in range(1, count + 1):
        comp = labels == lab
        if int(comp.sum()) < MIN_COMPONENT_CELLS:
            return NotDisks(f"component {lab} below resolution")
        cf = BinaryField(f.spec, comp)
        try:
            contours = extract_contours(cf)
        except EmptyOrFullSet:
            return NotDisks(f"component {lab} vanishes under smoothing")
        if not contours:
            return NotDisks(f"component {lab} vanishes under smoothing")
        if len(contours) > 1:
            return NotDisks(f"component {lab} has holes")
        c = contours[0]
        if c.winds:
            return NotDisks(f"component {lab} winds around the torus")
        ds = c.length / len(c.points)
        curvature(c, default_smoothing_width(dx, ds))
        try:
            center, r_i, resid = fit_comparison_disk(c)
        except FlatFlowError as exc:
            return NotDisks(f"component {lab}: {exc}")
        if resid > _RESIDUAL_FRACTION * r_i:
            return NotDisks(
                f"component {lab} residual {resid:.4g} exceeds "
                f"{_RESIDUAL_FRACTION:.0%} of r={r_i:.4g}"
            )
        L = f.spec.side_length
        centers.append(np.mod(center, L))
        areas.append(float(c.signed_area()))
        radii.append(r_i)
    r, _gap = equal_radius_target(areas)
    spread = max(abs(ri - r) for ri in radii) / r
    if spread > _RADIUS_AGREEMENT:
        return NotDisks(f"radii disagree by {spread:.1%}")
    return DiskConfiguration(centers=np.array(centers), r=r)


def deficit_of_field(f: BinaryField, m: float) -> tuple[int, float]:
    """(d_star, deficit) of a mask, or (0, nan) when contours are degenerate."""
    try:
        contours = extract_contours(f)
        if not contours:
            return 0, float("nan")
        dx = f.spec.dx
        for c in contours:
            ds = c.length / len(c.points)
            curvature(c, default_smoothing_width(dx, ds))
        rep = alexandrov_deficit(contours, m)
        return rep.d_star, rep.deficit
    except FlatFlowError:
        return 0, float("nan")


# ---------------------------------------------------------------------------
# fixed-order plain-text summaries


def format_deficit(rep) -> str:
    lines = [
        "deficit report",
        f"  d_star        = {rep.d_star}",
        f"  P_d           = {rep.P_d:.12g}",
        f"  perimeter     = {rep.perimeter:.12g}",
        f"  deficit       = {rep.deficit:.12g}",
        f"  curv_norm_sq  = {rep.curv_norm_sq:.12g}",
        f"  ratio         = {rep.ratio:.12g}",
    ]
    return "\n".join(lines)


def format_decay(fit: DecayFit, regime: str | None = None) -> str:
    lines = [
        "decay fit",
        f"  rate          = {fit.rate:.6f}",
        f"  intercept     = {fit.intercept:.6f}",
        f"  r_squared     = {fit.r_squared:.6f}",
        f"  window        = [{fit.window[0]:.6g}, {fit.window[1]:.6g}]",
        f"  floor         = {fit.floor:.6g}",
    ]
    if regime is not None:
        lines.append(f"  regime        = {regime}")
    return "\n".join(lines)


def label_regime(trace: FlowTrace, target_P: float, floor: float) -> str:
    """Empirical regime label: finite-time equilibrium vs ongoing decay."""
    resid = trace.column("perimeter_poly") - target_P
    tail = resid[-max(1, len(resid) // 10):]
    if np.all(np.abs(tail) <= floor):
        return "finite-time-equilibrium (case 2 like)"
    return "exponential-decay (case 1 like)"
