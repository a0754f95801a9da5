"""Frozen randomized property suite with regression baselines.

All randomness comes from the documented 64-bit LCG, so every value below is
deterministic; the JSON baselines guard against algorithmic drift.  The
constants here are empirical suite bounds, not claims about universal
constants.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .curves import Contour, DiskConfiguration, alexandrov_deficit, curvature, fit_comparison_disk, rasterize_disks
from .diagnostics import ekeland_perimeter_check, interpolation_check
from .fields import BinaryField, GridSpec, ScalarField
from .isocontour import Loop
from .curves import _resample_loop
from .shapes import Lcg
from .spectral import SpectralWorkspace

BASELINE_RESOURCE = "suite_baselines.json"


def polar_contour(r0, modes, center=(0.0, 0.0), n_vertices=2048,
                  smoothing_w=3, oversample=8) -> Contour:
    """Analytic closed contour r(t) = r0 (1 + sum eps cos(k t + phase)),
    uniformly resampled in arc length with curvature filled.

    The curve is sampled oversample-times denser than the requested vertex
    count so the piecewise-linear resampling does not alias the curvature.
    """
    n_fine = n_vertices * oversample
    t = 2.0 * np.pi * np.arange(n_fine) / n_fine
    r = np.full_like(t, float(r0))
    for eps, k, phase in modes:
        r += r0 * eps * np.cos(k * t + phase)
    pts = np.column_stack([center[0] + r * np.cos(t), center[1] + r * np.sin(t)])
    loop = Loop(vertices=pts, displacement=(0.0, 0.0))
    c = _resample_loop(loop, loop.length / n_vertices)
    return curvature(c, smoothing_w)


def circle_contour(r0, center=(0.0, 0.0), n_vertices=16384) -> Contour:
    return polar_contour(r0, [], center, n_vertices)


# ---------------------------------------------------------------------------
# individual suites


def alexandrov_ratio_suite(n_cases=200, seed=2024):
    """Max |P - P_d| / ||kappa - mean||^2 over random nearly circular
    multi-component families (relative perturbations up to 0.1)."""
    rng = Lcg(seed)
    worst = 0.0
    for _ in range(n_cases):
        d = 1 + int(rng.uniform(0, 3))
        r0 = 0.25 / np.sqrt(d)
        contours = []
        m = 0.0
        for i in range(d):
            n_modes = 1 + int(rng.uniform(0, 2))
            budget = rng.uniform(0.02, 0.1)
            modes = []
            for _ in range(n_modes):
                k = 2 + int(rng.uniform(0, 3))
                phase = rng.uniform(0, 2 * np.pi)
                modes.append((budget / n_modes, k, phase))
            c = polar_contour(r0, modes, center=(2.0 * i, 0.0), n_vertices=1024)
            contours.append(c)
            m += c.signed_area()
        rep = alexandrov_deficit(contours, m)
        if rep.curv_norm_sq > 0:
            worst = max(worst, abs(rep.deficit) / rep.curv_norm_sq)
    return worst


def step5_slopes(eps_grid=(0.02, 0.04, 0.06, 0.08, 0.10), ks=(2, 3, 4), r0=0.25):
    """Fitted residual-vs-eps slope of the comparison-disk fit per mode."""
    slopes = {}
    for k in ks:
        xs, ys = [], []
        for eps in eps_grid:
            c = polar_contour(r0, [(eps, k, 0.0)], n_vertices=1024)
            _, r, resid = fit_comparison_disk(c)
            xs.append(eps)
            ys.append(resid / r0)
        xs = np.asarray(xs)
        ys = np.asarray(ys)
        slopes[k] = float(np.sum(xs * ys) / np.sum(xs * xs))
    return slopes


def ekeland_constant_suite(n_cases=40, seed=77, n_grid=128):
    """Suite bound for (P(disks) - P(E)) / |E xor disks|^(1/3)."""
    rng = Lcg(seed)
    spec = GridSpec(n=n_grid)
    worst = -np.inf
    for _ in range(n_cases):
        d = 1 + int(rng.uniform(0, 3))
        r = rng.uniform(0.08, 0.16)
        centers = []
        tries = 0
        while len(centers) < d and tries < 200:
            tries += 1
            cand = (rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8))
            if all(np.hypot(cand[0] - c[0], cand[1] - c[1]) > 2.2 * r for c in centers):
                centers.append(cand)
        cfg = DiskConfiguration(centers=np.array(centers), r=r)
        base = rasterize_disks(cfg, spec)
        variants = [np.roll(base.mask, (1, 2), axis=(0, 1))]
        for scale in (1.0 - rng.uniform(0.05, 0.2), 1.0 + rng.uniform(0.02, 0.1)):
            other = DiskConfiguration(centers=cfg.centers, r=r * scale)
            variants.append(rasterize_disks(other, spec).mask)
        hole = base.mask.copy()
        hx = int(rng.uniform(0, n_grid))
        hy = int(rng.uniform(0, n_grid))
        rr = max(2, int(rng.uniform(2, 8)))
        yy, xx = np.ogrid[:n_grid, :n_grid]
        hole &= (xx - hx) ** 2 + (yy - hy) ** 2 > rr * rr
        variants.append(hole)
        for mask in variants:
            E = BinaryField(spec, mask)
            if E.is_empty() or E.is_full():
                continue
            lhs, (p_e, sym13) = ekeland_perimeter_check(E, cfg)
            if sym13 > 1e-6:
                worst = max(worst, (lhs - p_e) / sym13)
    return worst


def interpolation_constant_suite(seed=13, n_grid=128):
    """Suite bound for L1 / (rho BV + H^-1 / rho) at the optimal rho."""
    rng = Lcg(seed)
    spec = GridSpec(n=n_grid)
    w = SpectralWorkspace(spec)
    rho_grid = np.logspace(-3, 0, 61)
    coords = (np.arange(n_grid) + 0.5) / n_grid
    X, Y = np.meshgrid(coords, coords)
    fields = []
    strip = ((Y > 0.3) & (Y <= 0.7)).astype(float)
    fields.append(strip - strip.mean())
    disk = ((X - 0.5) ** 2 + (Y - 0.5) ** 2 <= 0.04).astype(float)
    fields.append(disk - disk.mean())
    shifted = np.roll(disk, (3, 5), axis=(0, 1))
    fields.append(disk - shifted)
    for _ in range(6):
        blob = np.zeros_like(strip)
        for _ in range(3):
            cx, cy = rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)
            r = rng.uniform(0.05, 0.15)
            blob = np.maximum(blob, ((X - cx) ** 2 + (Y - cy) ** 2 <= r * r).astype(float))
        fields.append(blob - blob.mean())
    worst = 0.0
    for vals in fields:
        phi = ScalarField(spec, vals)
        ratio = interpolation_check(phi, rho_grid, w)
        if ratio > 0:
            worst = max(worst, 1.0 / ratio)
    return worst


# ---------------------------------------------------------------------------
# driver


@dataclass
class SuiteResult:
    name: str
    value: float
    baseline: float
    ok: bool


def compute_all() -> dict:
    values = {
        "alexandrov_ratio_max": alexandrov_ratio_suite(),
        "ekeland_constant": ekeland_constant_suite(),
        "interpolation_constant": interpolation_constant_suite(),
    }
    for k, slope in step5_slopes().items():
        values[f"step5_slope_k{k}"] = slope
    return values


def load_baselines() -> dict:
    with resources.files("flatflow.data").joinpath(BASELINE_RESOURCE).open() as fh:
        return json.load(fh)


_SYMMETRIC = {"alexandrov_ratio_max", "step5_slope_k2", "step5_slope_k3", "step5_slope_k4"}


def run_suite(tolerance=0.10) -> list[SuiteResult]:
    baselines = load_baselines()
    values = compute_all()
    results = []
    for name, base in sorted(baselines.items()):
        value = values[name]
        if name in _SYMMETRIC:
            ok = abs(value - base) <= tolerance * abs(base)
        else:
            ok = value <= base * (1.0 + tolerance)
        results.append(SuiteResult(name=name, value=value, baseline=base, ok=ok))
    return results


def refreeze(path) -> dict:
    values = compute_all()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(values, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return values
