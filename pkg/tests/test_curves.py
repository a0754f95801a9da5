"""Contour extraction, curvature, disk fitting, and deficits."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from flatflow.curves import (
    DiskConfiguration,
    alexandrov_deficit,
    curvature,
    default_smoothing_width,
    equal_radius_target,
    extract_contours,
    fit_comparison_disk,
    gauss_bonnet,
    hausdorff_boundary_gap,
    rasterize_disks,
)
from flatflow.errors import NonSimpleContour, TooFewVertices
from flatflow.fields import BinaryField, GridSpec
from flatflow.suite import circle_contour, polar_contour


def coords(n):
    c = (np.arange(n) + 0.5) / n
    return np.meshgrid(c, c)


def test_extract_disk_single_contour():
    spec = GridSpec(n=512)
    X, Y = coords(512)
    f = BinaryField(spec, (X - 0.5) ** 2 + (Y - 0.5) ** 2 <= 0.0625)
    cs = extract_contours(f)
    assert len(cs) == 1
    assert cs[0].length == pytest.approx(2 * np.pi * 0.25, rel=0.01)
    assert cs[0].is_positively_oriented()
    # resampling spacing at most one cell
    assert cs[0].length / len(cs[0].points) <= spec.dx * (1 + 1e-9)


def test_extract_annulus_orientations():
    spec = GridSpec(n=256)
    X, Y = coords(256)
    rr = (X - 0.5) ** 2 + (Y - 0.5) ** 2
    f = BinaryField(spec, (rr <= 0.3**2) & (rr >= 0.15**2))
    cs = extract_contours(f)
    assert len(cs) == 2
    signs = sorted(np.sign(c.signed_area()) for c in cs)
    assert signs == [-1.0, 1.0]


def test_extract_two_disks():
    spec = GridSpec(n=256)
    X, Y = coords(256)
    f = BinaryField(
        spec,
        ((X - 0.3) ** 2 + (Y - 0.3) ** 2 <= 0.01)
        | ((X - 0.7) ** 2 + (Y - 0.7) ** 2 <= 0.01),
    )
    cs = extract_contours(f)
    assert len(cs) == 2
    assert all(c.signed_area() > 0 for c in cs)


def test_extract_strip_winding():
    spec = GridSpec(n=128)
    _, Y = coords(128)
    f = BinaryField(spec, (Y > 0.3) & (Y <= 0.7))
    cs = extract_contours(f)
    assert len(cs) == 2
    assert all(c.winds for c in cs)
    assert all(c.length == pytest.approx(1.0, rel=1e-6) for c in cs)


def test_curvature_circle():
    c = circle_contour(0.25, n_vertices=4096)
    assert np.allclose(c.kappa, 4.0, rtol=1e-3)


def test_curvature_ellipse_major_axis():
    a, b = 0.3, 0.2
    t = np.linspace(0, 2 * np.pi, 32768, endpoint=False)
    pts = np.column_stack([a * np.cos(t), b * np.sin(t)])
    from flatflow.curves import _resample_loop
    from flatflow.isocontour import Loop

    loop = Loop(vertices=pts, displacement=(0.0, 0.0))
    c = curvature(_resample_loop(loop, loop.length / 4096), smoothing_w=3)
    # vertex closest to the major axis
    k = int(np.argmin(np.abs(c.points[:, 0] - a)))
    assert c.kappa[k] == pytest.approx(a / b**2, rel=0.01)


def test_curvature_stadium_flats():
    # stadium: two semicircles radius r joined by straight segments
    r, half = 0.1, 0.25
    ts = np.linspace(-np.pi / 2, np.pi / 2, 400)
    right = np.column_stack([half + r * np.cos(ts), r * np.sin(ts)])
    left = np.column_stack([-half - r * np.cos(ts), -r * np.sin(ts)])
    top = np.column_stack([np.linspace(half, -half, 600), np.full(600, r)])
    bot = np.column_stack([np.linspace(-half, half, 600), np.full(600, -r)])
    pts = np.vstack([bot[:-1], right[:-1], top[:-1], left[:-1]])
    from flatflow.curves import _resample_loop
    from flatflow.isocontour import Loop

    loop = Loop(vertices=pts, displacement=(0.0, 0.0))
    c = curvature(_resample_loop(loop, loop.length / 3000), smoothing_w=3)
    flat = np.abs(c.points[:, 0]) <= half * 0.6
    assert np.max(np.abs(c.kappa[flat])) <= 5e-2


def test_curvature_too_few_vertices():
    from flatflow.curves import Contour

    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]])
    c = Contour(points=pts, s=np.arange(3.0), length=3.0)
    with pytest.raises(TooFewVertices):
        curvature(c)


def test_gauss_bonnet_circle_ellipse_hole():
    c = circle_contour(0.2, n_vertices=2048)
    assert gauss_bonnet(c) == pytest.approx(2 * np.pi, abs=1e-3)
    e = polar_contour(0.25, [(0.2, 2, 0.0)], n_vertices=2048)
    assert gauss_bonnet(e) == pytest.approx(2 * np.pi, abs=1e-3)
    # hole contour from an annulus: negative total curvature
    spec = GridSpec(n=256)
    X, Y = coords(256)
    rr = (X - 0.5) ** 2 + (Y - 0.5) ** 2
    f = BinaryField(spec, (rr <= 0.3**2) & (rr >= 0.15**2))
    cs = extract_contours(f)
    hole = min(cs, key=lambda c: c.signed_area())
    curvature(hole, default_smoothing_width(spec.dx, hole.length / len(hole.points)))
    assert gauss_bonnet(hole) == pytest.approx(-2 * np.pi, abs=1e-3)


def test_gauss_bonnet_component_complex():
    spec = GridSpec(n=512)
    X, Y = coords(512)
    rr = (X - 0.35) ** 2 + (Y - 0.5) ** 2
    mask = ((rr <= 0.2**2) & (rr >= 0.1**2)) | ((X - 0.75) ** 2 + (Y - 0.5) ** 2 <= 0.01)
    f = BinaryField(spec, mask)
    cs = extract_contours(f)
    assert len(cs) == 3
    total = 0.0
    for c in cs:
        curvature(c, default_smoothing_width(spec.dx, c.length / len(c.points)))
        gb = gauss_bonnet(c)
        expected = 2 * np.pi * np.sign(c.signed_area())
        assert gb == pytest.approx(expected, abs=5e-3)
        total += gb
    assert total == pytest.approx(2 * np.pi, abs=1.5e-2)  # 2 outer - 1 hole


def test_fit_disk_exact_circle():
    c = circle_contour(0.25, center=(0.4, 0.6))
    center, r, resid = fit_comparison_disk(c)
    assert np.allclose(center, [0.4, 0.6], atol=1e-6)
    assert r == pytest.approx(0.25, abs=1e-6)
    assert resid <= 1e-6


def test_fit_disk_polar_perturbation():
    c = polar_contour(0.25, [(0.05, 3, 0.3)], n_vertices=2048)
    _, r, resid = fit_comparison_disk(c)
    assert r == pytest.approx(np.sqrt(c.signed_area() / np.pi), rel=1e-12)
    assert resid <= 0.02


def test_fit_disk_flags_fat_ellipse():
    e = polar_contour(0.25, [(0.32, 2, 0.0)], n_vertices=2048)  # roughly 2:1
    _, r, resid = fit_comparison_disk(e)
    assert resid > 0.1 * r


def test_fit_disk_rejects_winding_and_unfilled():
    spec = GridSpec(n=128)
    _, Y = coords(128)
    f = BinaryField(spec, (Y > 0.3) & (Y <= 0.7))
    c = extract_contours(f)[0]
    with pytest.raises(NonSimpleContour):
        fit_comparison_disk(c)


def test_alexandrov_deficit_equal_disks_and_single():
    r = 0.17
    c1 = circle_contour(r, center=(0.0, 0.0), n_vertices=32768)
    c2 = circle_contour(r, center=(1.0, 0.0), n_vertices=32768)
    m = c1.signed_area() + c2.signed_area()
    rep = alexandrov_deficit([c1, c2], m)
    assert rep.d_star == 2
    assert abs(rep.deficit) <= 1e-8
    assert rep.curv_norm_sq <= 1e-8
    single = alexandrov_deficit([c1], c1.signed_area())
    assert single.d_star == 1
    assert abs(single.deficit) <= 1e-8


def test_alexandrov_deficit_ellipse_quadrature_oracle():
    a, b = 0.3, 0.24
    t = np.linspace(0, 2 * np.pi, 32768, endpoint=False)
    pts = np.column_stack([a * np.cos(t), b * np.sin(t)])
    from flatflow.curves import _resample_loop
    from flatflow.isocontour import Loop

    loop = Loop(vertices=pts, displacement=(0.0, 0.0))
    c = curvature(_resample_loop(loop, loop.length / 4096), smoothing_w=3)
    rep = alexandrov_deficit([c], np.pi * a * b)
    assert rep.deficit > 0
    assert rep.curv_norm_sq > 0
    assert np.isfinite(rep.ratio)

    # independent quadrature: perimeter and curvature variance of the ellipse
    def ds(t):
        return np.sqrt(a**2 * np.sin(t) ** 2 + b**2 * np.cos(t) ** 2)

    P, _ = quad(ds, 0, 2 * np.pi, limit=200)
    kbar = 2 * np.pi / P

    def integrand(t):
        k = a * b / ds(t) ** 3
        return (k - kbar) ** 2 * ds(t)

    curv_sq, _ = quad(integrand, 0, 2 * np.pi, limit=200)
    assert rep.perimeter == pytest.approx(P, rel=1e-4)
    assert rep.curv_norm_sq == pytest.approx(curv_sq, rel=0.01)
    d_star = rep.d_star
    assert rep.deficit == pytest.approx(P - 2 * np.sqrt(np.pi * np.pi * a * b * d_star), rel=1e-4)


def test_alexandrov_scale_consistency():
    c = polar_contour(0.2, [(0.06, 3, 0.1)], n_vertices=2048)
    m = c.signed_area()
    rep = alexandrov_deficit([c], m)
    lam = 2.5
    scaled = polar_contour(0.2 * lam, [(0.06, 3, 0.1)], n_vertices=2048)
    rep_s = alexandrov_deficit([scaled], m * lam**2)
    assert rep_s.d_star == rep.d_star
    assert rep_s.perimeter == pytest.approx(lam * rep.perimeter, rel=1e-6)
    assert rep_s.curv_norm_sq == pytest.approx(rep.curv_norm_sq / lam, rel=1e-3)


def test_equal_radius_target_examples():
    r, gap = equal_radius_target([np.pi, np.pi])
    assert (r, gap) == (pytest.approx(1.0), pytest.approx(0.0))
    r, gap = equal_radius_target([np.pi, np.pi * 1.21])
    assert r == pytest.approx(np.sqrt((1 + 1.21) / 2))
    assert gap == pytest.approx(0.01, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(0.1, 4.0), min_size=2, max_size=5))
def test_equal_radius_gap_brute_force(areas):
    _, gap = equal_radius_target(areas)
    radii = [np.sqrt(a / np.pi) for a in areas]
    brute = sum(
        (radii[i] - radii[j]) ** 2
        for i in range(len(radii))
        for j in range(i + 1, len(radii))
    )
    assert gap == pytest.approx(brute, rel=1e-12)


def test_hausdorff_gap_cases():
    spec = GridSpec(n=256)
    cfg = DiskConfiguration(centers=np.array([[0.5, 0.5]]), r=0.2)
    base = rasterize_disks(cfg, spec)
    assert hausdorff_boundary_gap(base, cfg) <= spec.dx * np.sqrt(2)
    dil = DiskConfiguration(centers=cfg.centers, r=0.25)
    dilated = rasterize_disks(dil, spec)
    assert hausdorff_boundary_gap(dilated, cfg) == pytest.approx(0.05, abs=2 * spec.dx)
    # distant 3x3 speck at a known distance from the disk boundary
    mask = base.mask.copy()
    ci, cj = 128, 230  # cell centers at (0.900, 0.502)-ish
    mask[ci - 1 : ci + 2, cj - 1 : cj + 2] = True
    speck_center = ((cj + 0.5) * spec.dx, (ci + 0.5) * spec.dx)
    delta = abs(np.hypot(speck_center[0] - 0.5, speck_center[1] - 0.5) - 0.2)
    got = hausdorff_boundary_gap(BinaryField(spec, mask), cfg)
    assert got == pytest.approx(delta, abs=2 * spec.dx)


def test_contour_csv_export(tmp_path):
    from flatflow.curves import export_contour_csv

    c = circle_contour(0.2, n_vertices=64)
    path = tmp_path / "contour.csv"
    export_contour_csv(c, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "s,x,y,kappa"
    assert len(lines) == 1 + len(c.points)
