"""Grid-field geometry: areas, distances, perimeters, dissipation."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flatflow.errors import EmptyOrFullSet, GuardViolation, SpecMismatch
from flatflow.fields import (
    BinaryField,
    DomainKind,
    GridSpec,
    ScalarField,
    area,
    bv_l1_norms,
    dissipation_mcf,
    label_components,
    perimeter_estimate,
    sample_bilinear,
    signed_distance,
    symmetric_difference_area,
)


def grid(n=64, L=1.0, domain=DomainKind.TORUS):
    return GridSpec(n=n, side_length=L, domain=domain)


def cell_centers(spec):
    c = (np.arange(spec.n) + 0.5) * spec.dx
    return np.meshgrid(c, c)


def disk_mask(spec, cx, cy, r):
    X, Y = cell_centers(spec)
    return (X - cx) ** 2 + (Y - cy) ** 2 <= r * r


def random_proper_mask(seed, n):
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < 0.4
    mask[0, 0] = True
    mask[n // 2, n // 2] = False
    return mask


# ---------------------------------------------------------------------------
# area


def test_area_empty_and_full():
    spec = grid()
    assert area(BinaryField(spec, np.zeros((64, 64), bool))) == 0.0
    assert area(BinaryField(spec, np.ones((64, 64), bool))) == 1.0


def test_area_disk_one_percent():
    spec = grid(n=512)
    f = BinaryField(spec, disk_mask(spec, 0.5, 0.5, 0.25))
    assert area(f) == pytest.approx(np.pi * 0.0625, rel=0.01)


# ---------------------------------------------------------------------------
# signed distance


def brute_force_distance(mask, spec):
    """Exact distance from cell centers to the interface edge set.

    Independent oracle: direct point-to-segment scan over every boundary
    edge in fine half-cell integer units, periodic by minimum image.
    """
    n = mask.shape[0]
    n2 = 2 * n
    edges = []  # (axis, fixed_fine, lo_fine) vertical: x fixed; horizontal: y fixed
    for i in range(n):
        for j in range(n):
            if mask[i, j] != mask[i, (j + 1) % n]:
                edges.append(("v", (2 * j + 2) % n2, 2 * i))
            if mask[i, j] != mask[(i + 1) % n, j]:
                edges.append(("h", (2 * i + 2) % n2, 2 * j))
    out = np.zeros((n, n))
    half = n2 // 2
    for i in range(n):
        qi = 2 * i + 1
        for j in range(n):
            qj = 2 * j + 1
            best = None
            for kind, fixed, lo in edges:
                if kind == "v":
                    dperp = (qj - fixed + half) % n2 - half
                    dalong = (qi - (lo + 1) + half) % n2 - half
                else:
                    dperp = (qi - fixed + half) % n2 - half
                    dalong = (qj - (lo + 1) + half) % n2 - half
                if -1 < dalong < 1:
                    d2 = dperp * dperp
                else:
                    off = abs(dalong) - 1
                    d2 = dperp * dperp + off * off
                if best is None or d2 < best:
                    best = d2
            out[i, j] = np.sqrt(best) * (spec.dx / 2.0)
    return out


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_signed_distance_matches_brute_force_exactly(seed):
    n = 24
    spec = grid(n=n)
    mask = random_proper_mask(seed, n)
    d = signed_distance(BinaryField(spec, mask)).values
    oracle = brute_force_distance(mask, spec)
    assert np.array_equal(np.abs(d), oracle)
    assert np.all((d < 0) == mask)


def test_signed_distance_disk_center():
    spec = grid(n=128)
    r = 0.3
    f = BinaryField(spec, disk_mask(spec, 0.5, 0.5, r))
    d = signed_distance(f).values
    i = j = 64  # cell center nearest (0.5, 0.5)
    assert abs(d[i, j] + r) <= 2 * spec.dx


def test_signed_distance_antipodal_single_cell():
    n = 64
    spec = grid(n=n)
    mask = np.zeros((n, n), bool)
    mask[0, 0] = True
    d = signed_distance(BinaryField(spec, mask)).values
    assert abs(d[n // 2, n // 2] - np.sqrt(2) / 2) <= 2 * spec.dx


def test_signed_distance_sign_change_and_eikonal():
    spec = grid(n=48)
    mask = random_proper_mask(11, 48)
    d = signed_distance(BinaryField(spec, mask)).values
    for shift_ax in (0, 1):
        dn = np.roll(d, -1, axis=shift_ax)
        boundary_pair = mask != np.roll(mask, -1, axis=shift_ax)
        assert np.all(d[boundary_pair] * dn[boundary_pair] <= 0)
        assert np.all(np.abs(np.abs(d) - np.abs(dn)) <= spec.dx * np.sqrt(2) + 1e-12)


def test_signed_distance_rejects_empty_full():
    spec = grid(n=16)
    with pytest.raises(EmptyOrFullSet):
        signed_distance(BinaryField(spec, np.zeros((16, 16), bool)))
    with pytest.raises(EmptyOrFullSet):
        signed_distance(BinaryField(spec, np.ones((16, 16), bool)))


# ---------------------------------------------------------------------------
# perimeter


def test_perimeter_disk():
    spec = grid(n=512)
    f = BinaryField(spec, disk_mask(spec, 0.5, 0.5, 0.25))
    assert perimeter_estimate(f) == pytest.approx(2 * np.pi * 0.25, rel=0.01)


def test_perimeter_square():
    spec = grid(n=256)
    X, Y = cell_centers(spec)
    f = BinaryField(spec, (np.abs(X - 0.5) <= 0.25) & (np.abs(Y - 0.5) <= 0.25))
    assert abs(perimeter_estimate(f) - 2.0) <= 2 * spec.dx * 4


def test_perimeter_two_disks_additive():
    spec = grid(n=512)
    mask = disk_mask(spec, 0.3, 0.3, 0.1) | disk_mask(spec, 0.7, 0.7, 0.1)
    f = BinaryField(spec, mask)
    assert perimeter_estimate(f) == pytest.approx(2 * 2 * np.pi * 0.1, rel=0.01)


def test_perimeter_first_order_convergence():
    errs = {}
    for n in (128, 256, 512):
        spec = grid(n=n)
        f = BinaryField(spec, disk_mask(spec, 0.5, 0.5, 0.25))
        errs[n] = abs(perimeter_estimate(f) - np.pi * 0.5) / (np.pi * 0.5)
    C = errs[128] * 128
    assert errs[256] <= 2.0 * C / 256
    assert errs[512] <= 2.0 * C / 512


# ---------------------------------------------------------------------------
# symmetric difference


def test_symmetric_difference_trivial():
    spec = grid(n=32)
    a = BinaryField(spec, random_proper_mask(3, 32))
    assert symmetric_difference_area(a, a) == 0.0
    full = BinaryField(spec, np.ones((32, 32), bool))
    empty = BinaryField(spec, np.zeros((32, 32), bool))
    assert symmetric_difference_area(full, empty) == pytest.approx(1.0)


def test_symmetric_difference_spec_mismatch():
    a = BinaryField(grid(n=32), np.zeros((32, 32), bool))
    b = BinaryField(grid(n=64), np.zeros((64, 64), bool))
    with pytest.raises(SpecMismatch):
        symmetric_difference_area(a, b)


def test_symmetric_difference_shifted_disk_lens_oracle():
    spec = grid(n=512)
    r, t = 0.2, 0.08
    a = BinaryField(spec, disk_mask(spec, 0.45, 0.5, r))
    b = BinaryField(spec, disk_mask(spec, 0.45 + t, 0.5, r))
    # analytic symmetric difference of two equal disks at center distance t
    lens = 2 * r * r * np.arccos(t / (2 * r)) - 0.5 * t * np.sqrt(4 * r * r - t * t)
    expected = 2 * (np.pi * r * r - lens)
    assert symmetric_difference_area(a, b) == pytest.approx(expected, rel=0.02)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_symmetric_difference_triangle_inequality(seed):
    spec = grid(n=16)
    rng = np.random.default_rng(seed)
    masks = [rng.random((16, 16)) < 0.5 for _ in range(3)]
    fa, fb, fc = (BinaryField(spec, m) for m in masks)
    dab = symmetric_difference_area(fa, fb)
    dbc = symmetric_difference_area(fb, fc)
    dac = symmetric_difference_area(fa, fc)
    assert dac <= dab + dbc + 1e-12
    assert dab == symmetric_difference_area(fb, fa)


# ---------------------------------------------------------------------------
# dissipation


def test_dissipation_zero_iff_equal():
    spec = grid(n=32)
    E = BinaryField(spec, random_proper_mask(9, 32))
    assert dissipation_mcf(E, E) == 0.0
    other = E.mask.copy()
    other[5, 5] = not other[5, 5]
    F = BinaryField(spec, other)
    assert dissipation_mcf(F, E) > 0.0


def test_dissipation_concentric_disks_radial_oracle():
    spec = grid(n=512)
    r, delta = 0.2, 0.05
    E = BinaryField(spec, disk_mask(spec, 0.5, 0.5, r))
    F = BinaryField(spec, disk_mask(spec, 0.5, 0.5, r + delta))
    # radial quadrature: 2 pi * integral_r^{r+delta} (s - r) s ds
    expected = 2 * np.pi * (delta**2 * r / 2 + delta**3 / 3)
    assert dissipation_mcf(F, E) == pytest.approx(expected, rel=0.03)


def test_dissipation_random_masks_brute_force():
    n = 24
    spec = grid(n=n)
    E = BinaryField(spec, random_proper_mask(21, n))
    F = BinaryField(spec, random_proper_mask(22, n))
    d_oracle = brute_force_distance(E.mask, spec)
    xor = np.logical_xor(F.mask, E.mask)
    expected = float(d_oracle[xor].sum()) * spec.cell_area
    assert dissipation_mcf(F, E) == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------------------
# BV / L1


def test_bv_l1_zero():
    spec = grid(n=32)
    assert bv_l1_norms(ScalarField(spec, np.zeros((32, 32)))) == (0.0, 0.0)


def test_bv_l1_strip():
    spec = grid(n=128)
    X, Y = cell_centers(spec)
    u = ((Y > 0.25) & (Y <= 0.75)).astype(float)
    l1, bv = bv_l1_norms(ScalarField(spec, u))
    assert l1 == pytest.approx(0.5, abs=1e-12)
    assert bv - l1 == pytest.approx(2.0, abs=1e-12)


def test_bv_l1_sine():
    spec = grid(n=256)
    X, _ = cell_centers(spec)
    l1, _ = bv_l1_norms(ScalarField(spec, np.sin(2 * np.pi * X)))
    assert l1 == pytest.approx(2 / np.pi, abs=1e-3)


# ---------------------------------------------------------------------------
# misc plumbing


def test_guard_violation_on_plane():
    spec = GridSpec(n=64, side_length=1.0, domain=DomainKind.BOXED_PLANE)
    mask = np.zeros((64, 64), bool)
    mask[2, 30] = True  # inside the 8-cell guard band
    with pytest.raises(GuardViolation):
        BinaryField(spec, mask)


def test_label_components_wraps_on_torus():
    spec = grid(n=32)
    mask = np.zeros((32, 32), bool)
    mask[:4, 10:14] = True
    mask[-4:, 10:14] = True  # same component across the seam
    _, count = label_components(BinaryField(spec, mask))
    assert count == 1
    spec_p = GridSpec(n=32, side_length=1.0, domain=DomainKind.BOXED_PLANE)
    mask_p = np.zeros((32, 32), bool)
    mask_p[10:12, 10:14] = True
    mask_p[14:16, 10:14] = True
    _, count_p = label_components(BinaryField(spec_p, mask_p))
    assert count_p == 2


def test_sample_bilinear_linear_field():
    spec = grid(n=64)
    X, Y = cell_centers(spec)
    f = ScalarField(spec, 2.0 * X + 3.0 * Y)
    pts = np.array([[0.3, 0.4], [0.51, 0.26]])
    got = sample_bilinear(f, pts)
    assert got == pytest.approx(2 * pts[:, 0] + 3 * pts[:, 1], rel=1e-12)
