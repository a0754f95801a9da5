"""Periodic zero-mean Poisson solves and the H^-1 dissipation.

All operations use the exact Fourier symbol 4 pi^2 |k|^2 / L^2 on the torus
(signed-frequency convention, k_max = n/2 on the Nyquist row/column).  The
empirical mean of every right-hand side is subtracted before solving, so the
zero-mean constraint holds exactly regardless of cell-quantized area errors.
"""

from __future__ import annotations

import numpy as np

from .errors import AreaMismatch, NonTorusDomain
from .fields import BinaryField, DomainKind, GridSpec, ScalarField


class SpectralWorkspace:
    """Precomputed symbol tables for an n-by-n torus grid."""

    def __init__(self, spec: GridSpec):
        if spec.domain is not DomainKind.TORUS:
            raise NonTorusDomain("spectral solves are defined on the torus only")
        self.spec = spec
        n, L = spec.n, spec.side_length
        k = np.fft.fftfreq(n, d=1.0 / n)  # integer frequencies, Nyquist = -n/2
        k1 = k[:, None]
        k2 = k[None, :]
        self.symbol = (4.0 * np.pi**2 / L**2) * (k1**2 + k2**2)
        self._safe_symbol = self.symbol.copy()
        self._safe_symbol[0, 0] = 1.0
        # spectral first-derivative factors (i * 2 pi k / L per axis)
        self._dy = 1j * (2.0 * np.pi / L) * k1 * np.ones((1, n))
        self._dx = 1j * (2.0 * np.pi / L) * k2 * np.ones((n, 1))

    def _check(self, f):
        if f.spec != self.spec:
            raise NonTorusDomain("field grid does not match workspace")


def _solve_hat(rhs_values: np.ndarray, w: SpectralWorkspace):
    """FFT-space solve of -Lap U = rhs with the mean removed; returns U-hat."""
    fhat = np.fft.fft2(rhs_values)
    fhat[0, 0] = 0.0
    uhat = fhat / w._safe_symbol
    uhat[0, 0] = 0.0
    return uhat


def solve_poisson_zero_mean(rhs: ScalarField, w: SpectralWorkspace) -> ScalarField:
    """Zero-mean U with -Lap U = rhs - mean(rhs), to spectral accuracy."""
    w._check(rhs)
    uhat = _solve_hat(rhs.values, w)
    return ScalarField(rhs.spec, np.fft.ifft2(uhat).real)


def hminus_norm_sq(f: ScalarField, w: SpectralWorkspace) -> float:
    """Squared H^-1 norm of the mean-free part, equal to integral(U f dx)."""
    w._check(f)
    n = f.spec.n
    fhat = np.fft.fft2(f.values)
    fhat[0, 0] = 0.0
    weight = f.spec.side_length**2 / float(n) ** 4
    return float(weight * np.sum(np.abs(fhat) ** 2 / w._safe_symbol))


def gradient_energy(u_values: np.ndarray, w: SpectralWorkspace) -> float:
    """integral |grad U|^2 dx by spectral differentiation and quadrature."""
    uhat = np.fft.fft2(u_values)
    ux = np.fft.ifft2(w._dx * uhat)
    uy = np.fft.ifft2(w._dy * uhat)
    cell = (w.spec.side_length / w.spec.n) ** 2
    return float(cell * np.sum(np.abs(ux) ** 2 + np.abs(uy) ** 2))


def transfer_potential(F: BinaryField, E: BinaryField, h: float,
                       w: SpectralWorkspace, area_tol_cells: float | None = None):
    """(U, dissipation): zero-mean U with -Lap U = (chi_F - chi_E)/h and the
    gradient energy integral |grad U|^2 dx.

    The empirical mean of the right-hand side is always subtracted before
    solving; an area mismatch beyond area_tol_cells (when given) raises.
    """
    w._check(F)
    w._check(E)
    cell = F.spec.cell_area
    if area_tol_cells is not None:
        if abs(F.cached_area - E.cached_area) > cell * (area_tol_cells + 1e-9):
            raise AreaMismatch(
                f"|F| - |E| = {F.cached_area - E.cached_area:.3e} exceeds "
                f"{area_tol_cells:g} cells"
            )
    rhs = (F.mask.astype(np.float64) - E.mask.astype(np.float64)) / h
    uhat = _solve_hat(rhs, w)
    ux = np.fft.ifft2(w._dx * uhat)
    uy = np.fft.ifft2(w._dy * uhat)
    diss = float(cell * np.sum(np.abs(ux) ** 2 + np.abs(uy) ** 2))
    return ScalarField(F.spec, np.fft.ifft2(uhat).real), diss


def dissipation_ms(F: BinaryField, E: BinaryField, h: float, w: SpectralWorkspace,
                   area_tol_cells: float | None = None) -> float:
    """MS step cost integral |grad U|^2 dx with -Lap U = (chi_F - chi_E)/h."""
    return transfer_potential(F, E, h, w, area_tol_cells)[1]
