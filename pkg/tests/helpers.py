"""Shared test utilities: seeded random fields and brute-force oracles."""

import math

import numpy as np

from fraclab.spectral import Grid2D, RealField, SpectralField, dealias_mask, inverse_transform


def hermitian_noise(grid: Grid2D, rng) -> np.ndarray:
    z = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    idx = (-np.arange(grid.n)) % grid.n
    return 0.5 * (z + np.conj(z[np.ix_(idx, idx)]))


def random_band_field(grid: Grid2D, rng, envelope=None, zero_mean=True) -> RealField:
    """Random real field band-limited to the 2/3-rule band."""
    z = hermitian_noise(grid, rng)
    keep = dealias_mask(grid)
    c = np.where(keep, z, 0.0)
    if envelope is not None:
        c = c * envelope
    if zero_mean:
        c[0, 0] = 0.0
    else:
        c[0, 0] = c[0, 0].real
    return inverse_transform(SpectralField(grid, c, check=False))


def shell_field(grid: Grid2D, j: int, rng, profile) -> RealField:
    """Random field spectrally supported in the level-j annulus."""
    from fraclab.littlewood_paley import block_multiplier

    z = hermitian_noise(grid, rng)
    mask = block_multiplier(grid, j, "block", profile)
    c = np.where(mask > 0, z, 0.0)
    c[0, 0] = 0.0
    return inverse_transform(SpectralField(grid, c, check=False))


def convolution_product_coefficients(cf: np.ndarray, cg: np.ndarray, band: int) -> np.ndarray:
    """Exact continuum product coefficients of two band-limited spectra.

    Direct O(band^4) convolution without wraparound, restricted to the
    retained band |k|_inf <= band. Independent of the FFT pipeline.
    """
    n = cf.shape[0]

    def k_of(i):
        return i if i <= n // 2 - 1 else i - n

    def i_of(k):
        return k % n

    modes = [(k1, k2) for k1 in range(-band, band + 1) for k2 in range(-band, band + 1)]
    out = np.zeros_like(cf)
    for a1, a2 in modes:
        fa = cf[i_of(a1), i_of(a2)]
        if fa == 0:
            continue
        for b1, b2 in modes:
            gb = cg[i_of(b1), i_of(b2)]
            if gb == 0:
                continue
            h1, h2 = a1 + b1, a2 + b2
            if abs(h1) <= band and abs(h2) <= band:
                out[i_of(h1), i_of(h2)] += fa * gb
    return out


def l2_of_coeffs(grid: Grid2D, coeffs: np.ndarray) -> float:
    return grid.L * math.sqrt(float(np.sum(np.abs(coeffs) ** 2)))
