"""Independent slow-route oracles used by the tests only.

These deliberately avoid the production code paths: the star-product oracle
expands one factor in plane-wave modes and applies the half-shift rule mode
by mode, and the moment oracle integrates the damped integrand by adaptive
quadrature.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from phasespin.grids import PhaseGrid


def brute_star(f: np.ndarray, g: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """Mode-by-mode evaluation of the Moyal product (O(N^2) FFTs).

    Writes g as its trigonometric interpolant and uses the fact that a star
    product against the plane wave e^{i(lam x + mu p)} evaluates the other
    factor at (x - hbar mu / 2, p + hbar lam / 2).
    """
    hbar = grid.hbar
    n_p, n_x = grid.n_p, grid.n_x
    G = np.fft.fft2(g)
    F = np.fft.fft2(f)
    mu = 2.0 * np.pi * np.fft.fftfreq(n_p, d=grid.dp)     # p-conjugate
    lam = 2.0 * np.pi * np.fft.fftfreq(n_x, d=grid.dx)    # x-conjugate
    P, X = np.meshgrid(grid.p, grid.x, indexing="ij")
    out = np.zeros((n_p, n_x), dtype=complex)
    for k in range(n_p):
        for l in range(n_x):
            if G[k, l] == 0:
                continue
            wave = np.exp(1j * (mu[k] * (P - grid.p_min) + lam[l] * (X - grid.x_min)))
            # f evaluated at (x - hbar mu_k / 2, p + hbar lam_l / 2)
            shift = np.exp(-1j * lam[:, None].T * 0)  # placeholder shape
            phase = np.exp(1j * (-lam[None, :] * (hbar * mu[k] / 2.0)
                                 + mu[:, None] * (hbar * lam[l] / 2.0)))
            f_shift = np.fft.ifft2(F * phase)
            out += G[k, l] * wave * f_shift
    return out / (n_p * n_x)


def gaussian_wigner(grid: PhaseGrid, x0: float, p0: float, sigma: float) -> np.ndarray:
    """Wigner function of the Gaussian packet exp(-(x-x0)^2/(2 sigma^2) + i p0 x / hbar)."""
    P, X = np.meshgrid(grid.p, grid.x, indexing="ij")
    hbar = grid.hbar
    return (1.0 / (np.pi * hbar)) * np.exp(-(X - x0) ** 2 / sigma ** 2
                                           - sigma ** 2 * (P - p0) ** 2 / hbar ** 2)


def quad_damped_moment(kind, order: int, x: float, alpha: float,
                       pole_window: float = 8.0, p_span: float = 400.0) -> float:
    """Adaptive-quadrature value of integral p^n e^{-alpha|p|} (term)(p, x) dp."""
    from phasespin.distributions import DeltaLine, PVLine, Smooth

    if isinstance(kind, DeltaLine):
        return float(kind.weight(x)) * kind.p0 ** order * np.exp(-alpha * abs(kind.p0))
    if isinstance(kind, PVLine):
        p0 = kind.p0

        def fn(p):
            return p ** order * np.exp(-alpha * abs(p)) * kind.envelope(p, x)

        inner = quad(fn, p0 - pole_window, p0 + pole_window,
                     weight="cauchy", wvar=p0, limit=400)[0]
        left = quad(lambda p: fn(p) / (p - p0), -p_span, p0 - pole_window, limit=800)[0]
        right = quad(lambda p: fn(p) / (p - p0), p0 + pole_window, p_span, limit=800)[0]
        return inner + left + right
    if isinstance(kind, Smooth):
        def fn(p):
            return p ** order * np.exp(-alpha * abs(p)) * kind.profile(p, x)

        pieces = [(-p_span, kind.r - 5.0), (kind.r - 5.0, kind.r + 5.0),
                  (kind.r + 5.0, p_span)]
        return sum(quad(fn, a, b, limit=800)[0] for a, b in pieces)
    raise TypeError(type(kind).__name__)
