"""Star products, Moyal brackets and Liouville-von Neumann-Wigner evolution.

The star product is the symbol of the operator product taken in the same
order, factorized as (continuous Moyal factor) tensor (discrete factor):

* the continuous factor is evaluated through operator kernels on the grid
  (symbol -> kernel -> matrix product -> symbol), exact for band-limited
  symbols that decay at the grid edges;
* the discrete factor is the 2x2 matrix product conjugated by the symbol
  maps; a direct evaluation of its defining sixteen-term sign sum is kept
  alongside as an oracle.

Hamiltonian applications use the exact finite differential expansion instead:
a kinetic polynomial of degree d in p terminates at d-th x-derivatives, and a
pure potential acts through the half-shifted multiplier V(x -+ hbar lambda/2)
in the p-spectral representation (the resummed form of the p-derivative
series).
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .errors import EvolutionError
from .grids import PhaseGrid, SymbolField, WignerField
from .quantizer import (
    HamiltonSymbol,
    kernel_of_weyl_symbol,
    omega_array,
    weyl_symbol_of_kernel,
)

__all__ = [
    "star_continuous",
    "star_discrete",
    "star_discrete_direct",
    "star",
    "star_apply_hamiltonian",
    "moyal_bracket",
    "moyal_bracket_hamiltonian",
    "evolve",
    "Trajectory",
    "star_eigen_residual",
    "EigenResidual",
]

_OMEGA = omega_array()

# S[mn, m'n', m''n''] = Tr{Omega' Omega'' Omega}/4, the discrete product tensor
_STRUCTURE = np.einsum("abij,cdjk,mnki->mnabcd", _OMEGA, _OMEGA, _OMEGA) / 4.0
_STRUCTURE.setflags(write=False)


def _to_matrix_field(values: np.ndarray) -> np.ndarray:
    """Symbol components (2,2,...) -> internal 2x2 matrix field (2,2,...)."""
    return 0.5 * np.einsum("mn...,mnij->ij...", values, _OMEGA)


def _from_matrix_field(mat: np.ndarray) -> np.ndarray:
    return np.einsum("ij...,mnji->mn...", mat, _OMEGA)


def star_continuous(f: np.ndarray, g: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """Moyal product of two scalar symbols on the grid (complex arrays)."""
    grid.require_momentum_symmetric()
    kf = kernel_of_weyl_symbol(np.asarray(f, complex), grid)
    kg = kernel_of_weyl_symbol(np.asarray(g, complex), grid)
    return weyl_symbol_of_kernel(kf @ kg * grid.dx, grid)


def star_discrete(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Discrete star on Gamma^2: symbol of the 2x2 operator product.

    Inputs and output are (2, 2)(+broadcast) arrays indexed (m, n).
    """
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    return np.einsum("mnabcd,ab...,cd...->mn...", _STRUCTURE, f, g)


def star_discrete_direct(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Oracle route: the discrete star as its explicit sixteen-term sign sum."""
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    out = np.zeros_like(f)
    sgn = lambda j: (-1.0) ** j
    for m in (0, 1):
        for n in (0, 1):
            acc = 0.0
            for mp in (0, 1):
                for np_ in (0, 1):
                    for mpp in (0, 1):
                        for npp in (0, 1):
                            brace = (
                                (1 + sgn(mp + mpp)) * (1 + sgn(np_ + npp))
                                + sgn(m) * (sgn(mp) + sgn(mpp))
                                + sgn(m + n) * (sgn(mp + np_) + sgn(mpp + npp))
                                + sgn(n) * (sgn(np_) + sgn(npp))
                                + 1j * (
                                    sgn(m) * sgn(np_ + npp) * (sgn(mp) - sgn(mpp))
                                    + sgn(m + n) * (sgn(mpp + np_) - sgn(mp + npp))
                                    + sgn(n) * sgn(mp + mpp) * (sgn(npp) - sgn(np_))
                                )
                            )
                            acc = acc + brace * f[mp, np_] * g[mpp, npp]
            out[m, n] = acc / 16.0
    return out


def star(f: SymbolField, g: SymbolField) -> SymbolField:
    """Full star product on R^2 x Gamma^2 (spatial Moyal x internal matrix)."""
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    grid = f.grid
    grid.require_momentum_symmetric()
    mf = _to_matrix_field(f.values)
    mg = _to_matrix_field(g.values)
    kf = np.empty((2, 2, grid.n_x, grid.n_x), dtype=complex)
    kg = np.empty_like(kf)
    for i in (0, 1):
        for j in (0, 1):
            kf[i, j] = kernel_of_weyl_symbol(mf[i, j], grid)
            kg[i, j] = kernel_of_weyl_symbol(mg[i, j], grid)
    out_mat = np.empty((2, 2, grid.n_p, grid.n_x), dtype=complex)
    for i in (0, 1):
        for j in (0, 1):
            kern = sum(kf[i, c] @ kg[c, j] for c in (0, 1)) * grid.dx
            out_mat[i, j] = weyl_symbol_of_kernel(kern, grid)
    return SymbolField(grid, _from_matrix_field(out_mat))


# ---------------------------------------------------------------------------
# Hamiltonian application (exact differential route)
# ---------------------------------------------------------------------------

def _lmul(a, b):
    # (2, 2[, p, x]) matrix product over the internal indices
    return np.einsum("ic...,cj...->ij...", a, b)


def _is_scalar_matrix(m: np.ndarray) -> bool:
    return bool(m[0, 1] == 0 and m[1, 0] == 0 and m[0, 0] == m[1, 1])


class _HamiltonianApplier:
    """Precomputed tables for repeated H * M / M * H applications on one grid."""

    def __init__(self, h: HamiltonSymbol, grid: PhaseGrid):
        self.grid = grid
        self.hbar = grid.hbar
        k0, k1, k2 = h.kinetic_matrices()
        p = grid.p[None, None, :, None]
        self.kp = (k0[:, :, None, None] + k1[:, :, None, None] * p
                   + k2[:, :, None, None] * p * p)
        self.dkp = k1[:, :, None, None] + 2.0 * k2[:, :, None, None] * p
        self.k2x2 = 2.0 * k2
        self.first = bool(np.any(k1) or np.any(k2))
        self.second = bool(np.any(k2))
        # commutator terms drop when the coefficient matrices are scalar
        self.kp_scalar = all(_is_scalar_matrix(k) for k in (k0, k1, k2))
        kx = 2.0 * math.pi * np.fft.fftfreq(grid.n_x, d=grid.dx)
        self.ikx = 1j * kx
        self.ikx2 = (1j * kx) ** 2
        self.potential = h.potential
        if h.potential is not None:
            lam = 2.0 * math.pi * np.fft.fftfreq(grid.n_p, d=grid.dp)
            self.u = h.potential_matrix()
            self.v_left = np.asarray(
                h.potential(grid.x[None, :] - 0.5 * grid.hbar * lam[:, None]), dtype=float)
            self.v_right = np.asarray(
                h.potential(grid.x[None, :] + 0.5 * grid.hbar * lam[:, None]), dtype=float)
            self.u_scalar = _is_scalar_matrix(self.u)

    def apply(self, mat: np.ndarray, side: str) -> np.ndarray:
        """H * M for side 'left', M * H for side 'right'; exact expansion.

        Kinetic polynomials terminate structurally: degree-1 symbols stop at
        first x-derivatives, degree-2 at second; no higher terms exist.
        """
        spec = np.fft.fft(mat, axis=-1) if self.first else None
        half = 0.5j * self.hbar
        if side == "left":
            out = _lmul(self.kp, mat)
            if self.first:
                d1 = np.fft.ifft(spec * self.ikx, axis=-1)
                out -= half * _lmul(self.dkp, d1)
            if self.second:
                d2 = np.fft.ifft(spec * self.ikx2, axis=-1)
                out -= (self.hbar ** 2 / 8.0) * np.einsum("ic,cj...->ij...", self.k2x2, d2)
        elif side == "right":
            out = _lmul(mat, self.kp)
            if self.first:
                d1 = np.fft.ifft(spec * self.ikx, axis=-1)
                out += half * _lmul(d1, self.dkp)
            if self.second:
                d2 = np.fft.ifft(spec * self.ikx2, axis=-1)
                out -= (self.hbar ** 2 / 8.0) * np.einsum("ic...,cj->ij...", d2, self.k2x2)
        else:
            raise ValueError("side must be 'left' or 'right'")

        if self.potential is not None:
            pspec = np.fft.fft(mat, axis=-2)
            if side == "left":
                vm = np.fft.ifft(pspec * self.v_left, axis=-2)
                out += np.einsum("ic,cj...->ij...", self.u, vm)
            else:
                vm = np.fft.ifft(pspec * self.v_right, axis=-2)
                out += np.einsum("ic...,cj->ij...", vm, self.u)
        return out

    def bracket_rhs(self, mat: np.ndarray) -> np.ndarray:
        """(H * M - M * H) / (i hbar) = -{M, H}_M, with shared transforms."""
        acc = np.zeros_like(mat)
        if not self.kp_scalar:
            acc += _lmul(self.kp, mat) - _lmul(mat, self.kp)
        if self.first:
            spec = np.fft.fft(mat, axis=-1)
            d1 = np.fft.ifft(spec * self.ikx, axis=-1)
            acc -= 0.5j * self.hbar * (_lmul(self.dkp, d1) + _lmul(d1, self.dkp))
            if self.second and not _is_scalar_matrix(self.k2x2):
                d2 = np.fft.ifft(spec * self.ikx2, axis=-1)
                acc -= (self.hbar ** 2 / 8.0) * (
                    np.einsum("ic,cj...->ij...", self.k2x2, d2)
                    - np.einsum("ic...,cj->ij...", d2, self.k2x2))
        if self.potential is not None:
            pspec = np.fft.fft(mat, axis=-2)
            vl = np.fft.ifft(pspec * self.v_left, axis=-2)
            vr = np.fft.ifft(pspec * self.v_right, axis=-2)
            acc += np.einsum("ic,cj...->ij...", self.u, vl) \
                - np.einsum("ic...,cj->ij...", vr, self.u)
        return acc / (1j * self.hbar)


def _apply_hamiltonian_matrix(h: HamiltonSymbol, mat: np.ndarray,
                              grid: PhaseGrid, side: str) -> np.ndarray:
    return _HamiltonianApplier(h, grid).apply(mat, side)


def star_apply_hamiltonian(h: HamiltonSymbol, w: SymbolField,
                           side: str = "left") -> SymbolField:
    """H * W (or W * H) through the exact finite differential expansion."""
    mat = _to_matrix_field(w.values)
    out = _apply_hamiltonian_matrix(h, mat, w.grid, side)
    return SymbolField(w.grid, _from_matrix_field(out))


def moyal_bracket(f: SymbolField, g: SymbolField) -> SymbolField:
    """{f, g}_M = (f * g - g * f) / (i hbar); real for real inputs."""
    hbar = f.grid.hbar
    d = star(f, g) - star(g, f)
    return SymbolField(f.grid, d.values / (1j * hbar))


def moyal_bracket_hamiltonian(w: SymbolField, h: HamiltonSymbol) -> SymbolField:
    """{W, H}_M through the differential route (production path)."""
    grid = w.grid
    mat = _to_matrix_field(w.values)
    diff = (_apply_hamiltonian_matrix(h, mat, grid, "right")
            - _apply_hamiltonian_matrix(h, mat, grid, "left"))
    return SymbolField(grid, _from_matrix_field(diff) / (1j * grid.hbar))


# ---------------------------------------------------------------------------
# Time evolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    grid: PhaseGrid
    times: tuple[float, ...]
    fields: tuple[WignerField, ...]

    @property
    def norms(self) -> tuple[float, ...]:
        return tuple(f.total_integral() for f in self.fields)


def evolve(w0, h: HamiltonSymbol, t_end: float, dt: float,
           sample_times=None) -> Trajectory:
    """Integrate dW/dt = -{W, H}_M with classical explicit RK4 stepping.

    ``dt`` must respect the transport bound dt <= dx / max|dH/dp|; steps are
    shortened where needed to land exactly on the requested sample times.
    """
    if isinstance(w0, WignerField):
        grid = w0.grid
        state = w0.values.astype(complex)
        t0 = w0.time_tag or 0.0
    else:
        grid = w0.grid
        state = w0.values.astype(complex)
        t0 = 0.0
    if dt <= 0:
        raise ValueError("dt must be positive")
    vmax = h.max_speed(grid)
    if vmax > 0 and dt > grid.dx / vmax * (1 + 1e-12):
        raise ValueError(
            f"dt = {dt:g} violates the transport bound dx/max|dH/dp| = {grid.dx / vmax:g}")

    if sample_times is None:
        sample_times = [t_end]
    samples = sorted(set(float(t) for t in sample_times) | {t_end})
    if any(t < t0 or t > t_end + 1e-12 for t in samples):
        raise ValueError("sample times must lie in [t0, t_end]")

    mat = _to_matrix_field(state)
    applier = _HamiltonianApplier(h, grid)
    rhs = applier.bracket_rhs

    times = [t0]
    fields = [WignerField(grid, np.ascontiguousarray(state.real), time_tag=t0)]
    t = t0
    step = 0
    for target in samples:
        while t < target - 1e-15:
            h_step = min(dt, target - t)
            k1 = rhs(mat)
            k2 = rhs(mat + 0.5 * h_step * k1)
            k3 = rhs(mat + 0.5 * h_step * k2)
            k4 = rhs(mat + h_step * k3)
            mat = mat + (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h_step
            step += 1
            if not np.all(np.isfinite(mat.view(float))):
                raise EvolutionError("non-finite value during evolution", step)
        vals = _from_matrix_field(mat)
        times.append(t)
        fields.append(WignerField(grid, np.ascontiguousarray(vals.real), time_tag=t))
    return Trajectory(grid, tuple(times), tuple(fields))


@dataclass(frozen=True)
class EigenResidual:
    residual: float   # L2 norm of H * W - E W
    imag_norm: float  # L2 norm of Im(H * W); vanishes for true eigenfunctions

    @property
    def total(self) -> float:
        return math.hypot(self.residual, self.imag_norm)


def star_eigen_residual(h: HamiltonSymbol, w: SymbolField, energy: float) -> EigenResidual:
    """Residual of the star eigenvalue equation H * W = E W on the grid."""
    hw = star_apply_hamiltonian(h, w, "left")
    diff = hw - energy * w
    imag = float(np.sqrt(np.sum(hw.values.imag ** 2) * w.grid.dp * w.grid.dx))
    return EigenResidual(residual=diff.l2_norm(), imag_norm=imag)
