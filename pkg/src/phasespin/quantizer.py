"""Discrete operator frame and symbol <-> operator maps for s = 1.

The internal space C^2 carries the Schwinger pair (V, R), the four
displacement operators D(k, l) and the four quantizer matrices Omega(m, n)
built with the Weyl spatial ordering and the discrete kernel choice
K(pi k l / 2) = (-1)^{kl}.  The continuous factor is the standard Weyl
transform

    f(p, x) = integral dxi exp(-i p xi / hbar) K(x + xi/2, x - xi/2),

and a pure spinor state Psi maps to the real Wigner components

    W(p, x, phi_m, n) = (1/2) sum_{s s'} G_{s s'}(p, x) Omega(m, n)[s', s]

with G the cross-Wigner kernel of the two spinor components.  The star
product of symbols is the symbol of the operator product taken in the same
order, which fixes every sign convention below.
"""

from __future__ import annotations

from dataclasses import dataclass
import cmath
import math
from typing import Callable

import numpy as np

from .distributions import DeltaLine, DistributionalWigner, PVLine, Smooth, Term
from .errors import UnsupportedModelError
from .grids import FULL_LINE, Matrix2, PhaseGrid, WignerField, Window
from .states import PlaneWavePiece, SpinorWaveState

__all__ = [
    "schwinger_pair",
    "displacement_d",
    "discrete_quantizer",
    "discrete_quantizer_from_sum",
    "omega_array",
    "matrix_to_symbol",
    "symbol_to_matrix",
    "weyl_symbol_of_kernel",
    "kernel_of_weyl_symbol",
    "wigner_of_pure_state",
    "wigner_distributional",
    "wigner_on_grid",
    "HamiltonSymbol",
    "hamilton_symbol",
]


def schwinger_pair() -> tuple[Matrix2, Matrix2]:
    """The unitary pair (V, R) generating the displacement structure."""
    v = Matrix2.ketbra(0, 0) - Matrix2.ketbra(1, 1)
    r = Matrix2.ketbra(0, 1) + Matrix2.ketbra(1, 0)
    return v, r


def displacement_d(k: int, l: int) -> Matrix2:
    """D(k, l) = exp(-i pi k l / 2) R^k V^l for any integers k, l."""
    v, r = schwinger_pair()
    # exp(-i pi k l / 2) lands on a quarter turn; keep it exact
    phase = (1.0, -1.0j, -1.0, 1.0j)[(k * l) % 4]
    # R and V are involutions, so k % 4 preserves the parity of any integer k
    rk = np.linalg.matrix_power(r.a, k % 4)
    vl = np.linalg.matrix_power(v.a, l % 4)
    return Matrix2(phase * (rk @ vl))


# Quantizer matrices in basis order (|1>, |0>), one per internal point (m, n).
_OMEGA = np.array([
    [  # m = 0
        [[0.0, 0.5 + 0.5j], [0.5 - 0.5j, 1.0]],   # n = 0
        [[1.0, 0.5 - 0.5j], [0.5 + 0.5j, 0.0]],   # n = 1
    ],
    [  # m = 1
        [[0.0, -0.5 - 0.5j], [-0.5 + 0.5j, 1.0]],
        [[1.0, -0.5 + 0.5j], [-0.5 - 0.5j, 0.0]],
    ],
], dtype=complex)
_OMEGA.setflags(write=False)


def omega_array() -> np.ndarray:
    """All four quantizer matrices as an array of shape (2, 2, 2, 2)."""
    return _OMEGA


def discrete_quantizer(m: int, n: int) -> Matrix2:
    """Omega(m, n), the discrete Stratonovich-Weyl quantizer matrix."""
    if m not in (0, 1) or n not in (0, 1):
        raise ValueError("internal indices must lie in {0, 1}")
    return Matrix2(_OMEGA[m, n])


def discrete_quantizer_from_sum(m: int, n: int) -> Matrix2:
    """Omega(m, n) rebuilt from its defining displacement-operator sum.

    Independent construction path: (1/2) sum_{k,l} (-1)^{kl}
    exp(-i pi (k m + l n)) D(k, l); must agree with the tabulated matrices.
    """
    acc = np.zeros((2, 2), dtype=complex)
    for k in (0, 1):
        for l in (0, 1):
            kernel = (-1.0) ** (k * l)
            phase = (-1.0) ** (k * m + l * n)  # exp(-i pi (k m + l n)) exactly
            acc += kernel * phase * displacement_d(k, l).a
    return Matrix2(acc / 2.0)


def matrix_to_symbol(mat: Matrix2 | np.ndarray) -> np.ndarray:
    """Discrete symbol f(m, n) = Tr{M Omega(m, n)}; shape (2, 2).

    Real for Hermitian input, complex in general; linear in M.
    """
    a = mat.a if isinstance(mat, Matrix2) else np.asarray(mat, dtype=complex)
    sym = np.einsum("ij,mnji->mn", a, _OMEGA)
    return sym


def symbol_to_matrix(f: np.ndarray) -> Matrix2:
    """Inverse of matrix_to_symbol: M = (1/2) sum_{m,n} f(m, n) Omega(m, n).

    The 1/2 is fixed by the round-trip law: the Omega matrices are mutually
    orthogonal with Tr{Omega Omega'} = 2 delta.
    """
    f = np.asarray(f, dtype=complex)
    if f.shape != (2, 2):
        raise ValueError("discrete symbol must have shape (2, 2)")
    return Matrix2(0.5 * np.einsum("mn,mnij->ij", f, _OMEGA))


# ---------------------------------------------------------------------------
# Continuous Weyl transform on grids
# ---------------------------------------------------------------------------

def _check_resolution(grid: PhaseGrid):
    # the xi lattice of the grid transform has spacing 2*dx
    limit = math.pi * grid.hbar / (2.0 * grid.dx)
    if max(abs(grid.p_min), abs(grid.p_max)) >= limit:
        raise ValueError(
            f"momentum range +-{max(abs(grid.p_min), abs(grid.p_max)):g} exceeds the "
            f"resolvable pi*hbar/(2 dx) = {limit:g}; refine the x grid")


def weyl_symbol_of_kernel(kernel: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """f(p, x) = integral dxi exp(-i p xi / hbar) K(x + xi/2, x - xi/2).

    ``kernel`` is sampled on the grid's x cross x lattice; the xi integral is
    a Riemann sum over the even-difference lattice xi = 2 k dx.  Output is
    complex of shape (n_p, n_x); it is real (up to roundoff) for Hermitian
    kernels.
    """
    kernel = np.asarray(kernel, dtype=complex)
    n = grid.n_x
    if kernel.shape != (n, n):
        raise ValueError(f"kernel must be (n_x, n_x) = ({n}, {n})")
    _check_resolution(grid)
    # rows i: diagonal slices K[i+k, i-k] for |k| <= min(i, n-1-i)
    diag = np.zeros((n, 2 * n - 1), dtype=complex)
    for k in range(-(n - 1), n):
        i_lo = max(0, k, -k)
        i_hi = min(n, n + k, n - k)  # exclusive
        if i_lo >= i_hi:
            continue
        idx = np.arange(i_lo, i_hi)
        diag[idx, k + n - 1] = kernel[idx + k, idx - k]
    xi = 2.0 * grid.dx * np.arange(-(n - 1), n)
    phases = np.exp(-1j * np.outer(grid.p, xi) / grid.hbar) * (2.0 * grid.dx)
    return phases @ diag.T  # (n_p, n_x)


def _upsample_x(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Trigonometric interpolation onto the half-step lattice (factor 2)."""
    n = values.shape[axis]
    spec = np.fft.fft(values, axis=axis)
    shape = list(values.shape)
    shape[axis] = 2 * n
    out = np.zeros(shape, dtype=complex)
    half = n // 2
    sl = [slice(None)] * values.ndim

    def put(dest, src):
        sl_d = sl.copy(); sl_d[axis] = dest
        sl_s = sl.copy(); sl_s[axis] = src
        out[tuple(sl_d)] = spec[tuple(sl_s)]

    put(slice(0, half), slice(0, half))
    put(slice(2 * n - (n - half), 2 * n), slice(half, n))
    # split the Nyquist bin symmetrically when n is even
    if n % 2 == 0:
        sl_n = sl.copy(); sl_n[axis] = n + half
        sl_m = sl.copy(); sl_m[axis] = 2 * n - half
        out[tuple(sl_n)] = 0.5 * out[tuple(sl_m)]
        out[tuple(sl_m)] *= 0.5
    return np.fft.ifft(out, axis=axis) * 2.0


def kernel_of_weyl_symbol(values: np.ndarray, grid: PhaseGrid) -> np.ndarray:
    """Operator kernel K(u, v) = (1/2 pi hbar) integral dp f((u+v)/2, p) e^{i p (u-v)/hbar}.

    Inverse of :func:`weyl_symbol_of_kernel` for band-limited symbols;
    midpoints are obtained by trigonometric interpolation.
    """
    values = np.asarray(values, dtype=complex)
    n = grid.n_x
    if values.shape != (grid.n_p, n):
        raise ValueError("symbol must be sampled on the grid")
    up = _upsample_x(values, axis=1)[:, : 2 * n - 1]  # midpoints s = i + j
    xi = grid.dx * np.arange(-(n - 1), n)
    phases = np.exp(1j * np.outer(grid.p, xi) / grid.hbar)
    t = np.einsum("ps,pd->sd", up, phases) * (grid.dp / (2.0 * math.pi * grid.hbar))
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return t[ii + jj, ii - jj + n - 1]


# ---------------------------------------------------------------------------
# Wigner transform of pure spinor states
# ---------------------------------------------------------------------------

def _cross_coefficients(piece_i: PlaneWavePiece, piece_j: PlaneWavePiece,
                        hbar: float) -> np.ndarray:
    """c(m, n) = <A_j| Omega(m, n) |A_i> / (4 pi hbar)."""
    ai = piece_i.amps
    aj = piece_j.amps
    return np.einsum("s,mnst,t->mn", aj.conj(), _OMEGA, ai) / (4.0 * math.pi * hbar)


def _emit_pair_terms(piece_i: PlaneWavePiece, piece_j: PlaneWavePiece,
                     hbar: float, label: str) -> list[Term]:
    """Closed-form Wigner contribution of one (ket, bra) piece pair.

    For i != j the conjugate ordering is folded in (factor 2 and a real part);
    the xi-window [L(x), U(x)] of the overlap integral decides the term kinds:
    doubly infinite -> delta line, semi-infinite -> delta + principal value,
    bounded -> smooth oscillatory difference.
    """
    same = piece_i is piece_j
    factor = 1.0 if same else 2.0
    coeff = _cross_coefficients(piece_i, piece_j, hbar) * factor
    p_bar = 0.5 * (piece_i.momentum + piece_j.momentum)
    k_phi = (piece_i.momentum - piece_j.momentum) / hbar

    support = Window(0.5 * (piece_i.a + piece_j.a), 0.5 * (piece_i.b + piece_j.b)) \
        if 0.5 * (piece_i.a + piece_j.a) < 0.5 * (piece_i.b + piece_j.b) else None
    if support is None:
        return []

    # L(x) = 2 max(x - b_i, a_j - x);  U(x) = 2 min(x - a_i, b_j - x)
    l_cands = []
    if math.isfinite(piece_i.b):
        l_cands.append((2.0, -2.0 * piece_i.b))
    if math.isfinite(piece_j.a):
        l_cands.append((-2.0, 2.0 * piece_j.a))
    u_cands = []
    if math.isfinite(piece_i.a):
        u_cands.append((2.0, -2.0 * piece_i.a))
    if math.isfinite(piece_j.b):
        u_cands.append((-2.0, 2.0 * piece_j.b))

    # partition the support so that L and U are affine on each sub-window
    cuts = {support.lo, support.hi}
    if len(l_cands) == 2:
        cuts.add(0.5 * (piece_i.b + piece_j.a))
    if len(u_cands) == 2:
        cuts.add(0.5 * (piece_i.a + piece_j.b))
    edges = sorted(c for c in cuts if support.lo <= c <= support.hi)
    windows = [Window(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if lo < hi]
    if math.isinf(support.lo) and math.isinf(support.hi) and not windows:
        windows = [FULL_LINE]

    terms: list[Term] = []
    for w in windows:
        x_mid = _window_probe(w)
        l_aff = _select_affine(l_cands, x_mid, biggest=True)
        u_aff = _select_affine(u_cands, x_mid, biggest=False)
        for m in (0, 1):
            for n in (0, 1):
                c = coeff[m, n]
                if c == 0:
                    continue
                amp0 = abs(c)
                phi0 = cmath.phase(c)
                if l_aff is None and u_aff is None:
                    kind = DeltaLine(p0=p_bar, amp=2.0 * math.pi * hbar * amp0,
                                     k_x=k_phi, phi0=phi0)
                    terms.append(Term((m, n), w, kind, label))
                elif l_aff is not None and u_aff is None:
                    terms.append(Term((m, n), w, DeltaLine(
                        p0=p_bar, amp=math.pi * hbar * amp0, k_x=k_phi, phi0=phi0), label))
                    terms.append(Term((m, n), w, PVLine(
                        p0=p_bar, amp=-hbar * amp0, k_x=k_phi, phi0=phi0,
                        a_x=l_aff[0] / hbar, b0=l_aff[1] / hbar), label))
                elif l_aff is None and u_aff is not None:
                    terms.append(Term((m, n), w, DeltaLine(
                        p0=p_bar, amp=math.pi * hbar * amp0, k_x=k_phi, phi0=phi0), label))
                    terms.append(Term((m, n), w, PVLine(
                        p0=p_bar, amp=hbar * amp0, k_x=k_phi, phi0=phi0,
                        a_x=u_aff[0] / hbar, b0=u_aff[1] / hbar), label))
                else:
                    terms.append(Term((m, n), w, Smooth(
                        r=p_bar, amp=hbar * amp0, k_x=k_phi, phi0=phi0,
                        a1=u_aff[0] / hbar, b1=u_aff[1] / hbar,
                        a2=l_aff[0] / hbar, b2=l_aff[1] / hbar), label))
    return terms


def _window_probe(w: Window) -> float:
    if w.is_full_line:
        return 0.0
    if math.isinf(w.lo):
        return w.hi - 1.0
    if math.isinf(w.hi):
        return w.lo + 1.0
    return 0.5 * (w.lo + w.hi)


def _select_affine(cands, x, biggest):
    if not cands:
        return None
    if len(cands) == 1:
        return cands[0]
    vals = [s * x + b for s, b in cands]
    idx = int(np.argmax(vals)) if biggest else int(np.argmin(vals))
    return cands[idx]


def wigner_distributional(state: SpinorWaveState, hbar: float = 1.0,
                          pair_labels: dict | None = None) -> DistributionalWigner:
    """Exact Wigner function of a piecewise-plane-wave state as a term list.

    ``pair_labels`` optionally maps frozenset piece-index pairs to labels
    (e.g. {0}: "inc") attached to the emitted terms.
    """
    if not state.is_piecewise:
        raise ValueError("the distributional route requires plane-wave pieces")
    pieces = state.pieces
    terms: list[Term] = []
    for i in range(len(pieces)):
        for j in range(i, len(pieces)):
            label = ""
            if pair_labels is not None:
                label = pair_labels.get(frozenset((i, j)), "")
            terms.extend(_emit_pair_terms(pieces[i], pieces[j], hbar, label))
    return DistributionalWigner(tuple(terms), hbar)


def wigner_on_grid(state: SpinorWaveState, grid: PhaseGrid) -> WignerField:
    """Grid-route Wigner transform of a pure state (FFT-free direct sums)."""
    if state.is_piecewise:
        psi = state.evaluate(grid.x, grid.hbar)
    else:
        psi = state.samples
        if psi.shape[1] != grid.n_x:
            raise ValueError("sampled state does not match the grid")
    _check_resolution(grid)
    two_pi_hbar = 2.0 * math.pi * grid.hbar
    g = np.empty((2, 2, grid.n_p, grid.n_x), dtype=complex)
    for s in (0, 1):
        for sp in (0, 1):
            kern = np.outer(psi[s], psi[sp].conj())
            g[s, sp] = weyl_symbol_of_kernel(kern, grid) / two_pi_hbar
    w = 0.5 * np.einsum("stpx,mnts->mnpx", g, _OMEGA)
    return WignerField(grid, np.ascontiguousarray(w.real))


def wigner_of_pure_state(state: SpinorWaveState, grid: PhaseGrid | None = None,
                         hbar: float = 1.0):
    """Wigner transform of a pure state.

    Plane-wave-piece states map to an exact :class:`DistributionalWigner`
    (pass ``hbar``); sampled states map to a :class:`WignerField` on ``grid``.
    Passing a grid with a piecewise state samples the pieces first.
    """
    if state.is_piecewise and grid is None:
        return wigner_distributional(state, hbar)
    if grid is None:
        raise ValueError("sampled states require a grid")
    return wigner_on_grid(state, grid)


# ---------------------------------------------------------------------------
# Hamilton symbols
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HamiltonSymbol:
    """Four-component Hamilton function: kinetic polynomial in p plus V(x).

    ``kinetic[m, n]`` holds (c0, c1, c2) of c0 + c1 p + c2 p^2;
    ``v_weight[m, n]`` multiplies the spatial profile ``potential``.
    """

    kinetic: np.ndarray            # (2, 2, 3) real
    v_weight: np.ndarray           # (2, 2) real
    potential: Callable[[np.ndarray], np.ndarray] | None
    mass: float
    c: float = 1.0
    charge: float = 1.0
    relativistic: bool = False
    v00: float = 0.0
    v11: float = 0.0
    v01: complex = 0.0
    v0: float | None = None

    def __post_init__(self):
        k = np.asarray(self.kinetic, dtype=float)
        vw = np.asarray(self.v_weight, dtype=float)
        if k.shape != (2, 2, 3) or vw.shape != (2, 2):
            raise ValueError("malformed Hamilton symbol tables")
        k.setflags(write=False)
        vw.setflags(write=False)
        object.__setattr__(self, "kinetic", k)
        object.__setattr__(self, "v_weight", vw)

    def kinetic_order(self) -> int:
        if np.any(self.kinetic[:, :, 2] != 0.0):
            return 2
        if np.any(self.kinetic[:, :, 1] != 0.0):
            return 1
        return 0

    def kinetic_matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Internal-operator coefficients (K0, K1, K2) of K0 + K1 p + K2 p^2."""
        return tuple(symbol_to_matrix(self.kinetic[:, :, d].astype(complex)).a
                     for d in range(3))

    def potential_matrix(self) -> np.ndarray:
        return symbol_to_matrix(self.v_weight.astype(complex)).a

    def evaluate(self, p: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Symbol values of shape (2, 2) + broadcast(p, x).shape."""
        p, x = np.broadcast_arrays(np.asarray(p, float), np.asarray(x, float))
        out = (self.kinetic[:, :, 0, None, None]
               + self.kinetic[:, :, 1, None, None] * p
               + self.kinetic[:, :, 2, None, None] * p * p)
        out = out.reshape(2, 2, *p.shape)
        if self.potential is not None:
            out = out + self.v_weight.reshape(2, 2, *([1] * p.ndim)) * self.potential(x)
        return out

    def max_speed(self, grid: PhaseGrid) -> float:
        """Largest transport speed |dH/dp| on the grid (CFL bound)."""
        pmax = max(abs(grid.p_min), abs(grid.p_max))
        return float(np.max(np.abs(self.kinetic[:, :, 1])
                            + 2.0 * np.abs(self.kinetic[:, :, 2]) * pmax))


def hamilton_symbol(kind: str, *, mass: float, c: float = 1.0, charge: float = 1.0,
                    potential: Callable | None = None,
                    v00: float = 0.0, v11: float = 0.0, v01: complex = 0.0,
                    v0: float | None = None) -> HamiltonSymbol:
    """Hamilton function components for the two supported operator shapes.

    ``kind="nonrel"``: p^2/2M plus a diagonal internal potential, giving all
    four kinetic components equal and V-weights (V00 at n=0, V11 at n=1).
    ``kind="dirac"``: c p sigma_x + M c^2 sigma_z plus a general Hermitian
    internal potential; the four components carry signs (-1)^m on c p and
    (-1)^{n+1} on M c^2, with Re((1 +- i) V01) cross weights.
    """
    kinetic = np.zeros((2, 2, 3))
    v_weight = np.zeros((2, 2))
    if kind == "nonrel":
        if mass <= 0:
            raise ValueError("mass must be positive")
        kinetic[:, :, 2] = 1.0 / (2.0 * mass)
        for n, vd in ((0, v00), (1, v11)):
            v_weight[:, n] = vd
        relativistic = False
    elif kind == "dirac":
        if mass <= 0 or c <= 0:
            raise ValueError("mass and c must be positive")
        for m in (0, 1):
            for n in (0, 1):
                kinetic[m, n, 0] = (-1.0) ** (n + 1) * mass * c * c
                kinetic[m, n, 1] = (-1.0) ** m * c
                cross = (1.0 + 1j) if n == 0 else (1.0 - 1j)
                v_weight[m, n] = (v00 if n == 0 else v11) \
                    + (-1.0) ** m * (cross * complex(v01)).real
        relativistic = True
    else:
        raise UnsupportedModelError(f"unsupported operator shape: {kind!r}")
    return HamiltonSymbol(kinetic=kinetic, v_weight=v_weight,
                          potential=potential, mass=mass, c=c, charge=charge,
                          relativistic=relativistic, v00=v00, v11=v11,
                          v01=complex(v01), v0=v0)
