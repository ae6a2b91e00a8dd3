"""Core value types: phase-space grids, internal points, 2x2 matrices, Wigner fields.

Conventions used throughout the package:

* natural units by default (hbar = 1; solvers additionally take M = c = q = 1
  unless told otherwise),
* the internal Hilbert space C^2 is spanned by (|1>, |0>) in that order, so a
  2x2 matrix has row/column index 0 <-> |1> and index 1 <-> |0>,
* fields over the quantum phase space R^2 x Gamma^2 are stored as arrays of
  shape (2, 2, n_p, n_x) indexed (m, n, p, x), where phi_m = pi*m and n is the
  number index of the discrete grid Gamma^2.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

__all__ = [
    "PhaseGrid",
    "InternalPoint",
    "Matrix2",
    "Window",
    "FULL_LINE",
    "LEFT_HALF",
    "RIGHT_HALF",
    "WignerField",
    "SymbolField",
    "INTERNAL_POINTS",
]


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform rectangular grid over the continuous phase space (p, x)."""

    x_min: float
    x_max: float
    n_x: int
    p_min: float
    p_max: float
    n_p: int
    hbar: float = 1.0

    def __post_init__(self):
        if self.n_x < 2 or self.n_p < 2:
            raise ValueError("need at least two points per axis")
        if not (self.x_max > self.x_min and self.p_max > self.p_min):
            raise ValueError("empty axis range")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_x - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.n_p - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_x)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)

    @property
    def momentum_symmetric(self) -> bool:
        # FFT-based star products require the p range centred on zero.
        return math.isclose(self.p_min, -self.p_max, rel_tol=0.0,
                            abs_tol=1e-12 * max(1.0, abs(self.p_max)))

    def require_momentum_symmetric(self):
        if not self.momentum_symmetric:
            raise ValueError("operation requires a momentum range symmetric about 0")

    def covers_momentum(self, p0: float) -> bool:
        return self.p_min <= p0 <= self.p_max


@dataclass(frozen=True)
class InternalPoint:
    """A point (phi_m, n) of the discrete phase space Gamma^2; phi_m = pi*m."""

    m: int
    n: int

    def __post_init__(self):
        if self.m not in (0, 1) or self.n not in (0, 1):
            raise ValueError("internal indices must lie in {0, 1}")

    @property
    def phi(self) -> float:
        return math.pi * self.m


INTERNAL_POINTS = tuple(
    InternalPoint(m, n) for m in (0, 1) for n in (0, 1)
)


class Matrix2:
    """A 2x2 complex matrix in the internal basis order (|1>, |0>)."""

    __slots__ = ("a",)

    def __init__(self, entries):
        a = np.asarray(entries, dtype=complex)
        if a.shape != (2, 2):
            raise ValueError("Matrix2 requires a 2x2 array")
        if not np.all(np.isfinite(a.view(float))):
            raise ValueError("Matrix2 entries must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix2 is immutable")

    @classmethod
    def identity(cls) -> "Matrix2":
        return cls(np.eye(2))

    @classmethod
    def zero(cls) -> "Matrix2":
        return cls(np.zeros((2, 2)))

    @classmethod
    def ketbra(cls, i: int, j: int) -> "Matrix2":
        """|i><j| with i, j in {0, 1} labelling the kets |0>, |1>."""
        a = np.zeros((2, 2), dtype=complex)
        # basis order (|1>, |0>): ket |1> -> row 0, ket |0> -> row 1
        a[1 - i, 1 - j] = 1.0
        return cls(a)

    def __matmul__(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(self.a @ other.a)

    def __add__(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(self.a + other.a)

    def __sub__(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(self.a - other.a)

    def __mul__(self, scalar) -> "Matrix2":
        return Matrix2(self.a * scalar)

    __rmul__ = __mul__

    def dagger(self) -> "Matrix2":
        return Matrix2(self.a.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.a))

    def is_unitary(self, tol: float = 1e-14) -> bool:
        return bool(np.allclose(self.a @ self.a.conj().T, np.eye(2), atol=tol))

    def is_hermitian(self, tol: float = 1e-14) -> bool:
        return bool(np.allclose(self.a, self.a.conj().T, atol=tol))

    def __repr__(self):
        return f"Matrix2({self.a.tolist()!r})"

    def __eq__(self, other):
        return isinstance(other, Matrix2) and np.array_equal(self.a, other.a)


@dataclass(frozen=True)
class Window:
    """Open spatial support interval (lo, hi); endpoints may be +-inf.

    The three supports appearing in the closed-form scattering objects are the
    full line, Y(-x) and Y(x); general intervals arise from cross terms of
    bounded wave-function pieces.
    """

    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("window must be a nonempty interval")

    def contains(self, x: float) -> bool:
        return self.lo < x < self.hi

    def indicator(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return ((x > self.lo) & (x < self.hi)).astype(float)

    def intersect(self, other: "Window") -> "Window | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Window(lo, hi) if lo < hi else None

    @property
    def is_full_line(self) -> bool:
        return math.isinf(self.lo) and math.isinf(self.hi)


FULL_LINE = Window()
LEFT_HALF = Window(hi=0.0)   # Y(-x)
RIGHT_HALF = Window(lo=0.0)  # Y(x)


def _check_field(values, grid, dtype, name):
    v = np.asarray(values, dtype=dtype)
    if v.shape != (2, 2, grid.n_p, grid.n_x):
        raise ValueError(
            f"{name} values must have shape (2, 2, n_p, n_x) = "
            f"(2, 2, {grid.n_p}, {grid.n_x}), got {v.shape}")
    if not np.all(np.isfinite(v.view(float))):
        raise ValueError(f"{name} values must be finite")
    return v


@dataclass(frozen=True)
class WignerField:
    """Real Wigner function sampled on a grid; indexed (m, n, p, x)."""

    grid: PhaseGrid
    values: np.ndarray
    time_tag: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _check_field(self.values, self.grid, float, "WignerField"))

    def total_integral(self) -> float:
        """Trapezoid integral of the summed components over (p, x)."""
        per_x = np.trapezoid(self.values.sum(axis=(0, 1)), dx=self.grid.dp, axis=0)
        return float(np.trapezoid(per_x, dx=self.grid.dx))

    def component(self, m: int, n: int) -> np.ndarray:
        return self.values[m, n]

    def marginal_x(self) -> np.ndarray:
        """sum_{m,n} integral dp W -- the spatial density on the x grid."""
        return np.trapezoid(self.values.sum(axis=(0, 1)), dx=self.grid.dp, axis=0)

    def __add__(self, other: "WignerField") -> "WignerField":
        if other.grid != self.grid:
            raise ValueError("grid mismatch")
        return WignerField(self.grid, self.values + other.values, self.time_tag)


@dataclass(frozen=True)
class SymbolField:
    """Complex phase-space symbol on a grid; indexed (m, n, p, x)."""

    grid: PhaseGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_field(self.values, self.grid, complex, "SymbolField"))

    @classmethod
    def from_wigner(cls, w: WignerField) -> "SymbolField":
        return cls(w.grid, w.values.astype(complex))

    def real_field(self, time_tag: float | None = None, imag_tol: float | None = None) -> WignerField:
        if imag_tol is not None:
            scale = float(np.max(np.abs(self.values))) or 1.0
            if float(np.max(np.abs(self.values.imag))) > imag_tol * scale:
                raise ValueError("symbol has a non-negligible imaginary part")
        return WignerField(self.grid, np.ascontiguousarray(self.values.real), time_tag)

    def __add__(self, other: "SymbolField") -> "SymbolField":
        if other.grid != self.grid:
            raise ValueError("grid mismatch")
        return SymbolField(self.grid, self.values + other.values)

    def __sub__(self, other: "SymbolField") -> "SymbolField":
        if other.grid != self.grid:
            raise ValueError("grid mismatch")
        return SymbolField(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> "SymbolField":
        return SymbolField(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dp * self.grid.dx))
