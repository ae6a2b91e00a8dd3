"""Exact closed-form Wigner functions built from delta, principal-value and
smooth oscillatory lines.

Every closed form needed by the free and step-potential solutions is a sum of
terms of three kinds, each carried on a spatial window and attached to one
internal point (m, n):

* ``DeltaLine``   -- w(x) * delta(p - p0) with w(x) = amp * cos(k_x x + phi0),
* ``PVLine``      -- env(p, x) * vp 1/(p - p0) with
                     env = amp * sin(k_x x + phi0 + (a_x x + b0)(p - p0)),
* ``Smooth``      -- amp * [sin(theta + kappa1 q) - sin(theta + kappa2 q)] / q
                     with q = p - r, theta = k_x x + phi0, kappa_i = a_i x + b_i
                     (finite at q = 0; the sinc-like ridges of windowed waves).

No general symbolic algebra is attempted: these shapes are closed under the
Wigner transform of windowed plane waves, which is all the solvers produce.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import GridDomainError
from .grids import PhaseGrid, Window, WignerField

__all__ = [
    "DeltaLine",
    "PVLine",
    "Smooth",
    "Term",
    "DistributionalWigner",
    "sample_distributional",
]


@dataclass(frozen=True)
class DeltaLine:
    p0: float
    amp: float
    k_x: float = 0.0
    phi0: float = 0.0

    def weight(self, x):
        x = np.asarray(x, dtype=float)
        return self.amp * np.cos(self.k_x * x + self.phi0)


@dataclass(frozen=True)
class PVLine:
    p0: float
    amp: float
    k_x: float = 0.0
    phi0: float = 0.0
    a_x: float = 0.0
    b0: float = 0.0

    def envelope(self, p, x):
        p = np.asarray(p, dtype=float)
        x = np.asarray(x, dtype=float)
        phase = self.k_x * x + self.phi0 + (self.a_x * x + self.b0) * (p - self.p0)
        return self.amp * np.sin(phase)


@dataclass(frozen=True)
class Smooth:
    r: float
    amp: float
    a1: float = 0.0
    b1: float = 0.0
    a2: float = 0.0
    b2: float = 0.0
    k_x: float = 0.0
    phi0: float = 0.0

    @classmethod
    def sinc_line(cls, r: float, amp: float, a: float,
                  k_x: float = 0.0, phi0: float = 0.0) -> "Smooth":
        """amp * cos(k_x x + phi0) * sin(a x (p - r)) / (p - r)."""
        return cls(r=r, amp=0.5 * amp, a1=a, b1=0.0, a2=-a, b2=0.0,
                   k_x=k_x, phi0=phi0)

    def profile(self, p, x):
        p, x = np.broadcast_arrays(np.asarray(p, float), np.asarray(x, float))
        q = p - self.r
        theta = self.k_x * x + self.phi0
        k1 = self.a1 * x + self.b1
        k2 = self.a2 * x + self.b2
        small = np.abs(q) < 1e-12 * max(1.0, abs(self.r))
        qs = np.where(small, 1.0, q)
        val = self.amp * (np.sin(theta + k1 * q) - np.sin(theta + k2 * q)) / qs
        # removable singularity: limit is the q-derivative of the numerator
        lim = self.amp * np.cos(theta) * (k1 - k2)
        return np.where(small, lim, val)


@dataclass(frozen=True)
class Term:
    mn: tuple[int, int]
    window: Window
    kind: DeltaLine | PVLine | Smooth
    label: str = ""

    def scaled(self, factor: float) -> "Term":
        return replace(self, kind=replace(self.kind, amp=self.kind.amp * factor))


@dataclass(frozen=True)
class DistributionalWigner:
    """A finite sum of closed-form terms; exact off-grid representation."""

    terms: tuple[Term, ...]
    hbar: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            k = t.kind
            ref = k.p0 if isinstance(k, (DeltaLine, PVLine)) else k.r
            if not np.isfinite(ref) or not np.isfinite(k.amp):
                raise ValueError("term parameters must be finite")

    def component(self, m: int, n: int) -> tuple[Term, ...]:
        return tuple(t for t in self.terms if t.mn == (m, n))

    def filtered(self, labels) -> "DistributionalWigner":
        labels = set(labels)
        return DistributionalWigner(
            tuple(t for t in self.terms if t.label in labels), self.hbar)

    def __add__(self, other: "DistributionalWigner") -> "DistributionalWigner":
        if other.hbar != self.hbar:
            raise ValueError("hbar mismatch")
        return DistributionalWigner(self.terms + other.terms, self.hbar)

    def momentum_lines(self) -> tuple[float, ...]:
        """All singular momenta (delta and principal-value lines)."""
        return tuple(t.kind.p0 for t in self.terms
                     if isinstance(t.kind, (DeltaLine, PVLine)))


def _pv_column(p: np.ndarray, p0: float, dp: float) -> np.ndarray:
    """1/(p - p0) with the cell containing p0 replaced by its PV average."""
    col = np.empty_like(p)
    idx = int(np.argmin(np.abs(p - p0)))
    diff = p - p0
    mask = np.ones(len(p), dtype=bool)
    if abs(diff[idx]) <= 0.5 * dp * (1 + 1e-12):
        mask[idx] = False
        hi, lo = p[idx] + 0.5 * dp - p0, p[idx] - 0.5 * dp - p0
        with np.errstate(divide="ignore"):
            col[idx] = np.log(np.abs(hi / lo)) / dp if lo != 0 and hi != 0 else 0.0
    col[mask] = 1.0 / diff[mask]
    return col


def sample_distributional(dw: DistributionalWigner, grid: PhaseGrid,
                          sigma_p: float) -> WignerField:
    """Render closed-form terms on a grid for plotting and grid-route checks.

    Delta lines become normalized Gaussian ridges of momentum width
    ``sigma_p``; principal-value lines are evaluated pointwise with the
    singular cell replaced by its principal-value average; smooth terms are
    evaluated directly.  Linear in the term list by construction.
    """
    if not sigma_p > 0:
        raise ValueError("sigma_p must be positive")
    for p0 in dw.momentum_lines():
        if not grid.covers_momentum(p0):
            raise GridDomainError(f"grid does not cover the line at p = {p0}")

    p = grid.p
    x = grid.x
    values = np.zeros((2, 2, grid.n_p, grid.n_x))
    norm = 1.0 / (sigma_p * np.sqrt(2.0 * np.pi))
    for t in dw.terms:
        m, n = t.mn
        ind = t.window.indicator(x)
        k = t.kind
        if isinstance(k, DeltaLine):
            ridge = norm * np.exp(-0.5 * ((p - k.p0) / sigma_p) ** 2)
            values[m, n] += np.outer(ridge, k.weight(x) * ind)
        elif isinstance(k, PVLine):
            col = _pv_column(p, k.p0, grid.dp)
            values[m, n] += k.envelope(p[:, None], x[None, :]) * col[:, None] * ind[None, :]
        else:
            values[m, n] += k.profile(p[:, None], x[None, :]) * ind[None, :]
    return WignerField(grid, values)
