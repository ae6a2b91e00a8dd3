"""Two-component wave functions: windowed plane-wave pieces or grid samples.

The spinor column is ordered (upper, lower) = (|1> component, |0> component).
A plane-wave piece is amp * exp(i p x / hbar) carried on an open interval
(a, b); semi-infinite and full-line windows use +-inf endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import GridDomainError

__all__ = ["PlaneWavePiece", "SpinorWaveState"]


@dataclass(frozen=True)
class PlaneWavePiece:
    a: float
    b: float
    amp_up: complex
    amp_down: complex
    momentum: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("piece window must be a nonempty interval")
        if not math.isfinite(self.momentum):
            raise ValueError("piece momentum must be finite")

    @property
    def amps(self) -> np.ndarray:
        # spinor column in basis order (|1>, |0>)
        return np.array([self.amp_up, self.amp_down], dtype=complex)

    def covers(self, x: float) -> bool:
        return self.a < x < self.b


def _reject_boundaries(pieces, x):
    for pc in pieces:
        for edge in (pc.a, pc.b):
            if math.isfinite(edge) and np.any(np.isclose(x, edge, rtol=0.0, atol=1e-13)):
                raise GridDomainError(f"evaluation at a window boundary x = {edge}")


@dataclass(frozen=True)
class SpinorWaveState:
    """Either a finite list of plane-wave pieces or two sampled components."""

    pieces: tuple[PlaneWavePiece, ...] | None = None
    samples: np.ndarray | None = None  # shape (2, n_x), rows (upper, lower)

    def __post_init__(self):
        if (self.pieces is None) == (self.samples is None):
            raise ValueError("provide exactly one of pieces or samples")
        if self.pieces is not None:
            object.__setattr__(self, "pieces", tuple(self.pieces))
            if len(self.pieces) == 0:
                raise ValueError("state needs at least one piece")
        else:
            s = np.asarray(self.samples, dtype=complex)
            if s.ndim != 2 or s.shape[0] != 2:
                raise ValueError("samples must have shape (2, n_x)")
            s.setflags(write=False)
            object.__setattr__(self, "samples", s)

    @property
    def is_piecewise(self) -> bool:
        return self.pieces is not None

    def evaluate(self, x, hbar: float = 1.0) -> np.ndarray:
        """Spinor values at positions x; shape (2,) + x.shape.

        Defined for the plane-wave representation only; window boundary
        points are ambiguous and rejected.
        """
        if self.pieces is None:
            raise ValueError("evaluate requires the plane-wave representation")
        x = np.asarray(x, dtype=float)
        _reject_boundaries(self.pieces, x)
        out = np.zeros((2,) + x.shape, dtype=complex)
        for pc in self.pieces:
            inside = (x > pc.a) & (x < pc.b)
            phase = np.where(inside, np.exp(1j * pc.momentum * x / hbar), 0.0)
            out += pc.amps.reshape((2,) + (1,) * x.ndim) * phase
        return out

    def derivative(self, x, hbar: float = 1.0) -> np.ndarray:
        """d/dx of the spinor at positions x (away from window boundaries)."""
        if self.pieces is None:
            raise ValueError("derivative requires the plane-wave representation")
        x = np.asarray(x, dtype=float)
        _reject_boundaries(self.pieces, x)
        out = np.zeros((2,) + x.shape, dtype=complex)
        for pc in self.pieces:
            inside = (x > pc.a) & (x < pc.b)
            phase = np.where(inside, np.exp(1j * pc.momentum * x / hbar), 0.0)
            out += (1j * pc.momentum / hbar) * pc.amps.reshape((2,) + (1,) * x.ndim) * phase
        return out

    def sampled_on(self, x: np.ndarray, hbar: float = 1.0) -> "SpinorWaveState":
        if self.pieces is None:
            return self
        return SpinorWaveState(samples=self.evaluate(x, hbar))
