"""Exact arithmetic over Q(sqrt(d)) + i Q(sqrt(d)).

The free-particle eigen checks must produce residuals that are identically
zero, not merely small.  With rational inputs (momentum, mass, c) the only
irrationality in the relativistic eigenproblem is E = sqrt(c^2 p^2 + M^2 c^4),
so every quantity lives in the quadratic field Q(E) extended by i.  Elements
are (a + b sqrt(d)) + i (e + f sqrt(d)) with Fraction coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import math

__all__ = ["QC", "qc_matmul", "qc_trace"]


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)  # exact binary expansion
    raise TypeError(f"cannot convert {type(v).__name__} to Fraction")


@dataclass(frozen=True)
class QC:
    """(a + b sqrt(d)) + i (e + f sqrt(d)) with exact coefficients."""

    a: Fraction
    b: Fraction
    e: Fraction
    f: Fraction
    d: Fraction

    @classmethod
    def make(cls, a=0, b=0, e=0, f=0, *, d) -> "QC":
        return cls(_frac(a), _frac(b), _frac(e), _frac(f), _frac(d))

    @classmethod
    def rational(cls, a, *, d) -> "QC":
        return cls.make(a, d=d)

    @classmethod
    def root(cls, *, d) -> "QC":
        """The element sqrt(d)."""
        return cls.make(0, 1, d=d)

    @classmethod
    def i_unit(cls, *, d) -> "QC":
        return cls.make(0, 0, 1, 0, d=d)

    def _compat(self, other) -> "QC":
        if isinstance(other, QC):
            if other.d != self.d:
                raise ValueError("mixed field discriminants")
            return other
        return QC.rational(other, d=self.d)

    def __add__(self, other):
        o = self._compat(other)
        return QC(self.a + o.a, self.b + o.b, self.e + o.e, self.f + o.f, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QC(-self.a, -self.b, -self.e, -self.f, self.d)

    def __sub__(self, other):
        return self + (-self._compat(other))

    def __rsub__(self, other):
        return self._compat(other) + (-self)

    def __mul__(self, other):
        o = self._compat(other)
        d = self.d
        # (r1 + i m1)(r2 + i m2) with r, m in Q(sqrt(d))
        def qmul(p1, q1, p2, q2):  # (p1 + q1 rt)(p2 + q2 rt)
            return p1 * p2 + q1 * q2 * d, p1 * q2 + q1 * p2
        rr_a, rr_b = qmul(self.a, self.b, o.a, o.b)
        mm_a, mm_b = qmul(self.e, self.f, o.e, o.f)
        rm_a, rm_b = qmul(self.a, self.b, o.e, o.f)
        mr_a, mr_b = qmul(self.e, self.f, o.a, o.b)
        return QC(rr_a - mm_a, rr_b - mm_b, rm_a + mr_a, rm_b + mr_b, d)

    __rmul__ = __mul__

    def conj(self):
        return QC(self.a, self.b, -self.e, -self.f, self.d)

    def _quad_conj(self):
        return QC(self.a, -self.b, self.e, -self.f, self.d)

    def inverse(self) -> "QC":
        # first clear i, then clear sqrt(d)
        den1 = self * self.conj()          # in Q(sqrt(d)), imag parts zero
        num = self.conj()
        den2 = den1 * den1._quad_conj()    # rational
        num = num * den1._quad_conj()
        if den2.a == 0:
            raise ZeroDivisionError("QC division by zero")
        inv = Fraction(1, 1) / den2.a
        return QC(num.a * inv, num.b * inv, num.e * inv, num.f * inv, self.d)

    def __truediv__(self, other):
        return self * self._compat(other).inverse()

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0 and self.e == 0 and self.f == 0

    def to_complex(self) -> complex:
        rt = math.sqrt(float(self.d))
        return complex(float(self.a) + float(self.b) * rt,
                       float(self.e) + float(self.f) * rt)

    def __repr__(self):
        return (f"QC({self.a}+{self.b}*rt, {self.e}+{self.f}*rt; d={self.d})")


def qc_matmul(A, B):
    """2x2 matrix product over QC (nested lists)."""
    return [[sum((A[i][k] * B[k][j] for k in (0, 1)), start=A[0][0] * 0)
             for j in (0, 1)] for i in (0, 1)]


def qc_trace(A):
    return A[0][0] + A[1][1]
