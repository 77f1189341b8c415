"""Exact integer algebra for torus-bundle monodromies.

All lattice arithmetic uses Python integers and Fractions, so surgery
coefficients never see floating-point rounding; only the eigen-data is
floating point.

Slope convention: a homology class c1*K + c2*g (K the Legendrian-transverse
generator, stored first; g the transverse generator, stored second) has slope
c1/c2.  The convention is pinned by the worked monodromy [[5, 9], [1, 2]],
whose image of the second generator is (9, 2) with slope 9/2; the formulas
below hardcode that ratio and would have to be revisited if a future worked
value contradicted it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PreconditionError

__all__ = ["Monodromy", "HomologyClass", "Slope", "EigenData"]


@dataclass(frozen=True)
class Slope:
    """Extended rational p/q in lowest terms, denominator >= 0; q = 0 is inf."""

    p: int
    q: int

    @staticmethod
    def of(p: int, q: int) -> "Slope":
        p, q = int(p), int(q)
        if p == 0 and q == 0:
            raise PreconditionError("slope 0/0 is undefined")
        if q == 0:
            return Slope(1, 0)
        g = math.gcd(p, q)
        p, q = p // g, q // g
        if q < 0:
            p, q = -p, -q
        return Slope(p, q)

    @property
    def is_infinite(self) -> bool:
        return self.q == 0

    def as_fraction(self) -> Fraction:
        if self.is_infinite:
            raise PreconditionError("infinite slope has no rational value")
        return Fraction(self.p, self.q)

    def __abs__(self) -> "Slope":
        return Slope.of(abs(self.p), self.q)

    def __float__(self) -> float:
        return math.inf if self.is_infinite else self.p / self.q

    def __str__(self) -> str:
        return "inf" if self.is_infinite else f"{self.p}/{self.q}"


@dataclass(frozen=True)
class HomologyClass:
    """Integer class (c1, c2), not both zero."""

    c1: int
    c2: int

    def __post_init__(self):
        if self.c1 == 0 and self.c2 == 0:
            raise PreconditionError("homology class must be nonzero")

    @property
    def gcd(self) -> int:
        return math.gcd(self.c1, self.c2)

    def primitive(self) -> "HomologyClass":
        g = self.gcd
        return HomologyClass(self.c1 // g, self.c2 // g)

    def slope(self) -> Slope:
        return Slope.of(self.c1, self.c2)


@dataclass(frozen=True)
class EigenData:
    expanding: float        # eigenvalue > 1
    contracting: float      # eigenvalue in (0, 1) for trace > 2, (-1, 0) for trace < -2
    expanding_dir: tuple    # unit eigenvectors
    contracting_dir: tuple


@dataclass(frozen=True)
class Monodromy:
    """Orientation-preserving integer 2x2 matrix [[m11, m12], [m21, m22]]."""

    m11: int
    m12: int
    m21: int
    m22: int

    def __post_init__(self):
        for entry in (self.m11, self.m12, self.m21, self.m22):
            if not isinstance(entry, int):
                raise PreconditionError(f"monodromy entries must be integers, got {entry!r}")
        if self.det != 1:
            raise PreconditionError(f"monodromy must have determinant +1, got {self.det}")

    @staticmethod
    def from_rows(rows) -> "Monodromy":
        (a, b), (c, d) = rows
        return Monodromy(int(a), int(b), int(c), int(d))

    @staticmethod
    def identity() -> "Monodromy":
        return Monodromy(1, 0, 0, 1)

    @property
    def det(self) -> int:
        return self.m11 * self.m22 - self.m12 * self.m21

    @property
    def trace(self) -> int:
        return self.m11 + self.m22

    def is_anosov(self) -> bool:
        return abs(self.trace) > 2

    def apply(self, cls: HomologyClass) -> HomologyClass:
        return HomologyClass(
            self.m11 * cls.c1 + self.m12 * cls.c2,
            self.m21 * cls.c1 + self.m22 * cls.c2,
        )

    def inverse(self) -> "Monodromy":
        return Monodromy(self.m22, -self.m12, -self.m21, self.m11)

    def __matmul__(self, other: "Monodromy") -> "Monodromy":
        return Monodromy(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=float)

    def eigen_data(self) -> EigenData:
        """Real eigen-splitting; requires |trace| > 2."""
        if not self.is_anosov():
            raise PreconditionError(
                f"no real eigen-splitting: |trace| = {abs(self.trace)} <= 2"
            )
        tr = self.trace
        disc = math.sqrt(tr * tr - 4)
        lam_hi = (tr + disc) / 2.0
        lam_lo = (tr - disc) / 2.0
        # for trace < -2 the expanding eigenvalue is the one with |lam| > 1
        expanding, contracting = (lam_hi, lam_lo) if abs(lam_hi) > abs(lam_lo) else (lam_lo, lam_hi)
        return EigenData(
            expanding=expanding,
            contracting=contracting,
            expanding_dir=self._eigvec(expanding),
            contracting_dir=self._eigvec(contracting),
        )

    def _eigvec(self, lam: float) -> tuple:
        if self.m12 != 0:
            v = (float(self.m12), lam - self.m11)
        elif self.m21 != 0:
            v = (lam - self.m22, float(self.m21))
        else:  # diagonal integer matrix with det 1 and |trace| > 2 cannot occur
            v = (1.0, 0.0)
        norm = math.hypot(*v)
        v = (v[0] / norm, v[1] / norm)
        if v[0] < 0 or (v[0] == 0 and v[1] < 0):
            v = (-v[0], -v[1])
        return v

    def image_slope(self, cls: HomologyClass) -> Slope:
        """Slope of the image class, first coordinate over second."""
        return self.apply(cls).slope()
