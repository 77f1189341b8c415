"""One-dimensional coefficient profiles with analytic derivatives.

Everything downstream (chart fields, surgery perturbations, cone models) is
assembled from these profiles, so each one carries closed-form derivatives and
a list of ``kinks``: isolated points where some higher derivative jumps and a
central finite difference stops being a valid oracle.

All evaluators accept floats or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LinearProfile",
    "CosSquaredBump",
    "one_sided_bump",
    "SmoothStep2Pi",
    "SHEAR_RAMP_WIDTH",
    "SHEAR_PLATEAU",
]


@dataclass(frozen=True)
class LinearProfile:
    """u -> offset + rate * u."""

    offset: float = 0.0
    rate: float = 0.0
    kinks: tuple = ()

    def value(self, u):
        return self.offset + self.rate * np.asarray(u, dtype=float)

    def deriv(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.rate)

    def second(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))


@dataclass(frozen=True)
class CosSquaredBump:
    """cos^2(pi*t / (2*half_width)) on [-half_width, half_width], 0 outside.

    Peak value 1 at t = 0; max |derivative| = pi / (2*half_width); derivative
    is >= 0 for t < 0 and <= 0 for t > 0.  C^1 at the support boundary (the
    second derivative jumps there), so the boundary points are kinks.

    With ``one_sided`` the support is [0, half_width]; the value at t < 0 is 0
    and the profile is only meant to be evaluated on one side of t = 0.
    """

    half_width: float
    one_sided: bool = False
    kinks: tuple = field(init=False)

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError(f"bump half_width must be positive, got {self.half_width}")
        if self.one_sided:
            object.__setattr__(self, "kinks", (0.0, self.half_width))
        else:
            object.__setattr__(self, "kinks", (-self.half_width, self.half_width))

    def _inside(self, t):
        if self.one_sided:
            return (t >= 0.0) & (t <= self.half_width)
        return np.abs(t) <= self.half_width

    def value(self, t):
        t = np.asarray(t, dtype=float)
        inside = self._inside(t)
        w = np.where(inside, t, 0.0)
        out = np.where(inside, np.cos(math.pi * w / (2.0 * self.half_width)) ** 2, 0.0)
        return out if out.ndim else float(out)

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        inside = self._inside(t)
        w = np.where(inside, t, 0.0)
        out = np.where(
            inside,
            -(math.pi / (2.0 * self.half_width)) * np.sin(math.pi * w / self.half_width),
            0.0,
        )
        return out if out.ndim else float(out)

    @property
    def derivative_bound(self):
        return math.pi / (2.0 * self.half_width)


def one_sided_bump(half_width: float) -> CosSquaredBump:
    """Bump with support in [0, half_width] and value 1 at 0."""
    return CosSquaredBump(half_width, one_sided=True)


# Shear step: ramps occupy the outer quarter of [-1, 1] on each side and the
# plateau height 2*pi/(2 - ramp) ~= 3.59 keeps the derivative below 4, which a
# plain smoothstep would violate (its peak slope is 1.5*pi > 4).
SHEAR_RAMP_WIDTH = 0.25
SHEAR_PLATEAU = 2.0 * math.pi / (2.0 - SHEAR_RAMP_WIDTH)


@dataclass(frozen=True)
class SmoothStep2Pi:
    """Nondecreasing step: 0 on (-inf, -1], 2*pi on [1, inf), 0 <= g' <= 4.

    The derivative is a mollified rectangle: cos^2 ramps of width ``ramp`` at
    each end of [-1, 1] around a flat plateau.  The plateau height is fixed so
    the total mass is exactly 2*pi, hence g(1) = 2*pi in closed form.  g is C^2
    (the third derivative jumps at the four ramp junctions, listed in kinks).
    """

    ramp: float = SHEAR_RAMP_WIDTH
    kinks: tuple = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.ramp < 1.0:
            raise ValueError(f"ramp width must lie in (0, 1), got {self.ramp}")
        object.__setattr__(
            self, "kinks", (-1.0, -1.0 + self.ramp, 1.0 - self.ramp, 1.0)
        )

    @property
    def plateau(self):
        return 2.0 * math.pi / (2.0 - self.ramp)

    def value(self, u):
        u = np.asarray(u, dtype=float)
        r, h = self.ramp, self.plateau
        uc = np.clip(u, -1.0, 1.0)
        v_lo = np.clip((uc + 1.0) / r, 0.0, 1.0)      # rising ramp coordinate
        v_hi = np.clip((uc - (1.0 - r)) / r, 0.0, 1.0)  # falling ramp coordinate
        # antiderivatives of h*sin^2(pi v/2) and h*cos^2(pi v/2), in u-units
        rise = h * r * (0.5 * v_lo - np.sin(math.pi * v_lo) / (2.0 * math.pi))
        plateau = h * np.clip(uc - (-1.0 + r), 0.0, 2.0 - 2.0 * r)
        fall = h * r * (0.5 * v_hi + np.sin(math.pi * v_hi) / (2.0 * math.pi))
        out = rise + plateau + fall
        return out if out.ndim else float(out)

    def deriv(self, u):
        u = np.asarray(u, dtype=float)
        r, h = self.ramp, self.plateau
        out = np.zeros_like(u)
        lo = (u >= -1.0) & (u < -1.0 + r)
        mid = (u >= -1.0 + r) & (u <= 1.0 - r)
        hi = (u > 1.0 - r) & (u <= 1.0)
        v_lo = np.where(lo, (u + 1.0) / r, 0.0)
        v_hi = np.where(hi, (u - (1.0 - r)) / r, 0.0)
        out = np.where(lo, h * np.sin(math.pi * v_lo / 2.0) ** 2, out)
        out = np.where(mid, h, out)
        out = np.where(hi, h * np.cos(math.pi * v_hi / 2.0) ** 2, out)
        return out if out.ndim else float(out)

    def second(self, u):
        u = np.asarray(u, dtype=float)
        r, h = self.ramp, self.plateau
        out = np.zeros_like(u)
        lo = (u >= -1.0) & (u < -1.0 + r)
        hi = (u > 1.0 - r) & (u <= 1.0)
        v_lo = np.where(lo, (u + 1.0) / r, 0.0)
        v_hi = np.where(hi, (u - (1.0 - r)) / r, 0.0)
        out = np.where(lo, h * (math.pi / (2.0 * r)) * np.sin(math.pi * v_lo), out)
        out = np.where(hi, -h * (math.pi / (2.0 * r)) * np.sin(math.pi * v_hi), out)
        return out if out.ndim else float(out)
