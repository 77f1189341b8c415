"""Minimal exterior calculus on 3-dimensional coordinate charts.

Scalar fields carry analytic partials supplied at construction; central finite
differences are kept as a validation oracle only, never as the primary path
(the downstream checks are sign conditions, and difference noise near a zero
would flip verdicts).

Orientation is fixed once per chart as the positive coordinate order
dx1 ^ dx2 ^ dx3 (dx ^ dy ^ dz on torus charts, dw ^ ds ^ dt on flow boxes);
every signed 3-form value below is relative to that order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import PreconditionError

__all__ = [
    "ScalarField",
    "OneForm",
    "ThreeFormValue",
    "GridSpec",
    "GridSummary",
    "exterior_derivative",
    "contact_volume",
    "contact_volume_grid",
    "transversality_margin",
    "transversality_margin_grid",
    "grid_scan",
    "validate_partials",
    "FD_STEP",
]

FD_STEP = 1e-5
# Finite differences are only a valid oracle where the field is C^2; points
# closer than this to a registered kink are skipped by the validator.
KINK_EXCLUSION = 100 * FD_STEP


class ScalarField:
    """A scalar function on a 3-chart together with its analytic gradient.

    ``fn(x1, x2, x3)`` and ``grad(x1, x2, x3) -> (d1, d2, d3)`` must both
    accept floats or broadcastable numpy arrays.  ``kinks`` lists points where
    some derivative jumps, as (axis, coordinate) pairs.
    """

    __slots__ = ("fn", "grad", "kinks")

    def __init__(self, fn, grad, kinks=()):
        self.fn = fn
        self.grad = grad
        self.kinks = tuple(kinks)

    def __call__(self, x1, x2, x3):
        return self.fn(x1, x2, x3)

    def partials(self, x1, x2, x3):
        return self.grad(x1, x2, x3)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(c):
        c = float(c)
        return ScalarField(
            lambda x1, x2, x3: np.broadcast_arrays(np.asarray(x1, float) * 0.0 + c, x2, x3)[0],
            lambda x1, x2, x3: _zero3(x1, x2, x3),
        )

    @staticmethod
    def coordinate(axis):
        if axis not in (0, 1, 2):
            raise ValueError(f"axis must be 0, 1 or 2, got {axis}")

        def fn(x1, x2, x3):
            return np.broadcast_arrays(np.asarray((x1, x2, x3)[axis], float), x1, x2, x3)[0]

        def grad(x1, x2, x3):
            zero = _zero3(x1, x2, x3)
            parts = list(zero)
            parts[axis] = parts[axis] + 1.0
            return tuple(parts)

        return ScalarField(fn, grad)

    @staticmethod
    def from_profile(profile, axis):
        """Lift a 1-d profile (value/deriv on one coordinate) to the chart."""
        if axis not in (0, 1, 2):
            raise ValueError(f"axis must be 0, 1 or 2, got {axis}")

        def fn(x1, x2, x3):
            u = (x1, x2, x3)[axis]
            v = profile.value(u)
            return np.broadcast_arrays(np.asarray(v, float), x1, x2, x3)[0]

        def grad(x1, x2, x3):
            u = (x1, x2, x3)[axis]
            d = np.asarray(profile.deriv(u), float)
            zero = list(_zero3(x1, x2, x3))
            zero[axis] = zero[axis] + d
            return tuple(zero)

        kinks = tuple((axis, k) for k in getattr(profile, "kinks", ()))
        return ScalarField(fn, grad, kinks)

    # -- algebra (product rule keeps gradients analytic) --------------------

    def __add__(self, other):
        other = _as_field(other)
        return ScalarField(
            lambda *p: self.fn(*p) + other.fn(*p),
            lambda *p: tuple(a + b for a, b in zip(self.grad(*p), other.grad(*p))),
            self.kinks + other.kinks,
        )

    __radd__ = __add__

    def __neg__(self):
        return ScalarField(
            lambda *p: -self.fn(*p),
            lambda *p: tuple(-a for a in self.grad(*p)),
            self.kinks,
        )

    def __sub__(self, other):
        return self + (-_as_field(other))

    def __mul__(self, other):
        other = _as_field(other)

        def grad(*p):
            f, g = self.fn(*p), other.fn(*p)
            df, dg = self.grad(*p), other.grad(*p)
            return tuple(a * g + f * b for a, b in zip(df, dg))

        return ScalarField(lambda *p: self.fn(*p) * other.fn(*p), grad, self.kinks + other.kinks)

    __rmul__ = __mul__


def _as_field(value):
    if isinstance(value, ScalarField):
        return value
    return ScalarField.constant(value)


def _zero3(x1, x2, x3):
    z = np.zeros(np.broadcast(np.asarray(x1), np.asarray(x2), np.asarray(x3)).shape)
    if z.ndim == 0:
        return (0.0, 0.0, 0.0)
    return (z, z.copy(), z.copy())


@dataclass(frozen=True)
class ThreeFormValue:
    """Value of a 3-form against the oriented chart volume at a point."""

    coefficient: float

    @property
    def sign(self):
        return (self.coefficient > 0) - (self.coefficient < 0)


class OneForm:
    """p dx1 + q dx2 + r dx3 with ScalarField coefficients."""

    __slots__ = ("p", "q", "r")

    def __init__(self, p, q, r):
        self.p = _as_field(p)
        self.q = _as_field(q)
        self.r = _as_field(r)

    @property
    def coeff_fields(self):
        return (self.p, self.q, self.r)

    def coefficients(self, x1, x2, x3):
        return tuple(c(x1, x2, x3) for c in self.coeff_fields)

    def __call__(self, point, v):
        """Evaluate on a tangent vector: p*v1 + q*v2 + r*v3."""
        c = self.coefficients(*point)
        return c[0] * v[0] + c[1] * v[1] + c[2] * v[2]

    def partial_matrix(self, x1, x2, x3):
        """J[i][j] = d(coefficient_j)/d(x_i)."""
        grads = [c.partials(x1, x2, x3) for c in self.coeff_fields]
        return [[grads[j][i] for j in range(3)] for i in range(3)]

    @property
    def kinks(self):
        return self.p.kinks + self.q.kinks + self.r.kinks


def exterior_derivative(form: OneForm):
    """Return the 2-form evaluator of d(form).

    The evaluator maps (point, u, v) to
    sum_{i<j} (d_i w_j - d_j w_i) (u_i v_j - u_j v_i); antisymmetry in (u, v)
    is an algebraic identity of this expression.
    """

    def two_form(point, u, v):
        J = form.partial_matrix(*point)
        total = 0.0
        for i, j in ((0, 1), (0, 2), (1, 2)):
            total += (J[i][j] - J[j][i]) * (u[i] * v[j] - u[j] * v[i])
        return total

    return two_form


def _contact_coefficient(form, x1, x2, x3):
    # coefficient of w ^ dw against dx1^dx2^dx3: p(d2 r - d3 q) + q(d3 p - d1 r) + r(d1 q - d2 p)
    p, q, r = form.coefficients(x1, x2, x3)
    J = form.partial_matrix(x1, x2, x3)
    return (
        p * (J[1][2] - J[2][1])
        + q * (J[2][0] - J[0][2])
        + r * (J[0][1] - J[1][0])
    )


def contact_volume(form: OneForm, point) -> ThreeFormValue:
    """alpha ^ d(alpha) at a point, as a signed multiple of the unit volume.

    Negative coefficient means the form is a negative contact form there,
    positive means positive, zero means degenerate.
    """
    return ThreeFormValue(float(_contact_coefficient(form, *point)))


def contact_volume_grid(form: OneForm, x1, x2, x3):
    """Vectorized contact coefficient over broadcastable coordinate arrays."""
    return np.asarray(_contact_coefficient(form, x1, x2, x3), dtype=float)


def _wedge_norms(alpha, beta, x1, x2, x3):
    a = np.stack([np.broadcast_arrays(c, x1, x2, x3)[0] for c in alpha.coefficients(x1, x2, x3)])
    b = np.stack([np.broadcast_arrays(c, x1, x2, x3)[0] for c in beta.coefficients(x1, x2, x3)])
    cross = np.cross(a, b, axis=0)
    return (
        np.sqrt((cross**2).sum(axis=0)),
        np.sqrt((a**2).sum(axis=0)),
        np.sqrt((b**2).sum(axis=0)),
    )


def transversality_margin(alpha: OneForm, beta: OneForm, point) -> float:
    """|alpha ^ beta| at a point, normalized by the coefficient norms.

    Zero exactly when ker(alpha) = ker(beta).  The normalization makes the
    margin scale-free so thresholds do not depend on coefficient units.
    Raises if either form vanishes at the point (no plane field there).
    """
    wedge, na, nb = _wedge_norms(alpha, beta, *point)
    if float(na) == 0.0 or float(nb) == 0.0:
        raise PreconditionError(f"form vanishes at {tuple(point)}; margin undefined")
    return float(wedge / (na * nb))


def transversality_margin_grid(alpha: OneForm, beta: OneForm, x1, x2, x3):
    wedge, na, nb = _wedge_norms(alpha, beta, x1, x2, x3)
    if np.any(na == 0.0) or np.any(nb == 0.0):
        raise PreconditionError("a form vanishes somewhere on the grid; margin undefined")
    return wedge / (na * nb)


@dataclass(frozen=True)
class GridSpec:
    """Per-axis closed ranges, sample counts and periodicity flags.

    A periodic axis is sampled over [lo, hi) so the identified endpoint is not
    double counted.  Sample counts must be >= 2 on axes with lo < hi.
    """

    ranges: tuple
    counts: tuple
    periodic: tuple = None

    def __post_init__(self):
        if self.periodic is None:
            object.__setattr__(self, "periodic", (False,) * len(self.ranges))
        if not (len(self.ranges) == len(self.counts) == len(self.periodic)):
            raise PreconditionError("ranges, counts and periodic must have equal length")
        for (lo, hi), n in zip(self.ranges, self.counts):
            if hi < lo:
                raise PreconditionError(f"empty range ({lo}, {hi})")
            if n < 1 or (hi > lo and n < 2):
                raise PreconditionError(f"need at least 2 samples on a non-degenerate axis, got {n}")

    def axis_samples(self, i):
        (lo, hi), n, per = self.ranges[i], self.counts[i], self.periodic[i]
        if per:
            return np.linspace(lo, hi, n, endpoint=False)
        return np.linspace(lo, hi, n)

    def meshgrid(self):
        axes = [self.axis_samples(i) for i in range(len(self.ranges))]
        return np.meshgrid(*axes, indexing="ij")

    @property
    def ndim(self):
        return len(self.ranges)


@dataclass(frozen=True)
class GridSummary:
    minimum: float
    maximum: float
    argmin: tuple
    argmax: tuple
    crossings: tuple = ()
    exact_zeros: tuple = ()


def grid_scan(fn: Callable, grid: GridSpec, threads: int = 1) -> GridSummary:
    """Exact min/max over the sampled points, plus zero crossings on 1-d grids.

    ``fn`` receives one coordinate array per axis.  Zero crossings are
    reported as (left, right) brackets between adjacent samples of opposite
    sign; samples that hit zero exactly are listed in ``exact_zeros``.
    Argmin/argmax ties break to the lowest lexicographic index (numpy's first
    occurrence in C order), which keeps threaded and serial scans identical.
    """
    mesh = grid.meshgrid()
    if threads > 1 and mesh[0].size >= 2:
        values = _threaded_eval(fn, mesh, threads)
    else:
        values = np.asarray(fn(*mesh), dtype=float)
    values = np.broadcast_to(values, mesh[0].shape)

    flat_min = int(np.argmin(values))
    flat_max = int(np.argmax(values))
    idx_min = np.unravel_index(flat_min, values.shape)
    idx_max = np.unravel_index(flat_max, values.shape)
    argmin = tuple(float(m[idx_min]) for m in mesh)
    argmax = tuple(float(m[idx_max]) for m in mesh)

    crossings = []
    zeros = []
    if grid.ndim == 1:
        xs = grid.axis_samples(0)
        vals = values.ravel()
        zero_mask = vals == 0.0
        zeros = [float(x) for x in xs[zero_mask]]
        sign = np.sign(vals)
        flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
        crossings = [(float(xs[i]), float(xs[i + 1])) for i in flips]

    return GridSummary(
        minimum=float(values[idx_min]),
        maximum=float(values[idx_max]),
        argmin=argmin,
        argmax=argmax,
        crossings=tuple(crossings),
        exact_zeros=tuple(zeros),
    )


def _threaded_eval(fn, mesh, threads):
    """Chunk the first axis across a thread pool; chunk order is preserved, so
    the assembled array (and every downstream reduction) is deterministic."""
    n0 = mesh[0].shape[0]
    bounds = np.array_split(np.arange(n0), min(threads, n0))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(
            pool.map(lambda ix: np.asarray(fn(*[m[ix] for m in mesh]), dtype=float), bounds)
        )
    parts = [np.broadcast_to(p, (len(b),) + mesh[0].shape[1:]) for p, b in zip(parts, bounds)]
    return np.concatenate(parts, axis=0)


def fd_gradient(field: ScalarField, point, h: float = FD_STEP):
    """Central finite-difference gradient (the validation oracle)."""
    out = []
    base = [float(c) for c in point]
    for axis in range(3):
        hi = list(base)
        lo = list(base)
        hi[axis] += h
        lo[axis] -= h
        out.append((float(field(*hi)) - float(field(*lo))) / (2.0 * h))
    return tuple(out)


def validate_partials(
    field: ScalarField,
    points: Sequence,
    h: float = FD_STEP,
    rtol: float = 1e-4,
    atol: float = 1e-7,
):
    """Check analytic partials against central differences at sample points.

    Points within KINK_EXCLUSION of a registered kink coordinate are skipped:
    a central difference straddling a derivative jump does not approximate the
    one-sided analytic value.  Returns (checked, worst_error, worst_point) and
    raises AssertionError on disagreement.
    """
    checked = 0
    worst = 0.0
    worst_point = None
    for point in points:
        if _near_kink(field, point):
            continue
        analytic = tuple(float(a) for a in field.partials(*point))
        numeric = fd_gradient(field, point, h)
        checked += 1
        for a, n in zip(analytic, numeric):
            err = abs(a - n)
            allowed = atol + rtol * max(abs(a), abs(n))
            score = err / allowed
            if score > worst:
                worst, worst_point = score, tuple(point)
            if err > allowed:
                raise AssertionError(
                    f"partial mismatch at {tuple(point)}: analytic {a!r} vs fd {n!r}"
                )
    return checked, worst, worst_point


def _near_kink(field, point):
    for axis, coord in field.kinks:
        if abs(float(point[axis]) - coord) < KINK_EXCLUSION:
            return True
    return False


def bisect_root(fn, lo, hi, tol=1e-10, max_iter=200):
    """Refine a sign-change bracket to a root by bisection."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise PreconditionError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0 or (hi - lo) < tol:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def sample_points(grid: GridSpec, max_points: int = 4096, seed: int = 0):
    """Deterministic subsample of grid nodes for validation sweeps."""
    mesh = grid.meshgrid()
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    if len(coords) > max_points:
        rng = np.random.default_rng(seed)
        coords = coords[rng.choice(len(coords), size=max_points, replace=False)]
    return [tuple(float(c) for c in row) for row in coords]
