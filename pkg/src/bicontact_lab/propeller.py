"""Propeller bi-contact structures on T^3 and on mapping tori.

A propeller pair on the chart (x, y, z) is

    alpha = cos(ta(z)) dx - sin(ta(z)) dy + eps(z) dz
    beta  = cos(tb(z)) dx + sin(tb(z)) dy

with rotation profiles ta, tb.  The kernel line of alpha on a fiber has
direction angle pi/2 - ta, the one of beta has angle pi/2 + tb, so the planes
coincide exactly where sin(ta + tb) = 0 and eps = 0.  Fibers are glued by
(x, 0) ~ (M x, 1); a coefficient row c at z = 1 therefore has to match c at
z = 0 after right-multiplication by the monodromy matrix, up to positive
scale.

Suspension-type profiles place each kernel line strictly inside one of the two
open arcs cut out of the projective circle by the eigen-directions of the
monodromy and rotate it linearly onto its projective image, so the boundary
directions agree with the rotation the monodromy itself induces.  Extra full
twists on the beta profile give the non-minimal family; those candidates have
coincidence loci unless the eps(z) dz perturbation is switched on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .charts import (
    GridSpec,
    OneForm,
    ScalarField,
    bisect_root,
    contact_volume_grid,
    transversality_margin_grid,
)
from .errors import GluingError, PreconditionError
from .monodromy import Monodromy
from .profiles import LinearProfile

__all__ = [
    "PropellerSpec",
    "BiContactCandidate",
    "linear_spec",
    "suspension_spec",
    "build_propeller",
    "verify_bicontact",
    "coincidence_loci",
    "BiContactReport",
]

GLUING_TOL = 1e-9
DEFAULT_EPSILON = 0.1


@dataclass(frozen=True)
class PropellerSpec:
    """Rotation profiles (radians as functions of z), perturbation and gluing."""

    theta_alpha: LinearProfile
    theta_beta: LinearProfile
    epsilon: LinearProfile
    monodromy: Monodromy
    twist_count: int = 0

    def __post_init__(self):
        if self.twist_count < 0:
            raise PreconditionError("twist count must be nonnegative")


@dataclass(frozen=True)
class BiContactCandidate:
    alpha: OneForm
    beta: OneForm
    spec: PropellerSpec

    @property
    def monodromy(self) -> Monodromy:
        return self.spec.monodromy

    def linear_params(self) -> Optional[tuple]:
        """(a0, a1, b0, b1, eps) when both profiles are linear and eps constant;
        used to route orbit integration to the compiled kernel."""
        ta, tb, ep = self.spec.theta_alpha, self.spec.theta_beta, self.spec.epsilon
        if ep.rate != 0.0:
            return None
        return (ta.offset, ta.rate, tb.offset, tb.rate, ep.offset)


def _trig_field(profile, kind):
    """cos or sin of a z-profile, with the chain-rule partial in z."""

    def fn(x, y, z):
        th = profile.value(z)
        v = np.cos(th) if kind == "cos" else np.sin(th)
        return np.broadcast_arrays(np.asarray(v, float), x, y, z)[0]

    def grad(x, y, z):
        th = profile.value(z)
        dth = np.asarray(profile.deriv(z), float)
        dz = (-np.sin(th) if kind == "cos" else np.cos(th)) * dth
        zero = np.zeros(np.broadcast(np.asarray(x), np.asarray(y), np.asarray(z)).shape)
        if zero.ndim == 0:
            return (0.0, 0.0, float(dz))
        return (zero, zero.copy(), np.broadcast_to(dz, zero.shape).copy())

    return ScalarField(fn, grad, tuple((2, k) for k in getattr(profile, "kinks", ())))


def linear_spec(
    turns: int = 1,
    epsilon: float = DEFAULT_EPSILON,
    monodromy: Monodromy = None,
) -> PropellerSpec:
    """T^3-style spec: ta = tb = 2*pi*turns*z, identity gluing."""
    if monodromy is None:
        monodromy = Monodromy.identity()
    if monodromy != Monodromy.identity():
        raise PreconditionError("linear profiles glue only with the identity monodromy")
    rate = 2.0 * math.pi * turns
    return PropellerSpec(
        theta_alpha=LinearProfile(0.0, rate),
        theta_beta=LinearProfile(0.0, rate),
        epsilon=LinearProfile(float(epsilon), 0.0),
        monodromy=monodromy,
        twist_count=0,
    )


def _line_angle(v) -> float:
    """Angle of a direction in [0, pi)."""
    ang = math.atan2(v[1], v[0]) % math.pi
    return ang


def _projective_displacement(mono: Monodromy, chi: float) -> float:
    """Signed rotation of the line at angle chi under the monodromy,
    as the representative in (-pi/2, pi/2)."""
    d = (math.cos(chi), math.sin(chi))
    image = (
        mono.m11 * d[0] + mono.m12 * d[1],
        mono.m21 * d[0] + mono.m22 * d[1],
    )
    delta = (_line_angle(image) - chi) % math.pi
    if delta > math.pi / 2:
        delta -= math.pi
    return delta


def suspension_spec(
    mono: Monodromy,
    extra_twists: int = 0,
    epsilon: float = 0.0,
) -> PropellerSpec:
    """Propeller adapted to a mapping torus with Anosov monodromy.

    ``extra_twists = 0`` is the minimal-twisting pair that directs the
    suspension flow (no eps dz needed); ``extra_twists = n >= 1`` adds n full
    turns to the beta profile, producing the non-minimal family whose total
    beta rotation magnitude lies in (2*n*pi, (2*n+1)*pi).
    """
    if not mono.is_anosov():
        raise PreconditionError("suspension propellers need an Anosov monodromy")
    if mono.trace < 0:
        raise PreconditionError("suspension builder supports trace > 2 monodromies")
    eig = mono.eigen_data()
    psi_e = _line_angle(eig.expanding_dir)
    psi_c = _line_angle(eig.contracting_dir)
    lo, hi = sorted((psi_e, psi_c))
    mid_first = 0.5 * (lo + hi)          # arc between the eigen-angles
    mid_second = 0.5 * (hi + lo + math.pi)  # complementary arc

    chi_b0 = mid_first
    chi_a0 = mid_second
    db = _projective_displacement(mono, chi_b0)
    da = _projective_displacement(mono, chi_a0)
    if extra_twists:
        if db == 0.0:
            raise PreconditionError("extra twists need a nonzero projective rotation")
        db = db + math.copysign(2.0 * math.pi * extra_twists, db)

    # theta parameterization: ta = pi/2 - chi_a, tb = chi_b - pi/2
    return PropellerSpec(
        theta_alpha=LinearProfile(math.pi / 2 - chi_a0, -da),
        theta_beta=LinearProfile(chi_b0 - math.pi / 2, db),
        epsilon=LinearProfile(float(epsilon), 0.0),
        monodromy=mono,
        twist_count=extra_twists,
    )


def _covector(theta, which):
    if which == "alpha":
        return np.array([math.cos(theta), -math.sin(theta)])
    return np.array([math.cos(theta), math.sin(theta)])


def gluing_defect(spec: PropellerSpec, which: str) -> float:
    """Angle between the z = 0 coefficient row and the z = 1 row pulled back
    through the monodromy.  Positive-proportional rows give defect 0."""
    profile = spec.theta_alpha if which == "alpha" else spec.theta_beta
    c0 = _covector(float(profile.value(0.0)), which)
    c1 = _covector(float(profile.value(1.0)), which)
    pulled = c1 @ spec.monodromy.as_array()
    pulled = pulled / np.linalg.norm(pulled)
    dot = float(np.clip(np.dot(c0, pulled), -1.0, 1.0))
    cross = float(c0[0] * pulled[1] - c0[1] * pulled[0])
    return abs(math.atan2(cross, dot))


def build_propeller(spec: PropellerSpec) -> BiContactCandidate:
    """Assemble the two forms and verify the gluing across z = 0 ~ z = 1."""
    for which in ("alpha", "beta"):
        defect = gluing_defect(spec, which)
        if defect > GLUING_TOL:
            raise GluingError(
                f"{which} boundary angles are not monodromy-compatible "
                f"(angular defect {defect:.3e} rad)",
                defect=defect,
            )
    eps_defect = abs(float(spec.epsilon.value(0.0)) - float(spec.epsilon.value(1.0)))
    if eps_defect > GLUING_TOL:
        raise GluingError(
            f"epsilon(z) must agree at z = 0 and z = 1 (defect {eps_defect:.3e})",
            defect=eps_defect,
        )

    alpha = OneForm(
        _trig_field(spec.theta_alpha, "cos"),
        -1.0 * _trig_field(spec.theta_alpha, "sin"),
        ScalarField.from_profile(spec.epsilon, 2),
    )
    beta = OneForm(
        _trig_field(spec.theta_beta, "cos"),
        _trig_field(spec.theta_beta, "sin"),
        ScalarField.constant(0.0),
    )
    return BiContactCandidate(alpha=alpha, beta=beta, spec=spec)


@dataclass(frozen=True)
class BiContactReport:
    passed: bool
    min_alpha_contact: float
    min_beta_contact: float
    min_margin: float
    alpha_sign: int
    beta_sign: int
    argmin_alpha: tuple
    argmin_beta: tuple
    argmin_margin: tuple
    threshold: float
    opposite_signs: bool


def verify_bicontact(
    candidate: BiContactCandidate,
    grid: GridSpec = None,
    threshold: float = 1e-3,
) -> BiContactReport:
    """Scan |alpha^dalpha|, |beta^dbeta| and the transversality margin.

    Pass requires all three minima above the threshold; the signs of the two
    contact volumes are recorded and must be constant and opposite for a
    bi-contact pair.  Failures come back in the report, never as exceptions.
    """
    if grid is None:
        grid = GridSpec(((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), (9, 9, 41), (True, True, True))
    X, Y, Z = grid.meshgrid()

    va = contact_volume_grid(candidate.alpha, X, Y, Z)
    vb = contact_volume_grid(candidate.beta, X, Y, Z)
    margin = transversality_margin_grid(candidate.alpha, candidate.beta, X, Y, Z)

    def _located_min(values):
        idx = np.unravel_index(int(np.argmin(values)), values.shape)
        return float(values[idx]), (float(X[idx]), float(Y[idx]), float(Z[idx]))

    min_a, arg_a = _located_min(np.abs(va))
    min_b, arg_b = _located_min(np.abs(vb))
    min_m, arg_m = _located_min(margin)

    sign_a = int(np.sign(va.flat[np.argmax(np.abs(va))]))
    sign_b = int(np.sign(vb.flat[np.argmax(np.abs(vb))]))
    opposite = (
        sign_a * sign_b == -1
        and bool(np.all(np.sign(va) == sign_a))
        and bool(np.all(np.sign(vb) == sign_b))
    )
    passed = min_a > threshold and min_b > threshold and min_m > threshold and opposite
    return BiContactReport(
        passed=passed,
        min_alpha_contact=min_a,
        min_beta_contact=min_b,
        min_margin=min_m,
        alpha_sign=sign_a,
        beta_sign=sign_b,
        argmin_alpha=arg_a,
        argmin_beta=arg_b,
        argmin_margin=arg_m,
        threshold=threshold,
        opposite_signs=opposite,
    )


def coincidence_loci(
    candidate: BiContactCandidate,
    scan_samples: int = 4096,
    tol: float = 1e-10,
) -> list:
    """All z in [0, 1) where ker(alpha) = ker(beta).

    The planar parts are parallel exactly at the roots of
    s(z) = sin(ta(z) + tb(z)); each sign-change bracket is refined by
    bisection to ``tol`` and kept only if the full coefficient cross product
    (which includes the eps dz component) vanishes there as well.
    """
    ta, tb, ep = (
        candidate.spec.theta_alpha,
        candidate.spec.theta_beta,
        candidate.spec.epsilon,
    )

    def s(z):
        return float(np.sin(ta.value(z) + tb.value(z)))

    zs = np.linspace(0.0, 1.0, scan_samples + 1)
    vals = np.array([s(z) for z in zs])
    roots = [float(z) for z, v in zip(zs, vals) if v == 0.0]
    sign = np.sign(vals)
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        roots.append(bisect_root(s, float(zs[i]), float(zs[i + 1]), tol=tol))

    loci = []
    for z in roots:
        z = z % 1.0
        eps_here = float(ep.value(z))
        cross_norm = math.hypot(eps_here, s(z))
        if cross_norm <= math.sqrt(2.0) * 1e-8:
            if not any(abs(z - other) < 1e-8 for other in loci):
                loci.append(z)
    return sorted(loci)
