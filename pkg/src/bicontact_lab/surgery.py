"""Flow-box model and the bi-contact (1, q)-surgery on a transverse annulus.

Chart coordinates are (w, s, t) with orientation dw ^ ds ^ dt.  The local
model on the box C x (-tau, tau), C = S^1 x [-eps, eps], is

    alpha = dw + a(t) ds,   beta = ds + b(t) dw,   a(0) = b(0) = 0,

so alpha = dw and beta = ds on the annulus C = {t = 0}.  The surgery shears C
by F(w, s) = (w, s + f(w)) with f(w) = q * g(w / eps) and compensates with the
perturbations

    rho   = 1/2 * l1(t) * a(t) * f'(w) dw      (support |t| <= tau1)
    sigma = 1/2 * l2(t) * f'(w) dw             (support |t| <= tau2)

yielding branch forms alpha +/- rho and beta +/- sigma on the two sides of the
cut.  The '+' branches live on {t <= 0} and the '-' branches on {t >= 0}: with
that assignment and b' > 0 the beta condition b' +/- 1/2 l2' f' is reinforced
on each side for every positive q, which is what makes all positive
coefficients admissible.  Contact volumes in this chart reduce to

    (alpha +/- rho) ^ d(alpha +/- rho) = (-a' +/- 1/2 l1' a^2 f') vol
    (beta +/- sigma) ^ d(beta +/- sigma) = (b' +/- 1/2 l2' f') vol

and the checks below evaluate them through the generic exterior calculus, with
the closed forms kept in the tests as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .charts import OneForm, ScalarField, contact_volume_grid, transversality_margin_grid
from .errors import PreconditionError
from .monodromy import HomologyClass, Monodromy, Slope
from .profiles import CosSquaredBump, LinearProfile, SmoothStep2Pi, one_sided_bump

__all__ = [
    "FlowBoxModel",
    "ShearProfile",
    "BumpProfile",
    "SurgeryResult",
    "build_flowbox",
    "shear_map",
    "perform_surgery",
    "gluing_residuals",
    "verify_surgery_contact",
    "SurgeryContactReport",
    "tau1_bound",
    "alpha_condition_chain",
    "admissible_negative_coefficients",
    "AdmissibleCoefficients",
]


@dataclass(frozen=True)
class FlowBoxModel:
    """Local model parameters: annulus half-width, box depth and the t-profiles.

    ``a`` and ``b`` are profile objects with value/deriv; both must vanish at
    t = 0 exactly.  ``kind`` records which normalization produced the model.
    """

    epsilon: float
    tau: float
    a: object
    b: object
    kind: str = "linear"

    def __post_init__(self):
        if self.epsilon <= 0 or self.tau <= 0:
            raise PreconditionError("epsilon and tau must be positive")
        if float(self.a.value(0.0)) != 0.0 or float(self.b.value(0.0)) != 0.0:
            raise PreconditionError("model requires a(0) = b(0) = 0 exactly")

    @property
    def a_tau(self) -> float:
        return float(self.a.value(self.tau))

    @property
    def b_tau(self) -> float:
        return float(self.b.value(self.tau))

    def alpha_form(self) -> OneForm:
        return OneForm(1.0, ScalarField.from_profile(self.a, 2), 0.0)

    def beta_form(self) -> OneForm:
        return OneForm(ScalarField.from_profile(self.b, 2), 1.0, 0.0)


def build_flowbox(
    epsilon: float,
    tau: float,
    profile: str = "linear",
    a_tau: float = 0.5,
    b_tau: float = 0.5,
    require_bicontact: bool = True,
) -> FlowBoxModel:
    """Construct the model with linear profiles.

    ``linear`` sets a(t) = (a_tau/tau) t and b(t) = (b_tau/tau) t; the
    ``normalized`` choice sets a(t) = t (and b(t) = t) as in the contact
    estimate near C.  A genuine bi-contact box must satisfy
    a(tau) * b(tau) < 1, which is rejected unless ``require_bicontact`` is
    switched off for deliberately broken models.
    """
    if epsilon <= 0 or tau <= 0:
        raise PreconditionError("epsilon and tau must be positive")
    if profile == "normalized":
        a = LinearProfile(0.0, 1.0)
        b = LinearProfile(0.0, 1.0)
    elif profile == "linear":
        a = LinearProfile(0.0, a_tau / tau)
        b = LinearProfile(0.0, b_tau / tau)
    else:
        raise PreconditionError(f"unknown profile choice {profile!r}")
    model = FlowBoxModel(epsilon=float(epsilon), tau=float(tau), a=a, b=b, kind=profile)
    if require_bicontact and model.a_tau * model.b_tau >= 1.0:
        raise PreconditionError(
            f"a(tau)*b(tau) = {model.a_tau * model.b_tau:.6g} >= 1 breaks plane"
            " transversality in the box"
        )
    return model


@dataclass(frozen=True)
class ShearProfile:
    """f(w) = q * g(w/eps) with the canonical mollified step g.

    g vanishes on (-inf, -1], equals 2*pi on [1, inf), is nondecreasing with
    0 <= g' <= 4 (plateau 8*pi/7), and g(-1) = 0, g(1) = 2*pi hold in closed
    form.  Verified numerically at construction.
    """

    q: int
    step: SmoothStep2Pi = SmoothStep2Pi()

    def __post_init__(self):
        if not isinstance(self.q, int):
            raise PreconditionError(f"surgery coefficient must be an integer, got {self.q!r}")
        g = self.step
        if abs(float(g.value(-1.0))) > 1e-12 or abs(float(g.value(1.0)) - 2 * math.pi) > 1e-12:
            raise PreconditionError("step endpoints violate g(-1) = 0, g(1) = 2*pi")
        u = np.linspace(-1.2, 1.2, 4001)
        gp = np.asarray(g.deriv(u))
        if gp.min() < 0.0 or gp.max() > 4.0:
            raise PreconditionError("step derivative violates 0 <= g' <= 4")

    def f(self, w, epsilon):
        return self.q * np.asarray(self.step.value(np.asarray(w, float) / epsilon))

    def f_prime(self, w, epsilon):
        return (self.q / epsilon) * np.asarray(self.step.deriv(np.asarray(w, float) / epsilon))

    def f_second(self, w, epsilon):
        return (self.q / epsilon**2) * np.asarray(self.step.second(np.asarray(w, float) / epsilon))

    def f_prime_field(self, epsilon) -> ScalarField:
        """f'(w) lifted to the (w, s, t) chart with analytic w-partial f''."""

        def fn(w, s, t):
            v = self.f_prime(w, epsilon)
            return np.broadcast_arrays(np.asarray(v, float), w, s, t)[0]

        def grad(w, s, t):
            d = np.asarray(self.f_second(w, epsilon), float)
            zero = np.zeros(np.broadcast(np.asarray(w), np.asarray(s), np.asarray(t)).shape)
            if zero.ndim == 0:
                return (float(d), 0.0, 0.0)
            return (np.broadcast_to(d, zero.shape).copy(), zero, zero.copy())

        kinks = tuple((0, k * epsilon) for k in self.step.kinks)
        return ScalarField(fn, grad, kinks)


def shear_map(profile: ShearProfile, epsilon: float):
    """The annulus self-map (s, w) -> (s + q*g(w/eps), w)."""

    def F(s, w):
        return (np.asarray(s, float) + profile.f(w, epsilon), np.asarray(w, float))

    return F


@dataclass(frozen=True)
class BumpProfile:
    """Bump with unit peak at t = 0 and compact support.

    For the alpha perturbation the derivative bound |l'| <= pi/tau must hold
    (the cos^2 family gives pi/(2*tau)); for the beta perturbation the sign
    pattern l' >= 0 for t < 0 and l' <= 0 for t > 0 is required.  Both are
    re-verified numerically here.
    """

    half_width: float
    one_sided: bool = False

    def __post_init__(self):
        if self.half_width <= 0:
            raise PreconditionError("bump support half-width must be positive")
        bump = self._bump()
        if float(bump.value(0.0)) != 1.0:
            raise PreconditionError("bump must have value 1 at t = 0")
        ts = np.linspace(0.0 if self.one_sided else -self.half_width, self.half_width, 2001)
        dv = np.asarray(bump.deriv(ts))
        bound = math.pi / self.half_width
        if np.max(np.abs(dv)) > bound + 1e-12:
            raise PreconditionError("bump derivative exceeds pi / tau")
        if np.any(dv[ts > 0] > 1e-12) or np.any(dv[ts < 0] < -1e-12):
            raise PreconditionError("bump derivative has the wrong sign pattern")

    def _bump(self) -> CosSquaredBump:
        return one_sided_bump(self.half_width) if self.one_sided else CosSquaredBump(self.half_width)

    def field(self) -> ScalarField:
        """The bump lifted to the chart as a function of t."""
        return ScalarField.from_profile(self._bump(), 2)

    def value(self, t):
        return self._bump().value(t)

    def deriv(self, t):
        return self._bump().deriv(t)

    @property
    def derivative_bound(self) -> float:
        return math.pi / self.half_width


@dataclass(frozen=True)
class SurgeryResult:
    """The four branch forms plus everything needed to re-check them."""

    alpha_plus: OneForm
    alpha_minus: OneForm
    beta_plus: OneForm
    beta_minus: OneForm
    model: FlowBoxModel
    shear: ShearProfile
    tau1: float
    tau2: float
    one_sided: bool
    bump1: BumpProfile
    bump2: BumpProfile

    @property
    def q(self) -> int:
        return self.shear.q

    def branch_domains(self):
        """(form, t-range) per branch: '+' lives on t <= 0, '-' on t >= 0.

        In one-sided mode the support of both perturbations sits in [0, tau],
        the minus branches are the unperturbed forms on t <= 0 and the plus
        branches carry the perturbation on t >= 0.
        """
        tau = self.model.tau
        if self.one_sided:
            return (
                ("alpha", "-", self.alpha_minus, (-tau, 0.0)),
                ("alpha", "+", self.alpha_plus, (0.0, tau)),
                ("beta", "-", self.beta_minus, (-tau, 0.0)),
                ("beta", "+", self.beta_plus, (0.0, tau)),
            )
        return (
            ("alpha", "+", self.alpha_plus, (-tau, 0.0)),
            ("alpha", "-", self.alpha_minus, (0.0, tau)),
            ("beta", "+", self.beta_plus, (-tau, 0.0)),
            ("beta", "-", self.beta_minus, (0.0, tau)),
        )


def tau1_bound(q: int, epsilon: float) -> float:
    """Largest admissible support half-width for the alpha bump: eps/(2*pi*|q|).

    For q = 0 the perturbation vanishes identically and no bound is needed.
    """
    if q == 0:
        return math.inf
    return epsilon / (2.0 * math.pi * abs(q))


def alpha_condition_chain(q: int, epsilon: float, tau1: float) -> float:
    """Worst-case value of |1/2 l1' t^2 f'| from the defining bounds.

    Uses |l1'| <= pi/tau1, t^2 <= tau1^2 on the support and g' <= 4, giving
    2*pi*tau1*|q|/eps; the contact condition is guaranteed while this is < 1.
    """
    return 2.0 * math.pi * tau1 * abs(q) / epsilon


def perform_surgery(
    model: FlowBoxModel,
    shear: ShearProfile,
    tau1: float,
    tau2: float,
    one_sided: bool = False,
) -> SurgeryResult:
    """Assemble the perturbed branch forms for the (1, q)-surgery."""
    if not 0.0 < tau1 < tau2 <= model.tau:
        raise PreconditionError(
            f"need 0 < tau1 < tau2 <= tau, got tau1={tau1}, tau2={tau2}, tau={model.tau}"
        )
    bump1 = BumpProfile(tau1, one_sided=one_sided)
    bump2 = BumpProfile(tau2, one_sided=one_sided)

    a_field = ScalarField.from_profile(model.a, 2)
    b_field = ScalarField.from_profile(model.b, 2)
    fprime = shear.f_prime_field(model.epsilon)
    half = 1.0 if one_sided else 0.5
    rho = half * bump1.field() * a_field * fprime
    sigma = half * bump2.field() * fprime

    one = ScalarField.constant(1.0)
    zero = ScalarField.constant(0.0)
    alpha_plus = OneForm(one + rho, a_field, zero)
    beta_plus = OneForm(b_field + sigma, one, zero)
    if one_sided:
        alpha_minus = OneForm(one, a_field, zero)
        beta_minus = OneForm(b_field, one, zero)
    else:
        alpha_minus = OneForm(one - rho, a_field, zero)
        beta_minus = OneForm(b_field - sigma, one, zero)

    return SurgeryResult(
        alpha_plus=alpha_plus,
        alpha_minus=alpha_minus,
        beta_plus=beta_plus,
        beta_minus=beta_minus,
        model=model,
        shear=shear,
        tau1=float(tau1),
        tau2=float(tau2),
        one_sided=one_sided,
        bump1=bump1,
        bump2=bump2,
    )


def _pullback_coeffs(form: OneForm, shear: ShearProfile, epsilon, W, S, T):
    """Coefficients of F^* form at (w, s, t) for F(w, s, t) = (w, s + f(w), t).

    F^*(P dw + Q ds + R dt) = (P + Q f') dw + Q ds + R dt, with the
    coefficients evaluated at the image point.
    """
    S_img = S + shear.f(W, epsilon)
    P = form.p(W, S_img, T)
    Q = form.q(W, S_img, T)
    R = form.r(W, S_img, T)
    fp = shear.f_prime(W, epsilon)
    return (P + Q * fp, Q, R)


def gluing_residuals(result: SurgeryResult, n_s: int = 101, n_w: int = 101) -> dict:
    """Max coefficient residual of the gluing identities sampled on C (t = 0).

    Two-sided: F^*(alpha - rho) = alpha + rho and F^*(beta - sigma) =
    beta + sigma.  One-sided: F^*(alpha^-) = alpha^+ + rho and
    F^*(beta^-) = beta^+ + sigma, the minus branches being unperturbed.
    """
    eps = result.model.epsilon
    S, W = np.meshgrid(
        np.linspace(0.0, 2.0 * math.pi, n_s),
        np.linspace(-eps, eps, n_w),
        indexing="ij",
    )
    T = np.zeros_like(W)

    out = {}
    for name, lhs_form, rhs_form in (
        ("alpha", result.alpha_minus, result.alpha_plus),
        ("beta", result.beta_minus, result.beta_plus),
    ):
        lhs = _pullback_coeffs(lhs_form, result.shear, eps, W, S, T)
        rhs = rhs_form.coefficients(W, S, T)
        resid = 0.0
        for l, r in zip(lhs, rhs):
            resid = max(resid, float(np.max(np.abs(np.asarray(l) - np.asarray(r)))))
        out[name] = resid
    return out


@dataclass(frozen=True)
class BranchCheck:
    form: str
    branch: str
    t_range: tuple
    min_abs: float
    sign: int
    sign_consistent: bool
    witness: tuple  # (w, t) at the minimum of |volume|
    passed: bool


@dataclass(frozen=True)
class SurgeryContactReport:
    passed: bool
    checks: tuple
    min_transversality: float
    transversality_witness: tuple
    threshold: float


def verify_surgery_contact(
    result: SurgeryResult,
    n_w: int = 201,
    n_t: int = 201,
    threshold: float = 0.0,
) -> SurgeryContactReport:
    """Grid check of both contact conditions and bi-contact transversality.

    Each branch form is checked on its own side of the cut (see
    ``branch_domains``).  The contact volumes are computed through the generic
    exterior calculus; a branch passes when its volume never changes sign and
    min |volume| exceeds the threshold.  Transversality of the matching
    (alpha, beta) branches must stay positive everywhere.  Failures are
    entries in the report, not exceptions.
    """
    eps = result.model.epsilon
    ws = np.linspace(-eps, eps, n_w)

    checks = []
    min_trans = math.inf
    trans_witness = None
    domains = result.branch_domains()
    by_key = {(f, b): (form, rng) for f, b, form, rng in domains}

    for form_name, branch, form, (t_lo, t_hi) in domains:
        ts = np.linspace(t_lo, t_hi, n_t)
        W, T = np.meshgrid(ws, ts, indexing="ij")
        S = np.zeros_like(W)
        vol = contact_volume_grid(form, W, S, T)
        idx = np.unravel_index(int(np.argmin(np.abs(vol))), vol.shape)
        min_abs = float(np.abs(vol)[idx])
        ref_sign = int(np.sign(vol.flat[np.argmax(np.abs(vol))]))
        consistent = bool(np.all(vol * ref_sign >= 0.0)) and ref_sign != 0
        passed = consistent and min_abs > threshold
        checks.append(
            BranchCheck(
                form=form_name,
                branch=branch,
                t_range=(t_lo, t_hi),
                min_abs=min_abs,
                sign=ref_sign,
                sign_consistent=consistent,
                witness=(float(W[idx]), float(T[idx])),
                passed=passed,
            )
        )

    for branch in ("+", "-"):
        alpha_form, (t_lo, t_hi) = by_key[("alpha", branch)]
        beta_form, _ = by_key[("beta", branch)]
        ts = np.linspace(t_lo, t_hi, n_t)
        W, T = np.meshgrid(ws, ts, indexing="ij")
        S = np.zeros_like(W)
        margin = transversality_margin_grid(alpha_form, beta_form, W, S, T)
        idx = np.unravel_index(int(np.argmin(margin)), margin.shape)
        if float(margin[idx]) < min_trans:
            min_trans = float(margin[idx])
            trans_witness = (float(W[idx]), float(T[idx]))

    passed = all(c.passed for c in checks) and min_trans > threshold
    return SurgeryContactReport(
        passed=passed,
        checks=tuple(checks),
        min_transversality=min_trans,
        transversality_witness=trans_witness,
        threshold=threshold,
    )


@dataclass(frozen=True)
class AdmissibleCoefficients:
    """Admissible surgery coefficients from the slope comparison.

    Positive coefficients are always admissible; a negative q is admissible
    while |q / (2 eps)| stays below the slope of the monodromy image of the
    transverse generator.  ``min_q`` is None when every integer is admissible
    (infinite slope).
    """

    slope: Slope
    width: Fraction
    min_q: Optional[int]

    @property
    def description(self) -> str:
        if self.min_q is None:
            return "{q in Z}"
        return f"{{q in Z : q >= {self.min_q}}}"

    def admits(self, q: int) -> bool:
        if q >= 0 or self.min_q is None:
            return True
        return q >= self.min_q


def admissible_negative_coefficients(
    mono: Monodromy,
    gamma: HomologyClass,
    width,
) -> AdmissibleCoefficients:
    """Exact-rational evaluation of the admissibility criterion.

    ``width`` is the full annulus width 2*eps (at most 1) given as anything
    Fraction accepts; strings such as "0.5" stay exact.  The criterion
    |q| / width < slope(image of gamma) is decided in integer arithmetic, so
    the reported minimal q is exact.
    """
    width = Fraction(width)
    if width <= 0:
        raise PreconditionError("annulus width must be positive")
    if width > 1:
        raise PreconditionError(f"annulus width 2*eps = {width} exceeds the fiber bound 1")
    if not mono.is_anosov():
        raise PreconditionError("admissibility criterion needs an Anosov monodromy")

    slope = mono.image_slope(gamma)
    if slope.is_infinite:
        return AdmissibleCoefficients(slope=slope, width=width, min_q=None)
    cutoff = width * abs(slope.as_fraction())
    largest = math.ceil(cutoff) - 1  # largest integer strictly below cutoff
    min_q = -largest if largest >= 1 else 0
    return AdmissibleCoefficients(slope=slope, width=width, min_q=min_q)
