"""Constructive interpolation-parameter solver.

Given a target exponent/weight pair and an auxiliary pair in the same
multilinear class family, the solver searches a decreasing schedule of
interpolation parameters theta and certifies the largest one for which

  * the intermediate exponents are admissible for the case,
  * every transformed weight passes a direct reverse-Holder check at the
    exponent demanded by the Holder-splitting functions,
  * the convexity identities hold pointwise to tight tolerance, and
  * the intermediate weight vector has a finite, stable class constant.

All exponent algebra is exact rational arithmetic; floating point enters
only through quadrature.  The four Holder-splitting check functions of each
verification share one algebraic shape, parametrized by a quadruple
(P, R, Q, Mfac); see `split_exponents`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .characterization import DEFAULT_RHI_CONSTANT, reverse_holder_check
from .grids import DEFAULT_RESOLUTION, CubeFamily
from .weights import (Exponents, MembershipReport, Verdict, WeightSpec,
                      as_fraction, composite_weight, conjugate, membership,
                      muckenhoupt_constant, multilinear_limited_range_constant,
                      multilinear_offdiag_constant)

Frac = Fraction

DEFAULT_THETA_SCHEDULE = tuple(Frac(1, 2 ** k) for k in range(1, 21))

IDENTITY_TOLERANCE = 1e-10


class DegenerateParameterError(ValueError):
    """An intermediate exponent denominator vanished or left its range."""


@dataclass(frozen=True)
class DiagonalVectorCase:
    """Vector-class case with limited-range parameters s_j >= 1."""

    s: tuple[Frac, ...]
    tag: str = field(default="diagonal_vector", init=False)

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(as_fraction(v) for v in self.s))
        if any(v < 1 for v in self.s):
            raise ValueError("limited-range parameters must satisfy s_j >= 1")


@dataclass(frozen=True)
class DiagonalComponentwiseCase:
    s: tuple[Frac, ...]
    tag: str = field(default="diagonal_componentwise", init=False)

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(as_fraction(v) for v in self.s))
        if any(v < 1 for v in self.s):
            raise ValueError("limited-range parameters must satisfy s_j >= 1")


@dataclass(frozen=True)
class OffdiagonalVectorCase:
    """Off-diagonal case with smoothing gap alpha >= 0 on the harmonic sums."""

    alpha: Frac
    tag: str = field(default="offdiagonal_vector", init=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")


@dataclass(frozen=True)
class OffdiagonalComponentwiseCase:
    alpha: Frac
    tag: str = field(default="offdiagonal_componentwise", init=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")


Case = Union[DiagonalVectorCase, DiagonalComponentwiseCase,
             OffdiagonalVectorCase, OffdiagonalComponentwiseCase]


def _recip_sum(values: Sequence[Frac]) -> Frac:
    return sum(Frac(1) / as_fraction(v) for v in values)


def _harmonic(values: Sequence[Frac]) -> Frac:
    return 1 / _recip_sum(values)


def intermediate_exponents(r: Sequence, q: Sequence, theta) -> tuple[Frac, ...]:
    """Solve 1/r_j = (1-theta)/p_j + theta/q_j for p_j, exactly."""
    theta = as_fraction(theta)
    if not (0 <= theta < 1):
        raise ValueError("theta must lie in [0, 1)")
    out = []
    for rj, qj in zip(r, q):
        denom = Frac(1) / as_fraction(rj) - theta / as_fraction(qj)
        if denom <= 0:
            raise DegenerateParameterError(
                f"1/r_j - theta/q_j = {denom} is not positive")
        out.append((1 - theta) / denom)
    return tuple(out)


def intermediate_weights_diagonal(wvec: Sequence[WeightSpec],
                                  vvec: Sequence[WeightSpec],
                                  r: Sequence, q: Sequence,
                                  theta) -> tuple[WeightSpec, ...]:
    """u_j = w_j^(p_j/(r_j(1-theta))) * v_j^(-p_j theta/(q_j(1-theta)))."""
    theta = as_fraction(theta)
    if theta >= 1:
        raise DegenerateParameterError("theta must be below 1")
    p = intermediate_exponents(r, q, theta)
    out = []
    for wj, vj, rj, qj, pj in zip(wvec, vvec, r, q, p):
        e1 = pj / (as_fraction(rj) * (1 - theta))
        e2 = -pj * theta / (as_fraction(qj) * (1 - theta))
        out.append((wj.pow(e1) * vj.pow(e2)).simplify())
    return tuple(out)


def intermediate_weights_offdiagonal(wvec: Sequence[WeightSpec],
                                     vvec: Sequence[WeightSpec],
                                     theta) -> tuple[WeightSpec, ...]:
    """u_j = w_j^(1/(1-theta)) * v_j^(-theta/(1-theta))."""
    theta = as_fraction(theta)
    if theta >= 1:
        raise DegenerateParameterError("theta must be below 1")
    e1 = Frac(1) / (1 - theta)
    e2 = -theta / (1 - theta)
    return tuple((wj.pow(e1) * vj.pow(e2)).simplify()
                 for wj, vj in zip(wvec, vvec))


@dataclass(frozen=True)
class SplitExponents:
    """Holder-splitting data (eps, delta) and the four check functions."""

    eps: Frac
    delta: Frac
    rho: Frac
    sigma: Frac
    tau: Frac
    phi: Frac

    @property
    def t(self) -> Frac:
        """Reverse-Holder exponent demanded by this split."""
        return max(self.rho, self.tau)

    def descriptor(self) -> dict:
        return {k: str(getattr(self, k))
                for k in ("eps", "delta", "rho", "sigma", "tau", "phi")}


def split_exponents(P, R, Q, Mfac, theta) -> SplitExponents:
    """Solve rho = sigma, tau = phi for (eps, delta) and evaluate all four.

    The shared shape is
      rho   = P (1+eps) / (R (1-theta)),
      sigma = theta P (Mfac Q - 1)(1+eps) / (Q eps (1-theta)),
      tau   = P (Mfac R - 1)(1+delta) / (R (1-theta)(Mfac P - 1)),
      phi   = theta P (1+delta) / (Q delta (1-theta)(Mfac P - 1)),
    with solution eps = theta R (Mfac Q - 1)/Q, delta = theta R/(Q (Mfac R - 1)).
    At theta = 0 the split degenerates to eps = delta = 0 and sigma, phi are
    extended by their limits rho(0) = tau(0) = 1.
    """
    P, R, Q, Mfac, theta = map(as_fraction, (P, R, Q, Mfac, theta))
    if Mfac * R <= 1:
        raise DegenerateParameterError("Mfac * R <= 1 makes delta degenerate")
    if Mfac * P <= 1:
        raise DegenerateParameterError("Mfac * P <= 1 makes tau degenerate")
    eps = theta * R * (Mfac * Q - 1) / Q
    delta = theta * R / (Q * (Mfac * R - 1))
    rho = P * (1 + eps) / (R * (1 - theta))
    tau = P * (Mfac * R - 1) * (1 + delta) / (R * (1 - theta) * (Mfac * P - 1))
    if theta == 0:
        return SplitExponents(eps, delta, rho, rho, tau, tau)
    sigma = theta * P * (Mfac * Q - 1) * (1 + eps) / (Q * eps * (1 - theta))
    phi = theta * P * (1 + delta) / (Q * delta * (1 - theta) * (Mfac * P - 1))
    return SplitExponents(eps, delta, rho, sigma, tau, phi)


def holder_split_diagonal(r: Sequence, q: Sequence, s: Sequence,
                          theta, j: int) -> SplitExponents:
    """Component split of the limited-range verification for slot j."""
    r = tuple(map(as_fraction, r))
    q = tuple(map(as_fraction, q))
    s = tuple(map(as_fraction, s))
    s_h = _harmonic(s)
    rt, qt = r[j] / s[j], q[j] / s[j]
    if rt <= 1 or qt <= 1:
        raise ValueError("need r_j > s_j and q_j > s_j")
    pt = intermediate_exponents((rt,), (qt,), theta)[0]
    if pt <= 1:
        raise DegenerateParameterError("intermediate exponent left (s_j, inf)")
    return split_exponents(conjugate(pt), conjugate(rt), conjugate(qt),
                           s[j] / s_h, theta)


def holder_split_diagonal_nu(r: Sequence, q: Sequence, s: Sequence,
                             theta) -> SplitExponents:
    """Split of the coupled-weight verification in the limited-range case."""
    r_h = _harmonic(tuple(map(as_fraction, r)))
    q_h = _harmonic(tuple(map(as_fraction, q)))
    s_h = _harmonic(tuple(map(as_fraction, s)))
    p_h = intermediate_exponents((r_h,), (q_h,), theta)[0]
    return split_exponents(p_h, r_h, q_h, 1 / s_h, theta)


def holder_split_offdiagonal(r: Sequence, q: Sequence, theta, j: int,
                             m: int) -> SplitExponents:
    """Component split of the off-diagonal verification for slot j."""
    r = tuple(map(as_fraction, r))
    q = tuple(map(as_fraction, q))
    pj = intermediate_exponents((r[j],), (q[j],), theta)[0]
    if pj <= 1:
        raise DegenerateParameterError("intermediate exponent left (1, inf)")
    return split_exponents(conjugate(pj), conjugate(r[j]), conjugate(q[j]),
                           Frac(m), theta)


def holder_split_offdiagonal_nu(r: Sequence, q: Sequence, alpha, theta,
                                m: int) -> SplitExponents:
    """Split of the coupled-weight verification in the off-diagonal case."""
    alpha = as_fraction(alpha)
    r_h = _harmonic(tuple(map(as_fraction, r)))
    q_h = _harmonic(tuple(map(as_fraction, q)))
    p_h = intermediate_exponents((r_h,), (q_h,), theta)[0]
    return split_exponents(_smoothed(p_h, alpha), _smoothed(r_h, alpha),
                           _smoothed(q_h, alpha), Frac(m), theta)


def _smoothed(p: Frac, alpha: Frac) -> Frac:
    """1/p* = 1/p - alpha; requires the result to be a positive exponent."""
    inv = Frac(1) / p - alpha
    if inv <= 0:
        raise DegenerateParameterError("smoothing gap pushes exponent past infinity")
    return 1 / inv


@dataclass(frozen=True)
class WeightClassPair:
    """A transformed weight together with the scalar class it must inhabit."""

    weight: WeightSpec
    class_exponent: Frac

    def descriptor(self) -> dict:
        return {"weight": self.weight.descriptor(),
                "class_exponent": str(self.class_exponent)}


@dataclass(frozen=True)
class RhiEntry:
    pair: WeightClassPair
    t: float
    constant: float
    max_ratio: float
    passes: bool

    def descriptor(self) -> dict:
        return {**self.pair.descriptor(), "t": self.t, "constant": self.constant,
                "max_ratio": self.max_ratio, "passes": self.passes}


@dataclass(frozen=True)
class SplitCheck:
    """One verification: the split, its reverse-Holder entries, and the
    measured-bound data (target pair and the two source pairs)."""

    label: str
    split: SplitExponents
    rhi: tuple[RhiEntry, ...]
    target: WeightClassPair
    source_r: WeightClassPair
    source_q: WeightClassPair
    bound_exponents: tuple[Frac, Frac]

    def descriptor(self) -> dict:
        return {"label": self.label, "split": self.split.descriptor(),
                "rhi": [e.descriptor() for e in self.rhi],
                "target": self.target.descriptor(),
                "bound_exponents": [str(v) for v in self.bound_exponents]}


@dataclass(frozen=True)
class ProductBound:
    label: str
    lhs: float
    rhs_factors: tuple[float, float]
    rhs_exponents: tuple[str, str]
    rhs: float
    ratio: float

    def descriptor(self) -> dict:
        return {"label": self.label, "lhs": self.lhs,
                "rhs_factors": list(self.rhs_factors),
                "rhs_exponents": list(self.rhs_exponents),
                "rhs": self.rhs, "ratio": self.ratio}


@dataclass(frozen=True)
class ThetaCertificate:
    case: dict
    theta: Frac
    schedule_index: int
    p: tuple[Frac, ...]
    p_harmonic: Frac
    p_star: Optional[Frac]
    u: tuple[WeightSpec, ...]
    checks: tuple[SplitCheck, ...]
    identity_residuals: dict
    u_membership: MembershipReport
    product_bounds: tuple[ProductBound, ...]
    provenance: dict

    def to_json_dict(self) -> dict:
        return {
            "case": self.case,
            "theta": str(self.theta),
            "schedule_index": self.schedule_index,
            "p": [str(v) for v in self.p],
            "p_harmonic": str(self.p_harmonic),
            "p_star": None if self.p_star is None else str(self.p_star),
            "u": [w.descriptor() for w in self.u],
            "checks": [c.descriptor() for c in self.checks],
            "identity_residuals": self.identity_residuals,
            "u_membership": self.u_membership.descriptor(),
            "product_bounds": [b.descriptor() for b in self.product_bounds],
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class ComponentwiseCertificate:
    case: dict
    components: tuple[ThetaCertificate, ...]
    common_theta: Frac
    provenance: dict

    def to_json_dict(self) -> dict:
        return {
            "case": self.case,
            "common_theta": str(self.common_theta),
            "components": [c.to_json_dict() for c in self.components],
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class SolveFailure:
    case: dict
    blocking_check: str
    trail: tuple[dict, ...]
    provenance: dict

    def to_json_dict(self) -> dict:
        return {"case": self.case, "blocking_check": self.blocking_check,
                "trail": list(self.trail), "provenance": self.provenance}


@dataclass(frozen=True)
class SolveOutcome:
    success: bool
    certificate: Optional[Union[ThetaCertificate, ComponentwiseCertificate]]
    failure: Optional[SolveFailure]

    def to_json_dict(self) -> dict:
        body = (self.certificate.to_json_dict() if self.success
                else self.failure.to_json_dict())
        return {"success": self.success, **body}


def _sample_points(family: CubeFamily, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    L = family.half_width
    if family.dim == 1:
        return rng.uniform(-L, L, size=count)
    return rng.uniform(-L, L, size=(count, 2))


def _relative_residual(lhs: np.ndarray, rhs: np.ndarray) -> float:
    scale = np.maximum(np.abs(lhs), 1e-300)
    return float(np.max(np.abs(lhs - rhs) / scale))


def convexity_identity_check(theta, p: Sequence, q: Sequence, r: Sequence,
                             u: Sequence[WeightSpec], v: Sequence[WeightSpec],
                             w: Sequence[WeightSpec], case: Case,
                             samples: Union[int, np.ndarray] = 1000,
                             family: Optional[CubeFamily] = None,
                             seed: int = 0) -> dict:
    """Residuals of the exponent and weight convexity identities.

    The exponent identities are evaluated in exact rational arithmetic; the
    weight identities are checked pointwise at sample points as relative
    residuals.
    """
    theta = as_fraction(theta)
    p = tuple(map(as_fraction, p))
    q = tuple(map(as_fraction, q))
    r = tuple(map(as_fraction, r))
    exp_residual = max(abs(Frac(1) / rj - (1 - theta) / pj - theta / qj)
                       for rj, pj, qj in zip(r, p, q))
    if isinstance(samples, (int, np.integer)):
        fam = family or CubeFamily(1, 4.0, 0, 0)
        pts = _sample_points(fam, int(samples), seed)
    else:
        pts = np.asarray(samples)

    diagonal = isinstance(case, (DiagonalVectorCase, DiagonalComponentwiseCase))
    w_res = 0.0
    for uj, vj, wj, pj, qj, rj in zip(u, v, w, p, q, r):
        if diagonal:
            lhs = wj(pts) ** float(1 / rj)
            rhs = uj(pts) ** float((1 - theta) / pj) * vj(pts) ** float(theta / qj)
        else:
            lhs = wj(pts)
            rhs = uj(pts) ** float(1 - theta) * vj(pts) ** float(theta)
        w_res = max(w_res, _relative_residual(lhs, rhs))

    p_h, q_h, r_h = _harmonic(p), _harmonic(q), _harmonic(r)
    nu_exp_residual = abs(Frac(1) / r_h - (1 - theta) / p_h - theta / q_h)
    if diagonal:
        nu_u = composite_weight(u, Exponents(p))
        nu_v = composite_weight(v, Exponents(q))
        nu_w = composite_weight(w, Exponents(r))
        lhs = nu_w(pts) ** float(1 / r_h)
        rhs = (nu_u(pts) ** float((1 - theta) / p_h)
               * nu_v(pts) ** float(theta / q_h))
    else:
        nu_u = composite_weight(u)
        nu_v = composite_weight(v)
        nu_w = composite_weight(w)
        lhs = nu_w(pts)
        rhs = nu_u(pts) ** float(1 - theta) * nu_v(pts) ** float(theta)
    nu_res = _relative_residual(lhs, rhs)
    return {
        "exponent_residual": float(exp_residual),
        "nu_exponent_residual": float(nu_exp_residual),
        "weight_identity_max": w_res,
        "nu_identity_max": nu_res,
        "samples": int(pts.shape[0]),
    }


@dataclass(frozen=True)
class _RawCheck:
    label: str
    split: SplitExponents
    target: WeightClassPair
    source_r: WeightClassPair
    source_q: WeightClassPair
    bound_exponents: tuple[Frac, Frac]


def _class_pair(base: WeightSpec, exponent: Frac, class_factor: Frac):
    """(W^E, A_MR) and its dual partner (W^(-E/(MR-1)), A_(MR)')."""
    first = WeightClassPair(base.pow(exponent).simplify(), class_factor)
    second = WeightClassPair(base.pow(-exponent / (class_factor - 1)).simplify(),
                             conjugate(class_factor))
    return first, second


def _diagonal_raw_checks(qvec, rvec, svec, vvec, wvec, uvec, theta):
    m = len(rvec)
    s_h = _harmonic(svec)
    p = intermediate_exponents(rvec, qvec, theta)
    checks = []
    for j in range(m):
        split = holder_split_diagonal(rvec, qvec, svec, theta, j)
        rt, qt, pt = rvec[j] / svec[j], qvec[j] / svec[j], p[j] / svec[j]
        mt = svec[j] / s_h
        Rt, Qt, Pt = conjugate(rt), conjugate(qt), conjugate(pt)
        checks.append(_RawCheck(
            f"component_{j}", split,
            WeightClassPair(uvec[j].pow(1 - Pt).simplify(), mt * Pt),
            WeightClassPair(wvec[j].pow(1 - Rt).simplify(), mt * Rt),
            WeightClassPair(vvec[j].pow(1 - Qt).simplify(), mt * Qt),
            (Qt / (Qt - theta * Rt),
             theta * rt * (qt - 1) / (qt - theta * rt))))
    split = holder_split_diagonal_nu(rvec, qvec, svec, theta)
    r_h, q_h = _harmonic(rvec), _harmonic(qvec)
    p_h = _harmonic(p)
    checks.append(_RawCheck(
        "coupled", split,
        WeightClassPair(composite_weight(uvec, Exponents(p)), p_h / s_h),
        WeightClassPair(composite_weight(wvec, Exponents(rvec)), r_h / s_h),
        WeightClassPair(composite_weight(vvec, Exponents(qvec)), q_h / s_h),
        (q_h / (q_h - theta * r_h), theta * r_h / (q_h - theta * r_h))))
    return checks


def _offdiagonal_raw_checks(qvec, rvec, alpha, vvec, wvec, uvec, theta):
    m = len(rvec)
    p = intermediate_exponents(rvec, qvec, theta)
    checks = []
    for j in range(m):
        split = holder_split_offdiagonal(rvec, qvec, theta, j, m)
        Rj, Qj, Pj = conjugate(rvec[j]), conjugate(qvec[j]), conjugate(p[j])
        checks.append(_RawCheck(
            f"component_{j}", split,
            WeightClassPair(uvec[j].pow(-Pj).simplify(), m * Pj),
            WeightClassPair(wvec[j].pow(-Rj).simplify(), m * Rj),
            WeightClassPair(vvec[j].pow(-Qj).simplify(), m * Qj),
            (Qj / (Qj - theta * Rj),
             theta * rvec[j] * (qvec[j] - 1) / (qvec[j] - theta * rvec[j]))))
    split = holder_split_offdiagonal_nu(rvec, qvec, alpha, theta, m)
    r_star = _smoothed(_harmonic(rvec), alpha)
    q_star = _smoothed(_harmonic(qvec), alpha)
    p_star = _smoothed(_harmonic(p), alpha)
    checks.append(_RawCheck(
        "coupled", split,
        WeightClassPair(composite_weight(uvec).pow(p_star).simplify(), m * p_star),
        WeightClassPair(composite_weight(wvec).pow(r_star).simplify(), m * r_star),
        WeightClassPair(composite_weight(vvec).pow(q_star).simplify(), m * q_star),
        (p_star / (r_star * (1 - theta)),
         theta * p_star / (q_star * (1 - theta)))))
    return checks


def _run_rhi(raw: _RawCheck, family, c_rhi, resolution):
    t = float(raw.split.t)
    entries = []
    ok = True
    for side in (raw.source_r, raw.source_q):
        for pair in _class_pair_expand(side):
            passes, ratio = reverse_holder_check(pair.weight, t, c_rhi, family,
                                                 resolution)
            entries.append(RhiEntry(pair, t, c_rhi, ratio, passes))
            ok = ok and passes
    return SplitCheck(raw.label, raw.split, tuple(entries), raw.target,
                      raw.source_r, raw.source_q, raw.bound_exponents), ok


def _class_pair_expand(pair: WeightClassPair):
    """The pair itself and its duality partner, both needing reverse-Holder."""
    dual = WeightClassPair(
        pair.weight.pow(Frac(-1) / (pair.class_exponent - 1)).simplify(),
        conjugate(pair.class_exponent))
    return pair, dual


def product_bound_check(certificate: ThetaCertificate, family: CubeFamily,
                        resolution: int = DEFAULT_RESOLUTION) -> tuple[ProductBound, ...]:
    """Evaluate the measured class-constant product bounds for every check.

    The ratio lhs/rhs is recorded, never asserted: the analytic bound hides
    an unknown absolute constant.
    """
    bounds = []
    for check in certificate.checks:
        lhs = muckenhoupt_constant(check.target.weight, check.target.class_exponent,
                                   family, resolution).value
        cR = muckenhoupt_constant(check.source_r.weight,
                                  check.source_r.class_exponent, family,
                                  resolution).value
        cQ = muckenhoupt_constant(check.source_q.weight,
                                  check.source_q.class_exponent, family,
                                  resolution).value
        aR, aQ = check.bound_exponents
        rhs = cR ** float(aR) * cQ ** float(aQ)
        ratio = lhs / rhs if rhs > 0 else math.inf
        bounds.append(ProductBound(check.label, lhs, (cR, cQ),
                                   (str(aR), str(aQ)), rhs, ratio))
    return tuple(bounds)


def _case_descriptor(case: Case) -> dict:
    d = {"tag": case.tag}
    if isinstance(case, (DiagonalVectorCase, DiagonalComponentwiseCase)):
        d["s"] = [str(v) for v in case.s]
    else:
        d["alpha"] = str(case.alpha)
    return d


def _diag_output_admissible(p: Sequence[Frac], svec: Sequence[Frac]) -> Optional[str]:
    if any(pj <= sj for pj, sj in zip(p, svec)):
        return "p_j <= s_j"
    if _recip_sum(p) >= 1:
        return "1/p >= 1"
    return None


def _offdiag_output_admissible(p: Sequence[Frac], alpha: Frac) -> Optional[str]:
    if any(pj <= 1 for pj in p):
        return "p_j <= 1"
    if not (alpha < _recip_sum(p) < alpha + 1):
        return "1/p outside (alpha, alpha+1)"
    return None


def _input_exponent_problem(case: Case, qvec, rvec) -> Optional[str]:
    """Range check on the two given exponent vectors.

    Harmonic reciprocal sums of the inputs are allowed to touch 1 in the
    diagonal case (weak inequality); the certified output obeys the strict
    inequality.
    """
    if isinstance(case, (DiagonalVectorCase, DiagonalComponentwiseCase)):
        svec = case.s
        if any(qj <= sj for qj, sj in zip(qvec, svec)):
            return "q_j <= s_j"
        if any(rj <= sj for rj, sj in zip(rvec, svec)):
            return "r_j <= s_j"
        if _recip_sum(qvec) > 1 or _recip_sum(rvec) > 1:
            return "input harmonic reciprocal sum exceeds 1"
        return None
    alpha = case.alpha
    if any(qj <= 1 for qj in qvec) or any(rj <= 1 for rj in rvec):
        return "q_j or r_j not in (1, inf)"
    if not (alpha < _recip_sum(qvec) < alpha + 1):
        return "1/q outside (alpha, alpha+1)"
    if not (alpha < _recip_sum(rvec) < alpha + 1):
        return "1/r outside (alpha, alpha+1)"
    return None


def solve_theta(case: Case, qvec: Sequence, rvec: Sequence,
                vvec: Sequence[WeightSpec], wvec: Sequence[WeightSpec],
                family: CubeFamily, c_rhi: float = DEFAULT_RHI_CONSTANT,
                theta_schedule: Sequence[Frac] = DEFAULT_THETA_SCHEDULE,
                resolution: int = DEFAULT_RESOLUTION,
                growth_levels: int = 2, stability_threshold: float = 0.01,
                identity_samples: int = 1000, seed: int = 0,
                check_hypotheses: bool = True) -> SolveOutcome:
    """Certify the largest schedule parameter passing every check.

    The (qvec, vvec) pair is the auxiliary scale, (rvec, wvec) the target;
    the certified intermediate pair (p(theta), u(theta)) satisfies the
    convexity identities against both.  Componentwise cases delegate to one
    scalar solve per slot and bundle the scalar certificates.
    """
    qvec = tuple(as_fraction(v) for v in qvec)
    rvec = tuple(as_fraction(v) for v in rvec)
    vvec = tuple(vvec)
    wvec = tuple(wvec)
    m = len(rvec)
    if not (len(qvec) == len(vvec) == len(wvec) == m):
        raise ValueError("vector length mismatch")
    if isinstance(case, (DiagonalVectorCase, DiagonalComponentwiseCase)) \
            and len(case.s) != m:
        raise ValueError("limited-range parameter length mismatch")

    provenance = {
        "c_rhi": c_rhi, "resolution": resolution,
        "growth_levels": growth_levels,
        "stability_threshold": stability_threshold,
        "identity_samples": identity_samples, "seed": seed,
        "family": family.descriptor(),
        "schedule": [str(as_fraction(t)) for t in theta_schedule],
        "q": [str(v) for v in qvec], "r": [str(v) for v in rvec],
        "v": [w.descriptor() for w in vvec],
        "w": [w.descriptor() for w in wvec],
    }
    case_d = _case_descriptor(case)

    problem = _input_exponent_problem(case, qvec, rvec)
    if problem:
        return SolveOutcome(False, None, SolveFailure(
            case_d, f"hypothesis:exponents:{problem}", (), provenance))

    if isinstance(case, (DiagonalComponentwiseCase, OffdiagonalComponentwiseCase)):
        return _solve_componentwise(case, qvec, rvec, vvec, wvec, family, c_rhi,
                                    theta_schedule, resolution, growth_levels,
                                    stability_threshold, identity_samples, seed,
                                    case_d, provenance)

    diagonal = isinstance(case, DiagonalVectorCase)
    if diagonal:
        svec = case.s
        alpha = None
    else:
        svec = None
        alpha = case.alpha

    if check_hypotheses:
        if diagonal:
            v_fn = lambda fam: multilinear_limited_range_constant(
                vvec, Exponents(qvec), Exponents(svec), fam, resolution)
            w_fn = lambda fam: multilinear_limited_range_constant(
                wvec, Exponents(rvec), Exponents(svec), fam, resolution)
        else:
            q_star = _smoothed(_harmonic(qvec), alpha)
            r_star = _smoothed(_harmonic(rvec), alpha)
            v_fn = lambda fam: multilinear_offdiag_constant(
                vvec, Exponents(qvec), q_star, fam, resolution)
            w_fn = lambda fam: multilinear_offdiag_constant(
                wvec, Exponents(rvec), r_star, fam, resolution)
        for side, fn in (("v", v_fn), ("w", w_fn)):
            rep = membership(fn, family, growth_levels, stability_threshold)
            if rep.verdict is not Verdict.MEMBER:
                return SolveOutcome(False, None, SolveFailure(
                    case_d, f"hypothesis:membership:{side}:{rep.verdict.value}",
                    (rep.descriptor(),), provenance))

    trail = []
    for idx, theta in enumerate(theta_schedule):
        theta = as_fraction(theta)
        step = {"theta": str(theta)}
        try:
            p = intermediate_exponents(rvec, qvec, theta)
            bad = (_diag_output_admissible(p, svec) if diagonal
                   else _offdiag_output_admissible(p, alpha))
            if bad:
                step["failed"] = f"admissibility:{bad}"
                trail.append(step)
                continue
            if diagonal:
                uvec = intermediate_weights_diagonal(wvec, vvec, rvec, qvec, theta)
                raw_checks = _diagonal_raw_checks(qvec, rvec, svec, vvec, wvec,
                                                  uvec, theta)
                p_star = None
            else:
                uvec = intermediate_weights_offdiagonal(wvec, vvec, theta)
                raw_checks = _offdiagonal_raw_checks(qvec, rvec, alpha, vvec,
                                                     wvec, uvec, theta)
                p_star = _smoothed(_harmonic(p), alpha)
        except DegenerateParameterError as exc:
            step["failed"] = f"degenerate:{exc}"
            trail.append(step)
            continue

        checks = []
        rhi_ok = True
        for raw in raw_checks:
            check, ok = _run_rhi(raw, family, c_rhi, resolution)
            checks.append(check)
            if not ok:
                rhi_ok = False
                step["failed"] = f"rhi:{raw.label}"
                break
        if not rhi_ok:
            trail.append(step)
            continue

        residuals = convexity_identity_check(theta, p, qvec, rvec, uvec, vvec,
                                             wvec, case, identity_samples,
                                             family, seed)
        if max(residuals["exponent_residual"], residuals["nu_exponent_residual"],
               residuals["weight_identity_max"],
               residuals["nu_identity_max"]) >= IDENTITY_TOLERANCE:
            step["failed"] = "identities"
            trail.append(step)
            continue

        if diagonal:
            u_fn = lambda fam: multilinear_limited_range_constant(
                uvec, Exponents(p), Exponents(svec), fam, resolution)
        else:
            u_fn = lambda fam: multilinear_offdiag_constant(
                uvec, Exponents(p), p_star, fam, resolution)
        u_rep = membership(u_fn, family, growth_levels, stability_threshold)
        if u_rep.verdict is not Verdict.MEMBER:
            step["failed"] = f"u_membership:{u_rep.verdict.value}"
            trail.append(step)
            continue

        cert = ThetaCertificate(case_d, theta, idx, p, _harmonic(p), p_star,
                                uvec, tuple(checks), residuals, u_rep, (),
                                provenance)
        bounds = product_bound_check(cert, family, resolution)
        cert = ThetaCertificate(case_d, theta, idx, p, _harmonic(p), p_star,
                                uvec, tuple(checks), residuals, u_rep, bounds,
                                provenance)
        return SolveOutcome(True, cert, None)

    last = trail[-1].get("failed", "") if trail else "empty schedule"
    return SolveOutcome(False, None, SolveFailure(
        case_d, f"exhausted_schedule:{last}", tuple(trail), provenance))


def recheck_certificate_json(doc: dict) -> list[str]:
    """Re-derive a serialized certificate's rational data and compare.

    Returns a list of discrepancies; an empty list means the certificate
    revalidates.  Componentwise bundles are rechecked per component.
    """
    problems: list[str] = []
    if "components" in doc:
        for k, comp in enumerate(doc["components"]):
            problems += [f"component_{k}: {p}" for p in
                         recheck_certificate_json(comp)]
        return problems
    try:
        theta = Frac(doc["theta"])
        q = tuple(Frac(v) for v in doc["provenance"]["q"])
        r = tuple(Frac(v) for v in doc["provenance"]["r"])
        p = tuple(Frac(v) for v in doc["p"])
    except (KeyError, ValueError) as exc:
        return [f"unparseable: {exc}"]
    if not (0 < theta < 1):
        problems.append("theta outside (0, 1)")
    try:
        expected_p = intermediate_exponents(r, q, theta)
    except DegenerateParameterError as exc:
        return problems + [f"exponents degenerate: {exc}"]
    if expected_p != p:
        problems.append("intermediate exponents do not re-derive")
    for rj, pj, qj in zip(r, p, q):
        if Frac(1) / rj != (1 - theta) / pj + theta / qj:
            problems.append("convexity identity fails")
    if Frac(doc["p_harmonic"]) != _harmonic(p):
        problems.append("harmonic sum mismatch")

    tag = doc["case"]["tag"]
    m = len(r)
    for check in doc["checks"]:
        label = check["label"]
        if tag == "diagonal_vector":
            s = tuple(Frac(v) for v in doc["case"]["s"])
            if label == "coupled":
                split = holder_split_diagonal_nu(r, q, s, theta)
            else:
                split = holder_split_diagonal(r, q, s, theta,
                                              int(label.split("_")[1]))
        else:
            alpha = Frac(doc["case"]["alpha"])
            if label == "coupled":
                split = holder_split_offdiagonal_nu(r, q, alpha, theta, m)
            else:
                split = holder_split_offdiagonal(r, q, theta,
                                                 int(label.split("_")[1]), m)
        if split.descriptor() != check["split"]:
            problems.append(f"split data for {label} does not re-derive")
        if Frac(check["split"]["rho"]) != Frac(check["split"]["sigma"]):
            problems.append(f"rho != sigma in {label}")
        if Frac(check["split"]["tau"]) != Frac(check["split"]["phi"]):
            problems.append(f"tau != phi in {label}")
        if not all(entry["passes"] for entry in check["rhi"]):
            problems.append(f"reverse-Holder entry failed in {label}")
    return problems


def _solve_componentwise(case, qvec, rvec, vvec, wvec, family, c_rhi,
                         theta_schedule, resolution, growth_levels,
                         stability_threshold, identity_samples, seed,
                         case_d, provenance) -> SolveOutcome:
    """Run one scalar solve per component and bundle the certificates."""
    m = len(rvec)
    certs = []
    for j in range(m):
        if isinstance(case, DiagonalComponentwiseCase):
            scalar_case: Case = DiagonalVectorCase((case.s[j],))
        else:
            scalar_case = OffdiagonalVectorCase(case.alpha / m)
        outcome = solve_theta(scalar_case, (qvec[j],), (rvec[j],), (vvec[j],),
                              (wvec[j],), family, c_rhi, theta_schedule,
                              resolution, growth_levels, stability_threshold,
                              identity_samples, seed)
        if not outcome.success:
            fail = outcome.failure
            return SolveOutcome(False, None, SolveFailure(
                case_d, f"component_{j}:{fail.blocking_check}", fail.trail,
                provenance))
        certs.append(outcome.certificate)
    common = min(c.theta for c in certs)
    return SolveOutcome(True, ComponentwiseCertificate(
        case_d, tuple(certs), common, provenance), None)
