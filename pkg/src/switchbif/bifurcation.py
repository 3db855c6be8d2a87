"""Critical-parameter detection, branch continuation, and global checks.

The linear return ratio crosses 1 at the critical parameter; the local
return-map expansion

    pi(x1) = delta(lam) * x1 + delta_coeff * x1**k + o(x1**k),  k > 1

then decides on which side of the critical parameter a branch of
periodic orbits bifurcates from the origin (branch for lam > 0 when
delta_coeff * delta'(0) < 0), with the local amplitude scaling
lam = gamma * x1**(k-1), gamma = -delta_coeff / delta'(0).

Branch points are located as sign changes of the return-map residual
pi(x1) - x1 and polished with a bracketed root finder.  The global
confinement and rotation conditions that make the bifurcating orbit
exist for every parameter on the branch side are checked by
falsification on deterministic low-discrepancy samples: a "pass" means
"no violation found on the samples", never a proof.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .analytic import delta, delta_prime
from .errors import (BudgetError, DegenerateError, EscapeError,
                     InsufficientDataError, PerturbationTooSmallError,
                     StiffnessError, TangencyError)
from .model import (MonomialTerm, PolyField, Quadrant, SwitchedSystem,
                    SystemParams, collect_terms, eval_terms)
from .numeric import IntegratorConfig, poincare_numeric
from .rootfind import brent, expand_bracket

__all__ = [
    "CriticalParameter",
    "ExpansionFit",
    "BranchDirection",
    "BranchPoint",
    "BranchResult",
    "ScalingFit",
    "CheckStatus",
    "Witness",
    "GlobalCheckReport",
    "find_critical_lambda",
    "fit_local_expansion",
    "bifurcation_direction",
    "continue_branch",
    "fit_scaling_law",
    "check_global_conditions",
]


@dataclass(frozen=True)
class CriticalParameter:
    """Root of delta(lam) = 1 with its nondegeneracy data."""

    lambda_star: float
    delta_prime: float
    nondegenerate: bool


def find_critical_lambda(params: SystemParams, bracket: tuple[float, float],
                         value_tol: float = 1e-12,
                         degenerate_tol: float = 1e-10) -> CriticalParameter:
    """Locate the parameter where the stability index crosses 1.

    Requires a sign change of delta - 1 over ``bracket``; raises
    NoBracketError otherwise and DegenerateError when the derivative at
    the root is below ``degenerate_tol``.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    f = lambda lam: delta(params, lam) - 1.0
    lam_star, residual = brent(f, lo, hi, xtol=1e-15, ftol=0.0)
    if abs(residual) > value_tol:
        # brent ran to bracket collapse; a residual above tolerance means
        # the index is too steep for float resolution of lambda
        raise DegenerateError(
            f"|delta - 1| = {abs(residual)} > {value_tol} at the located root {lam_star}")
    dp = delta_prime(params, lam_star)
    if abs(dp) < degenerate_tol:
        raise DegenerateError(
            f"delta'({lam_star}) = {dp} is below the nondegeneracy threshold {degenerate_tol}")
    return CriticalParameter(lambda_star=lam_star, delta_prime=dp, nondegenerate=True)


@dataclass(frozen=True)
class ExpansionFit:
    """Leading nonlinear term of the return map, fitted from residuals.

    ``delta_lin`` is the linear ratio, ``delta_coeff`` and ``k_exp`` the
    fitted coefficient and exponent of the leading correction.  The
    exponent is reported as fitted -- it is not snapped to an integer.
    """

    delta_lin: float
    delta_coeff: float
    k_exp: float
    fit_residual: float
    x1_grid: tuple[float, ...]


def fit_local_expansion(sys: SwitchedSystem, lam: float, cfg: IntegratorConfig,
                        x_max: float = 0.2, n_points: int = 8,
                        return_map=None, noise_factor: float = 50.0) -> ExpansionFit:
    """Fit the leading nonlinear return-map term on a geometric amplitude grid.

    Residuals r(x1) = pi(x1) - delta * x1 are fitted as
    log|r| = log|delta_coeff| + k_exp * log(x1) by least squares; the
    sign of delta_coeff is the residual sign at the largest usable
    amplitude.  Grid points with |r| below the integrator noise floor
    are dropped; fewer than three usable points raises
    PerturbationTooSmallError.

    ``return_map`` may inject a closed-form map x1 -> pi(x1) in place of
    the numerical one (used to test the fit in isolation).
    """
    if return_map is None:
        return_map = lambda x: poincare_numeric(sys, x, lam, cfg).x1_out
    d_lin = delta(sys.params, lam)
    xs = np.array([x_max * 2.0 ** (-j) for j in range(n_points)])
    rs = np.array([return_map(float(x)) - d_lin * x for x in xs])

    floor = noise_factor * max(cfg.rel_tol, cfg.abs_tol, cfg.event_tol)
    usable = np.abs(rs) > floor * xs
    if int(usable.sum()) < 3:
        raise PerturbationTooSmallError(
            f"only {int(usable.sum())} of {n_points} residuals exceed the noise floor; "
            "the nonlinear term is unresolvable at these tolerances")
    xs_u, rs_u = xs[usable], rs[usable]
    sign = 1.0 if rs_u[np.argmax(xs_u)] > 0.0 else -1.0
    logx = np.log(xs_u)
    logr = np.log(np.abs(rs_u))
    k_exp, intercept = np.polyfit(logx, logr, 1)
    resid = logr - (intercept + k_exp * logx)
    return ExpansionFit(delta_lin=d_lin,
                        delta_coeff=sign * math.exp(intercept),
                        k_exp=float(k_exp),
                        fit_residual=float(np.sqrt(np.mean(resid ** 2))),
                        x1_grid=tuple(float(x) for x in xs_u))


class BranchDirection(enum.Enum):
    BranchForPositiveLambda = "BranchForPositiveLambda"
    BranchForNegativeLambda = "BranchForNegativeLambda"


def bifurcation_direction(sys: SwitchedSystem, cfg: IntegratorConfig,
                          lam_star: float = 0.0,
                          expansion: ExpansionFit | None = None) -> BranchDirection:
    """Side of the critical parameter on which periodic orbits bifurcate.

    Requires the system to sit at its critical parameter (delta = 1 at
    ``lam_star``) with a nonvanishing index derivative; the branch lies
    on the positive side iff delta_coeff * delta' < 0.
    """
    d0 = delta(sys.params, lam_star)
    if abs(d0 - 1.0) > 1e-9:
        raise DegenerateError(
            f"delta({lam_star}) = {d0} != 1: system is not at its critical parameter")
    dp = delta_prime(sys.params, lam_star)
    if abs(dp) < 1e-10:
        raise DegenerateError(f"delta'({lam_star}) = {dp} vanishes; direction undefined")
    fit = expansion if expansion is not None else fit_local_expansion(sys, lam_star, cfg)
    product = fit.delta_coeff * dp
    if product < 0.0:
        return BranchDirection.BranchForPositiveLambda
    return BranchDirection.BranchForNegativeLambda


@dataclass(frozen=True)
class BranchPoint:
    """Fixed point of the return map: a periodic orbit through (x1_fixed, 0)."""

    lam: float
    x1_fixed: float
    period: float
    residual: float


@dataclass(frozen=True)
class BranchResult:
    """Outcome of a branch continuation run.

    ``points`` holds the orbit born at the bifurcation (smallest fixed
    point per parameter value); further fixed points found by the scan
    land in ``additional``.  Parameters with no residual sign change in
    the scan range are listed in ``no_orbit``.
    """

    points: tuple[BranchPoint, ...]
    no_orbit: tuple[float, ...]
    additional: tuple[BranchPoint, ...]


def _solve_bracket(residual_fn, cache, lo: float, hi: float, lam: float,
                   residual_tol: float) -> BranchPoint:
    x_fix, fb = brent(residual_fn, lo, hi, xtol=1e-13, ftol=residual_tol * 1e-2)
    sample = cache.get(x_fix)
    if sample is None:
        residual_fn(x_fix)
        sample = cache[x_fix]
    return BranchPoint(lam=lam, x1_fixed=x_fix, period=sample.period,
                       residual=abs(fb))


def continue_branch(sys: SwitchedSystem, lambdas, cfg: IntegratorConfig,
                    x_scan_min: float = 1e-6, x_scan_max: float = 10.0,
                    scan_ratio: float = 2.0, residual_tol: float = 1e-8,
                    expansion: ExpansionFit | None = None,
                    seed_from_previous: bool = True) -> BranchResult:
    """Solve the return-map fixed point for each parameter value in turn.

    Each solve brackets a sign change of pi(x1) - x1, seeded by the
    previous branch point or by the amplitude scaling law when an
    expansion fit is supplied; otherwise a geometric scan over
    (x_scan_min, x_scan_max] is used and the smallest sign change is
    taken as the branch point (larger ones are reported as additional
    orbits).  Scan amplitudes where the trajectory escapes or the
    integration breaks down are skipped (no orbit can pass through
    them); parameters without any sign change between adjacent usable
    amplitudes are recorded in ``no_orbit`` and continuation proceeds.
    """
    points: list[BranchPoint] = []
    no_orbit: list[float] = []
    additional: list[BranchPoint] = []
    prev_x1: float | None = None

    for lam in lambdas:
        cache: dict[float, object] = {}

        def residual_fn(x1, lam=lam, cache=cache):
            sample = poincare_numeric(sys, x1, lam, cfg)
            cache[x1] = sample
            return sample.x1_out - x1

        def residual_or_none(x1):
            try:
                return residual_fn(x1)
            except (EscapeError, StiffnessError, BudgetError, TangencyError):
                return None

        seed = None
        if seed_from_previous and prev_x1 is not None:
            seed = prev_x1
        elif expansion is not None and expansion.k_exp > 1.0:
            ratio = (delta(sys.params, lam) - 1.0) / (-expansion.delta_coeff)
            if ratio > 0.0:
                seed = ratio ** (1.0 / (expansion.k_exp - 1.0))

        solved = None
        if seed is not None and x_scan_min < seed < x_scan_max:
            try:
                bracket = expand_bracket(residual_fn, seed, lo=x_scan_min, hi=x_scan_max)
            except (EscapeError, StiffnessError, BudgetError, TangencyError):
                bracket = None
            if bracket is not None:
                solved = _solve_bracket(residual_fn, cache, bracket[0], bracket[1],
                                        lam, residual_tol)

        if solved is None:
            xs = [x_scan_min]
            while xs[-1] * scan_ratio < x_scan_max:
                xs.append(xs[-1] * scan_ratio)
            xs.append(x_scan_max)
            vals = [residual_or_none(x) for x in xs]
            brackets = [(xs[i], xs[i + 1]) for i in range(len(xs) - 1)
                        if vals[i] is not None and vals[i + 1] is not None
                        and (vals[i] > 0.0) != (vals[i + 1] > 0.0)]
            if not brackets:
                no_orbit.append(lam)
                prev_x1 = None
                continue
            solved = _solve_bracket(residual_fn, cache, *brackets[0], lam, residual_tol)
            for blo, bhi in brackets[1:]:
                additional.append(_solve_bracket(residual_fn, cache, blo, bhi,
                                                 lam, residual_tol))

        points.append(solved)
        prev_x1 = solved.x1_fixed

    return BranchResult(points=tuple(points), no_orbit=tuple(no_orbit),
                        additional=tuple(additional))


@dataclass(frozen=True)
class ScalingFit:
    """Power-law fit lam = gamma_est * x1**exponent_est of a branch."""

    gamma_est: float
    exponent_est: float
    fit_residual: float


def fit_scaling_law(branch) -> ScalingFit:
    """Least-squares log-log fit of parameter against orbit amplitude.

    Needs at least four branch points, all on one side of the critical
    parameter, with positive amplitudes.  For a branch on the negative
    side the fit uses |lam| and gamma_est carries the sign.
    """
    pts = list(branch)
    if len(pts) < 4:
        raise InsufficientDataError(f"scaling-law fit needs >= 4 branch points, got {len(pts)}")
    lams = np.array([p.lam for p in pts])
    xs = np.array([p.x1_fixed for p in pts])
    if np.any(xs <= 0.0):
        raise InsufficientDataError("scaling-law fit needs positive amplitudes")
    if np.all(lams > 0.0):
        side = 1.0
    elif np.all(lams < 0.0):
        side = -1.0
    else:
        raise InsufficientDataError("branch points must lie on one side of the critical parameter")
    logx = np.log(xs)
    logl = np.log(np.abs(lams))
    slope, intercept = np.polyfit(logx, logl, 1)
    resid = logl - (intercept + slope * logx)
    return ScalingFit(gamma_est=side * math.exp(intercept),
                      exponent_est=float(slope),
                      fit_residual=float(np.sqrt(np.mean(resid ** 2))))


# -- global existence conditions ------------------------------------------------


class CheckStatus(enum.Enum):
    PASS_SAMPLED = "pass-sampled"
    FAIL = "fail"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class Witness:
    """A concrete sample point violating one of the checked inequalities."""

    field_index: int
    x: tuple[float, float]
    value: float
    description: str


@dataclass(frozen=True)
class GlobalCheckReport:
    """Sampled verification of the confinement / rotation / index conditions.

    A PASS_SAMPLED status means no violation was found on the sample
    set; it is falsification-only, never a proof.  FAIL always carries
    a concrete witness.
    """

    lyapunov_ok: CheckStatus
    lyapunov_witness: Witness | None
    rotation_ok: CheckStatus
    rotation_witness: Witness | None
    delta_conditions_ok: bool
    samples_used: int
    radius_M: float
    rotation_pert_inner_max: float
    notes: tuple[str, ...]


def _rotation_inner_terms(field: PolyField) -> tuple[MonomialTerm, ...]:
    """Monomials of <field, Sx> with S = [[0, -1], [1, 0]], i.e. Sx = (-x2, x1).

    Collected symbolically so structurally-zero angular contributions
    evaluate to exactly zero.
    """
    terms = [MonomialTerm(t.coeff.scaled(-1.0), t.pow1, t.pow2 + 1) for t in field.comp1]
    terms += [MonomialTerm(t.coeff, t.pow1 + 1, t.pow2) for t in field.comp2]
    return collect_terms(terms)


def _radial_inner_terms(field: PolyField) -> tuple[MonomialTerm, ...]:
    """Monomials of <x, field>, collected."""
    terms = [MonomialTerm(t.coeff, t.pow1 + 1, t.pow2) for t in field.comp1]
    terms += [MonomialTerm(t.coeff, t.pow1, t.pow2 + 1) for t in field.comp2]
    return collect_terms(terms)


_GOLDEN = 0.6180339887498949


def _golden_points(radii: np.ndarray, offset: float) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(radii.size, dtype=float)
    theta = 2.0 * math.pi * ((j * _GOLDEN + offset) % 1.0)
    return radii * np.cos(theta), radii * np.sin(theta)


def check_global_conditions(sys: SwitchedSystem, lam: float, radius_M: float = 10.0,
                            n_samples: int = 100_000) -> GlobalCheckReport:
    """Falsification check of the three global bifurcation conditions.

    1. Confinement: with the candidate function V(x) = |x|^2, the
       derivative along every quadrant field is negative at sampled
       points with radius in (M, 10M] plus points on the circles of
       radius M, 2M, 10M.  If only this candidate fails while the
       radial perturbation form <x, pert> < 0 (with growing magnitude)
       holds, the status is NOT_APPLICABLE rather than FAIL.
    2. Rotation: the linear angular speed dominates the perturbation's
       angular contribution, |<A_i x, Sx>| > |<pert_i, Sx>|, at sampled
       nonzero points with radius <= 10M.  The one-sided comparison
       without absolute values is also evaluated and noted.
    3. Index: delta(0) = 1 and delta'(0) > 0.
    """
    if radius_M <= 0.0:
        raise ValueError("radius_M must be positive")
    sys.params.check_lambda(lam)
    p = sys.params
    a = p.a
    b = p.b.value_at(lam)
    c = p.c.value_at(lam)
    notes: list[str] = []

    n_ann = int(n_samples)
    n_circ = max(64, n_samples // 100)
    j = np.arange(n_ann, dtype=float)
    r_ann = radius_M * np.sqrt(1.0 + 99.0 * (j + 0.5) / n_ann)
    x1_list, x2_list = [], []
    xa, ya = _golden_points(r_ann, 0.0)
    x1_list.append(xa)
    x2_list.append(ya)
    # the three circles share sample angles so radial decay can be
    # compared along matched rays
    for rc in (1.0, 2.0, 10.0):
        xc, yc = _golden_points(np.full(n_circ, rc * radius_M), 0.17)
        x1_list.append(xc)
        x2_list.append(yc)
    ox1 = np.concatenate(x1_list)
    ox2 = np.concatenate(x2_list)
    r2_out = ox1 ** 2 + ox2 ** 2

    jd = np.arange(n_samples, dtype=float)
    r_disk = 10.0 * radius_M * np.sqrt((jd + 0.5) / n_samples)
    dx1, dx2 = _golden_points(r_disk, 0.43)
    samples_used = ox1.size + dx1.size

    lyap_status = CheckStatus.PASS_SAMPLED
    lyap_witness = None
    rot_status = CheckStatus.PASS_SAMPLED
    rot_witness = None
    strict_rotation_ok = True
    pert_inner_max = 0.0

    for q in Quadrant:
        pert = sys.perturbation(q)
        if q in (Quadrant.Q1, Quadrant.Q3):
            lin_radial = -a * r2_out + (b - c) * ox1 * ox2
            lin_angular = -(c * dx1 ** 2 + b * dx2 ** 2)
        else:
            lin_radial = -a * r2_out + (c - b) * ox1 * ox2
            lin_angular = -(b * dx1 ** 2 + c * dx2 ** 2)

        vdot = 2.0 * (lin_radial + eval_terms(_radial_inner_terms(pert), ox1, ox2, lam))
        bad = np.nonzero(vdot >= 0.0)[0]
        if bad.size and lyap_status is CheckStatus.PASS_SAMPLED:
            k = int(bad[np.argmax(vdot[bad])])
            lyap_witness = Witness(
                field_index=int(q), x=(float(ox1[k]), float(ox2[k])), value=float(vdot[k]),
                description=(f"dV/dt = {vdot[k]:.6g} >= 0 for field {int(q)} at "
                             f"x = ({ox1[k]:.6g}, {ox2[k]:.6g}), "
                             f"|x| = {math.sqrt(r2_out[k]):.6g}"))
            lyap_status = CheckStatus.FAIL

        pert_angular = eval_terms(_rotation_inner_terms(pert), dx1, dx2, lam)
        pert_angular = np.asarray(pert_angular + 0.0 * dx1)
        pert_inner_max = max(pert_inner_max, float(np.max(np.abs(pert_angular))))
        abs_bad = np.nonzero(np.abs(lin_angular) <= np.abs(pert_angular))[0]
        if abs_bad.size and rot_status is CheckStatus.PASS_SAMPLED:
            k = int(abs_bad[0])
            rot_witness = Witness(
                field_index=int(q), x=(float(dx1[k]), float(dx2[k])),
                value=float(abs(pert_angular[k]) - abs(lin_angular[k])),
                description=(f"|<A x, Sx>| = {abs(lin_angular[k]):.6g} <= "
                             f"|<pert, Sx>| = {abs(pert_angular[k]):.6g} for field "
                             f"{int(q)} at x = ({dx1[k]:.6g}, {dx2[k]:.6g})"))
            rot_status = CheckStatus.FAIL
        if strict_rotation_ok and np.any(lin_angular <= pert_angular):
            strict_rotation_ok = False

    if not strict_rotation_ok:
        notes.append("one-sided rotation comparison <A x, Sx> > <pert, Sx> fails "
                     "(linear angular term is negative for clockwise rotation); "
                     "status reflects the absolute-value form")

    if lyap_status is CheckStatus.FAIL:
        # candidate V failed somewhere; see whether the radial perturbation
        # form still confines, in which case the candidate is just unsuitable
        radial_ok = True
        ratio_ok = True
        inner_circle = slice(n_ann, n_ann + n_circ)
        outer_circle = slice(n_ann + 2 * n_circ, n_ann + 3 * n_circ)
        for q in Quadrant:
            rad = eval_terms(_radial_inner_terms(sys.perturbation(q)), ox1, ox2, lam)
            rad = np.asarray(rad + 0.0 * ox1)
            if np.any(rad >= 0.0):
                radial_ok = False
                break
            ratio = r2_out / np.abs(rad)
            if np.any(ratio[outer_circle] >= ratio[inner_circle]):
                ratio_ok = False
                break
        if radial_ok and ratio_ok:
            lyap_status = CheckStatus.NOT_APPLICABLE
            notes.append("candidate V(x) = |x|^2 fails but the radial perturbation "
                         "form <x, pert> < 0 with growing magnitude holds on samples")

    d0 = delta(p, 0.0)
    dp0 = delta_prime(p, 0.0)
    delta_ok = abs(d0 - 1.0) <= 1e-9 and dp0 > 0.0

    return GlobalCheckReport(lyapunov_ok=lyap_status,
                             lyapunov_witness=lyap_witness,
                             rotation_ok=rot_status,
                             rotation_witness=rot_witness,
                             delta_conditions_ok=delta_ok,
                             samples_used=samples_used,
                             radius_M=radius_M,
                             rotation_pert_inner_max=pert_inner_max,
                             notes=tuple(notes))
