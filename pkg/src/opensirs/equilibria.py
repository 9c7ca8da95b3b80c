"""Rest points of the planar system: location, classification, certificates.

The planar field is a pair of conics, so by Bezout there are at most four
rest points in the plane (when the conics share no component).  They are
located by eliminating i between the two equations.  Writing the field as::

    s' = P(s, i) = p1(s)*i + p0(s)          (linear in i)
    i' = Q(s, i) = q2*i**2 + q1(s)*i + q0(s)

with::

    p0(s) = (b + gamma) + (eps2 - b - beta - gamma)*s - eps2*s**2
    p1(s) = -gamma + (eps1 - eps2 - lam)*s
    q0(s) = beta1*s
    q1(s) = (eps2 - eps1 - alpha - b) + (lam - eps2)*s
    q2    = eps1 - eps2

the resultant of P and Q with respect to i is::

    R(s) = q2*p0(s)**2 - q1(s)*p1(s)*p0(s) + q0(s)*p1(s)**2

a univariate polynomial of degree <= 4.  Real roots of R (via companion
matrix eigenvalues) are back-substituted to candidate i values, every
candidate is polished by a damped Newton iteration on the full 2-d system,
and the survivors are deduplicated.  When q2 = 0 or p1 vanishes at a root
the formula can introduce spurious factors; these die in the residual check
after polishing, so no case split is needed.

Each rest point is classified from the analytic Jacobian::

    d s'/d s = (eps2 - b - beta - gamma) - 2*eps2*s + (eps1 - eps2 - lam)*i
    d s'/d i = -gamma + (eps1 - eps2 - lam)*s
    d i'/d s = beta1 + (lam - eps2)*i
    d i'/d i = (eps2 - eps1 - alpha - b) + (lam - eps2)*s + 2*(eps1 - eps2)*i

using trace/determinant: saddle when det < 0, sink/source by the sign of the
real parts when det > 0, degenerate when |det| <= 1e-12 or the largest real
part sits within 1e-9 of zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import NearDegenerateWarning, RestPointCountError, SpecialCaseError
from .model import ModelParams, PlanarState, planar_rhs

__all__ = [
    "SINK",
    "SADDLE",
    "SOURCE",
    "DEGENERATE",
    "SPECIAL_ORIGIN_ONLY",
    "SPECIAL_BISTABLE",
    "SPECIAL_OTHER",
    "TOL_HYP",
    "TOL_DEG",
    "RESIDUAL_TOL",
    "DEDUPE_TOL",
    "RestPoint",
    "SpecialCaseReport",
    "jacobian",
    "eigenvalues_2x2",
    "classify",
    "find_rest_points",
    "trace_identity_check",
    "special_case_report",
    "degeneracy_scan",
]

SINK = "sink"
SADDLE = "saddle"
SOURCE = "source"
DEGENERATE = "degenerate"

SPECIAL_ORIGIN_ONLY = "OriginOnly"
SPECIAL_BISTABLE = "TwoBoundarySinksPlusSaddle"
SPECIAL_OTHER = "Other"

# Hyperbolicity margin on eigenvalue real parts.
TOL_HYP = 1e-9
# Degeneracy threshold on |det J|.
TOL_DEG = 1e-12
# Required max-norm residual of the planar field at an accepted rest point.
RESIDUAL_TOL = 1e-10
# Two candidates within this max-norm distance are the same rest point
# (relative to the larger coordinate magnitude: double precision cannot
# separate zeros of a quadratic field any finer at large |s|, |i|).
DEDUPE_TOL = 1e-8
# Distinct roots closer than this trigger an ill-conditioning warning.
ILL_COND_TOL = 1e-6


@dataclass(frozen=True)
class RestPoint:
    """A located and classified rest point of the planar system.

    Attributes:
        s, i: coordinates.
        jacobian: 2x2 analytic Jacobian at the point.
        eigenvalues: the two eigenvalues (complex, possibly with zero
            imaginary part), ordered by real part.
        classification: one of SINK, SADDLE, SOURCE, DEGENERATE.
        local_index: +1 for sink/source, -1 for saddle, None if degenerate.
        residual: max-norm of the planar field at (s, i); < 1e-10 for points
            produced by ``find_rest_points``.
    """

    s: float
    i: float
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    classification: str
    local_index: int | None
    residual: float

    @property
    def location(self) -> PlanarState:
        return PlanarState(self.s, self.i)

    @property
    def det(self) -> float:
        J = self.jacobian
        return float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])

    @property
    def trace(self) -> float:
        return float(self.jacobian[0, 0] + self.jacobian[1, 1])

    def distance(self, other: "RestPoint") -> float:
        return max(abs(self.s - other.s), abs(self.i - other.i))

    def is_interior(self, tol: float = 1e-9) -> bool:
        return self.s > tol and self.i > tol and self.s + self.i < 1.0 - tol


@dataclass(frozen=True)
class SpecialCaseReport:
    """Thresholds and boundary rest points of the b = beta1 = gamma = 0 case.

    The four threshold quantities::

        T0 = eps2 - beta
        T1 = eps2 - eps1 - alpha
        T2 = T0 + (eps1 - eps2 - lam)*T1/(eps2 - eps1)
        T3 = T1 - (eps2 - lam)*T0/eps2

    control the boundary rest points: the origin has linearization
    diag(T0, T1); (0, 1 - alpha/(eps2 - eps1)) has eigenvalues (-T1, T2) and
    lies in D1 iff T1 >= 0; (1 - beta/eps2, 0) has eigenvalues (-T0, T3) and
    lies in D1 iff T0 >= 0.
    """

    T0: float
    T1: float
    T2: float
    T3: float
    origin: PlanarState
    axis_i_point: PlanarState
    axis_s_point: PlanarState
    axis_i_in_region: bool
    axis_s_in_region: bool
    regime_label: str


def jacobian(p: ModelParams, x) -> np.ndarray:
    """Analytic Jacobian of the planar field at a point (s, i)."""
    if hasattr(x, "as_array"):
        arr = x.as_array()
    else:
        arr = np.asarray(x, dtype=float)
    s, i = float(arr[0]), float(arr[1])
    a11 = (p.eps2 - p.b - p.beta - p.gamma) - 2.0 * p.eps2 * s + (p.eps1 - p.eps2 - p.lam) * i
    a12 = -p.gamma + (p.eps1 - p.eps2 - p.lam) * s
    a21 = p.beta1 + (p.lam - p.eps2) * i
    a22 = (p.eps2 - p.eps1 - p.alpha - p.b) + (p.lam - p.eps2) * s + 2.0 * (p.eps1 - p.eps2) * i
    return np.array([[a11, a12], [a21, a22]], dtype=float)


def eigenvalues_2x2(J: np.ndarray) -> tuple[complex, complex]:
    """Eigenvalues of a real 2x2 matrix from trace and determinant.

    Returned ordered by real part (then imaginary part).
    """
    tr = float(J[0, 0] + J[1, 1])
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        root = np.sqrt(disc)
        lam1 = complex(0.5 * (tr - root), 0.0)
        lam2 = complex(0.5 * (tr + root), 0.0)
    else:
        root = np.sqrt(-disc)
        lam1 = complex(0.5 * tr, -0.5 * root)
        lam2 = complex(0.5 * tr, 0.5 * root)
    return (lam1, lam2)


def classify(p: ModelParams, x, tol_hyp: float = TOL_HYP, tol_deg: float = TOL_DEG) -> RestPoint:
    """Build a classified RestPoint at a location already known to be a zero.

    Args:
        p: model parameters.
        x: the candidate location; the planar field there must have max-norm
            residual below 1e-8.
        tol_hyp: margin on eigenvalue real parts below which the point is
            treated as non-hyperbolic.
        tol_deg: threshold on |det J| below which the point is degenerate.

    Raises:
        ValueError: if the residual at x exceeds 1e-8 (not a rest point).
    """
    if hasattr(x, "as_array"):
        arr = x.as_array()
    else:
        arr = np.asarray(x, dtype=float)
    # + 0.0 normalizes IEEE -0.0 coordinates coming out of the root finder.
    s, i = float(arr[0]) + 0.0, float(arr[1]) + 0.0
    res = float(np.max(np.abs(planar_rhs(p, (s, i)))))
    if res > 1e-8:
        raise ValueError(f"field residual {res:.3e} at ({s}, {i}) exceeds 1e-8; not a rest point")

    J = jacobian(p, (s, i))
    eig = eigenvalues_2x2(J)
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    re_lo = eig[0].real
    re_hi = eig[1].real

    if abs(det) <= tol_deg:
        label: str = DEGENERATE
    elif det < 0.0:
        label = SADDLE
    elif re_hi < -tol_hyp:
        label = SINK
    elif re_lo > tol_hyp:
        label = SOURCE
    else:
        # det > 0 but a real part sits inside the hyperbolicity margin.
        label = DEGENERATE

    index = {SINK: 1, SOURCE: 1, SADDLE: -1}.get(label)
    return RestPoint(
        s=s,
        i=i,
        jacobian=J,
        eigenvalues=eig,
        classification=label,
        local_index=index,
        residual=res,
    )


def _resultant_coeffs(p: ModelParams) -> np.ndarray:
    """Ascending coefficients of the degree <= 4 eliminant in s."""
    p0 = np.array([p.b + p.gamma, p.eps2 - p.b - p.beta - p.gamma, -p.eps2])
    p1 = np.array([-p.gamma, p.eps1 - p.eps2 - p.lam])
    q0 = np.array([0.0, p.beta1])
    q1 = np.array([p.eps2 - p.eps1 - p.alpha - p.b, p.lam - p.eps2])
    q2 = np.array([p.eps1 - p.eps2])
    r = npoly.polymul(q2, npoly.polymul(p0, p0))
    r = npoly.polysub(r, npoly.polymul(q1, npoly.polymul(p1, p0)))
    r = npoly.polyadd(r, npoly.polymul(q0, npoly.polymul(p1, p1)))
    return r


def _real_roots(coeffs: np.ndarray) -> np.ndarray:
    """Real roots of a polynomial given ascending coefficients.

    Uses companion-matrix eigenvalues; near-real complex roots (relative
    imaginary part below 1e-7) are projected onto the real axis so that the
    Newton polish can decide their fate.
    """
    c = np.asarray(coeffs, dtype=float)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        raise RestPointCountError(
            "eliminant is identically zero: the two conics share a component"
        )
    c = c / scale
    # Trim trailing (high-order) coefficients that are pure rounding noise.
    keep = np.nonzero(np.abs(c) > 1e-13)[0]
    c = c[: keep[-1] + 1]
    if c.size <= 1:
        return np.array([])
    roots = np.roots(c[::-1])
    real = roots[np.abs(roots.imag) <= 1e-7 * np.maximum(1.0, np.abs(roots))]
    return np.unique(real.real)


def _candidate_i(p: ModelParams, s: float) -> list[float]:
    """Candidate i values over a fixed s from each conic separately."""
    cands: list[float] = []
    p1 = -p.gamma + (p.eps1 - p.eps2 - p.lam) * s
    p0 = (p.b + p.gamma) + (p.eps2 - p.b - p.beta - p.gamma) * s - p.eps2 * s * s
    if abs(p1) > 1e-12:
        cands.append(-p0 / p1)
    q2 = p.eps1 - p.eps2
    q1 = (p.eps2 - p.eps1 - p.alpha - p.b) + (p.lam - p.eps2) * s
    q0 = p.beta1 * s
    if abs(q2) > 1e-12:
        disc = q1 * q1 - 4.0 * q2 * q0
        if disc >= 0.0:
            root = np.sqrt(disc)
            cands.append((-q1 - root) / (2.0 * q2))
            cands.append((-q1 + root) / (2.0 * q2))
    elif abs(q1) > 1e-12:
        cands.append(-q0 / q1)
    else:
        cands.append(0.0)
    return cands


_NEWTON_MAX_ITER = 50
_NEWTON_MAX_DRIFT = 1e-2


def _newton_polish(p: ModelParams, s0: float, i0: float) -> tuple[float, float, float] | None:
    """Damped Newton iteration on the planar field from (s0, i0).

    Returns (s, i, residual) on convergence to max-norm residual < 1e-10
    without drifting more than 1e-2 from the seed, else None.
    """
    x = np.array([s0, i0], dtype=float)
    seed = x.copy()
    f = planar_rhs(p, x)
    res = float(np.max(np.abs(f)))
    for _ in range(_NEWTON_MAX_ITER):
        if res < RESIDUAL_TOL:
            break
        J = jacobian(p, x)
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if abs(det) < 1e-300:
            return None
        step = np.linalg.solve(J, f)
        lam = 1.0
        for _ in range(30):
            trial = x - lam * step
            f_trial = planar_rhs(p, trial)
            res_trial = float(np.max(np.abs(f_trial)))
            if res_trial < res:
                x, f, res = trial, f_trial, res_trial
                break
            lam *= 0.5
        else:
            return None
        if float(np.max(np.abs(x - seed))) > _NEWTON_MAX_DRIFT:
            return None
    if res >= RESIDUAL_TOL:
        return None
    return float(x[0]), float(x[1]), res


def find_rest_points(p: ModelParams, region: str = "D1") -> list[RestPoint]:
    """Locate and classify all rest points, in the plane or restricted to D1.

    Args:
        p: model parameters.
        region: "D1" keeps points of the closed triangle (membership within
            1e-9); "plane" returns every rest point found.

    Returns:
        Classified rest points sorted by (s, i).  At most four; more after
        deduplication indicates broken numerics and raises.

    Raises:
        RestPointCountError: if the eliminant degenerates or more than four
            distinct zeros survive.

    Warns:
        NearDegenerateWarning: when two accepted rest points lie within 1e-6
            of each other (ill-conditioned, close to a fold).
    """
    if region not in ("D1", "plane"):
        raise ValueError(f"region must be 'D1' or 'plane', got {region!r}")

    coeffs = _resultant_coeffs(p)
    roots = _real_roots(coeffs)

    accepted: list[tuple[float, float, float]] = []
    for s_root in roots:
        for i_cand in _candidate_i(p, float(s_root)):
            if not np.isfinite(i_cand):
                continue
            polished = _newton_polish(p, float(s_root), float(i_cand))
            if polished is None:
                continue
            s, i, res = polished
            for k, (sa, ia, ra) in enumerate(accepted):
                tol = DEDUPE_TOL * max(1.0, abs(s), abs(i), abs(sa), abs(ia))
                if max(abs(s - sa), abs(i - ia)) <= tol:
                    if res < ra:
                        accepted[k] = (s, i, res)
                    break
            else:
                accepted.append((s, i, res))

    if len(accepted) > 4:
        raise RestPointCountError(
            f"found {len(accepted)} distinct rest points; a pair of conics admits at most 4"
        )

    for a in range(len(accepted)):
        for c in range(a + 1, len(accepted)):
            gap = max(abs(accepted[a][0] - accepted[c][0]), abs(accepted[a][1] - accepted[c][1]))
            if gap < ILL_COND_TOL:
                warnings.warn(
                    f"rest points within {gap:.2e} of each other; locations are ill-conditioned",
                    NearDegenerateWarning,
                    stacklevel=2,
                )

    points = [classify(p, (s, i)) for s, i, _ in accepted]
    if region == "D1":
        points = [rp for rp in points if rp.location.in_region()]
    points.sort(key=lambda rp: (rp.s, rp.i))
    return points


def trace_identity_check(p: ModelParams, rp: RestPoint) -> float:
    """Residual of the closed-form trace identity at an interior rest point.

    At a rest point with s*, i* > 0 the Jacobian trace collapses to::

        -(b + gamma*(1 - i*))/s* - eps2*s* - beta1*s*/i* + (eps1 - eps2)*i*

    by substituting the two equilibrium relations.  Returns the absolute
    difference between this expression and trace(J); the suite requires
    < 1e-8 at interior rest points.

    Raises:
        ValueError: if the point has s* or i* too close to zero (the closed
            form divides by both).
    """
    if rp.s <= 1e-9 or rp.i <= 1e-9:
        raise ValueError("trace identity needs an interior rest point with s, i > 0")
    closed = (
        -(p.b + p.gamma * (1.0 - rp.i)) / rp.s
        - p.eps2 * rp.s
        - p.beta1 * rp.s / rp.i
        + (p.eps1 - p.eps2) * rp.i
    )
    return abs(closed - rp.trace)


def special_case_report(p: ModelParams) -> SpecialCaseReport:
    """Threshold analysis of the invariant-axes case b = beta1 = gamma = 0.

    Args:
        p: parameters with b = beta1 = gamma = 0 exactly, eps2 != eps1 and
            eps2 != 0 (the axis rest points divide by these differences).

    Returns:
        SpecialCaseReport with thresholds T0..T3, the three axis rest points
        with D1-membership flags, and a regime label:
        ``origin-only`` when T0 < 0 and T1 < 0, ``two-boundary-sinks-plus-
        saddle`` when T0 > 0, T1 > 0, T2 < 0, T3 < 0, else ``other``.

    Raises:
        SpecialCaseError: when the preconditions fail.
    """
    if not p.is_special_case:
        raise SpecialCaseError("requires b = beta1 = gamma = 0 exactly")
    if p.eps2 == p.eps1:
        raise SpecialCaseError("requires eps2 != eps1 (axis point divides by the difference)")
    if p.eps2 == 0.0:
        raise SpecialCaseError("requires eps2 != 0")

    T0 = p.eps2 - p.beta
    T1 = p.eps2 - p.eps1 - p.alpha
    T2 = T0 + (p.eps1 - p.eps2 - p.lam) * T1 / (p.eps2 - p.eps1)
    T3 = T1 - (p.eps2 - p.lam) * T0 / p.eps2

    axis_i = PlanarState(0.0, 1.0 - p.alpha / (p.eps2 - p.eps1))
    axis_s = PlanarState(1.0 - p.beta / p.eps2, 0.0)

    if T0 < 0.0 and T1 < 0.0:
        label = SPECIAL_ORIGIN_ONLY
    elif T0 > 0.0 and T1 > 0.0 and T2 < 0.0 and T3 < 0.0:
        label = SPECIAL_BISTABLE
    else:
        label = SPECIAL_OTHER

    return SpecialCaseReport(
        T0=T0,
        T1=T1,
        T2=T2,
        T3=T3,
        origin=PlanarState(0.0, 0.0),
        axis_i_point=axis_i,
        axis_s_point=axis_s,
        axis_i_in_region=T1 >= 0.0,
        axis_s_in_region=T0 >= 0.0,
        regime_label=label,
    )


def degeneracy_scan(p: ModelParams, tol: float = TOL_DEG, region: str = "D1") -> list[RestPoint]:
    """Rest points whose Jacobian determinant is within tol of zero.

    The default tol is the classification threshold 1e-12; fold searches by
    parameter bisection cannot drive |det| that low in float64 (|det| scales
    like the square root of the parameter offset), so they should pass an
    explicit looser tolerance.
    """
    return [rp for rp in find_rest_points(p, region=region) if abs(rp.det) <= tol]
