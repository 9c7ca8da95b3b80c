"""Poincare index of Jordan curves by adaptive winding-number computation.

A curve is a cyclic list of smooth parametric segments (line segments and
circular arcs) with stored external angles at the junctions.  The index of a
curve with respect to the planar field is the total rotation of the field
along the curve divided by 2*pi.  Because each angle increment between two
consecutive samples is measured exactly by atan2 of the cross and dot
products of the field vectors, the accumulated sum telescopes to the exact
rotation as soon as no single step hides a rotation of pi or more; adaptive
bisection of any step larger than pi/4 makes that assumption safe in
practice, and the integer residual is reported so the caller can verify it.

The constructors in this module build the curves used by the analysis:

* ``curve_triangle``    -- boundary of D1, optionally inset.
* ``curve_origin_enclosed`` -- boundary of D1 with the corner at the origin
  replaced by a circular arc bulging outward, so the origin (a rest point of
  the special case) is strictly enclosed.
* ``curve_origin_excised`` -- boundary of D1 union two disks around the axis
  rest points, minus a disk around the origin, for the bistable special
  case: the two boundary sinks are enclosed, the origin source is excluded.
* ``circle_curve``      -- a circle, for local indices.

For a curve on which the field is inward or tangent and never zero, the
index is 1 (the standard inward-field lemma); the test-suite exercises this
as a property wherever the hypothesis holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from math import atan2, cos, pi, sin, sqrt

import numpy as np

from .equilibria import RestPoint, find_rest_points, special_case_report, SPECIAL_BISTABLE
from .errors import (
    CurveConstructionError,
    FieldVanishesOnCurve,
    NoConvergence,
    SpecialCaseError,
)
from .model import ModelParams, PlanarState, planar_field

__all__ = [
    "LineSegment",
    "ArcSegment",
    "JordanCurve",
    "IndexReport",
    "CurveInwardnessReport",
    "winding_index",
    "inwardness_on_curve",
    "curve_triangle",
    "curve_origin_enclosed",
    "curve_origin_excised",
    "circle_curve",
    "local_index",
    "auto_excision_radii",
]

# Field magnitude below which the curve counts as passing through a zero.
VANISH_TOL = 1e-8
# Largest admissible field rotation between adjacent samples.
MAX_STEP_ANGLE = pi / 4
# Total sample budget across all segments of one curve.
SAMPLE_BUDGET = 2**20
# Accepted |winding - nearest integer| residual.
RESIDUAL_LIMIT = 0.01


@dataclass(frozen=True)
class LineSegment:
    """Straight segment from a to b, parametrized over t in [0, 1]."""

    a: tuple[float, float]
    b: tuple[float, float]

    def points(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)[..., None]
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        return a + t * (b - a)

    def tangent(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        d = np.asarray(self.b, dtype=float) - np.asarray(self.a, dtype=float)
        return np.broadcast_to(d, t.shape + (2,)).copy()

    @property
    def length(self) -> float:
        return float(np.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1]))


@dataclass(frozen=True)
class ArcSegment:
    """Circular arc, angle interpolated from theta0 to theta1.

    theta1 < theta0 traverses the arc clockwise; the tangent follows the
    direction of travel.
    """

    center: tuple[float, float]
    radius: float
    theta0: float
    theta1: float

    def _theta(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.theta0 + t * (self.theta1 - self.theta0)

    def points(self, t: np.ndarray) -> np.ndarray:
        th = self._theta(t)
        c = np.asarray(self.center, dtype=float)
        return c + self.radius * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def tangent(self, t: np.ndarray) -> np.ndarray:
        th = self._theta(t)
        sign = 1.0 if self.theta1 >= self.theta0 else -1.0
        return sign * np.stack([-np.sin(th), np.cos(th)], axis=-1)

    @property
    def length(self) -> float:
        return float(self.radius * abs(self.theta1 - self.theta0))


Segment = LineSegment | ArcSegment


def _angle_of(v: np.ndarray) -> float:
    return atan2(float(v[1]), float(v[0]))


def _wrap_angle(a: float) -> float:
    while a > pi:
        a -= 2.0 * pi
    while a <= -pi:
        a += 2.0 * pi
    return a


@dataclass(frozen=True)
class JordanCurve:
    """Piecewise-smooth simple closed curve with junction turning angles.

    ``external_angles[k]`` is the turning angle from the tangent at the end
    of ``segments[k]`` to the tangent at the start of the cyclically next
    segment, each in (-pi, pi).  Validation checks closure of every junction
    within 1e-12, consistency of the stored angles within 1e-9, and
    simplicity on a sampled polyline; ``orientation`` is derived from the
    signed area and is "ccw" for every constructor in this module.
    """

    segments: tuple[Segment, ...]
    external_angles: tuple[float, ...]
    orientation: str = dataclass_field(init=False, default="ccw")

    def __post_init__(self) -> None:
        if len(self.segments) == 0:
            raise CurveConstructionError("curve needs at least one segment")
        if len(self.segments) != len(self.external_angles):
            raise CurveConstructionError("need one external angle per junction")
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "external_angles", tuple(float(a) for a in self.external_angles))
        self._check_closure_and_angles()
        area = self._signed_area()
        object.__setattr__(self, "orientation", "ccw" if area > 0.0 else "cw")
        self._check_simple()

    def _check_closure_and_angles(self) -> None:
        n = len(self.segments)
        one = np.array([1.0])
        zero = np.array([0.0])
        for k, seg in enumerate(self.segments):
            nxt = self.segments[(k + 1) % n]
            end = seg.points(one)[0]
            start = nxt.points(zero)[0]
            gap = float(np.max(np.abs(end - start)))
            if gap > 1e-12:
                raise CurveConstructionError(
                    f"segments {k} and {(k + 1) % n} fail to join: gap {gap:.2e}"
                )
            t_out = seg.tangent(one)[0]
            t_in = nxt.tangent(zero)[0]
            turn = _wrap_angle(_angle_of(t_in) - _angle_of(t_out))
            stored = self.external_angles[k]
            if abs(stored) >= pi:
                raise CurveConstructionError(f"external angle {stored} outside (-pi, pi)")
            if abs(_wrap_angle(turn - stored)) > 1e-9:
                raise CurveConstructionError(
                    f"stored external angle {stored:.12f} at junction {k} "
                    f"disagrees with tangents ({turn:.12f})"
                )

    def _signed_area(self) -> float:
        poly = self.polyline(1024)
        x, y = poly[:, 0], poly[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def _check_simple(self, n: int = 512) -> None:
        poly = self.polyline(n)
        m = poly.shape[0]
        p1 = poly
        p2 = np.roll(poly, -1, axis=0)
        ii, jj = np.triu_indices(m, k=2)
        wrap = (ii == 0) & (jj == m - 1)
        ii, jj = ii[~wrap], jj[~wrap]

        a, b = p1[ii], p2[ii]
        c, d = p1[jj], p2[jj]

        def cross(u, v):
            return u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]

        d1 = cross(b - a, c - a)
        d2 = cross(b - a, d - a)
        d3 = cross(d - c, a - c)
        d4 = cross(d - c, b - c)
        crossing = (d1 * d2 < 0.0) & (d3 * d4 < 0.0)
        if bool(np.any(crossing)):
            k = int(np.argmax(crossing))
            raise CurveConstructionError(
                f"curve self-intersects near {poly[ii[k]]} / {poly[jj[k]]}"
            )

    @property
    def total_length(self) -> float:
        return sum(seg.length for seg in self.segments)

    def polyline(self, n: int = 4096) -> np.ndarray:
        """Closed polyline sampling, first point not repeated at the end."""
        total = self.total_length
        chunks = []
        for seg in self.segments:
            k = max(2, int(round(n * seg.length / total)))
            ts = np.linspace(0.0, 1.0, k, endpoint=False)
            chunks.append(seg.points(ts))
        return np.concatenate(chunks, axis=0)

    def contains(self, point) -> bool:
        """Even-odd point-in-curve test on a dense polyline."""
        poly = self.polyline(4096)
        px, py = float(point[0]), float(point[1])
        x1, y1 = poly[:, 0], poly[:, 1]
        x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
        straddle = (y1 > py) != (y2 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        hits = straddle & (x_at > px)
        return bool(np.count_nonzero(hits) % 2 == 1)


@dataclass(frozen=True)
class IndexReport:
    """Winding-number result, with optional enclosed rest-point counting.

    ``balance_ok`` states whether mu_plus - mu_minus equals the curve index;
    it is None when counting was not requested or an enclosed point is
    degenerate (no local index to count).
    """

    curve_index: int
    winding: float
    angle_residual: float
    n_samples: int
    min_speed: float
    mu_plus: int | None = None
    mu_minus: int | None = None
    n_degenerate_enclosed: int = 0
    balance_ok: bool | None = None


@dataclass(frozen=True)
class CurveInwardnessReport:
    """Minimum inward-normal field component over smooth curve samples.

    ``ok`` allows tangency: the minimum may be as low as -1e-10.
    """

    ok: bool
    min_dot: float
    worst_point: PlanarState
    worst_segment: int


def winding_index(
    field,
    curve: JordanCurve,
    rest_points: tuple[RestPoint, ...] | list[RestPoint] | None = None,
    max_samples: int = SAMPLE_BUDGET,
) -> IndexReport:
    """Poincare index of a curve by adaptive field-rotation summation.

    Args:
        field: vectorized callable mapping (n, 2) points to (n, 2) vectors.
        curve: the closed curve to integrate around.
        rest_points: optional classified rest points; when given, the ones
            enclosed by the curve are counted into mu_plus / mu_minus and
            checked against the index.
        max_samples: total sample budget across all segments.

    Returns:
        IndexReport.  The integer index is the rounded total rotation over
        2*pi; the residual is required to be below 0.01.

    Raises:
        FieldVanishesOnCurve: a sampled |field| fell to 1e-8 or below.
        NoConvergence: refinement would exceed the sample budget, or the
            residual stayed above 0.01.
    """
    total_angle = 0.0
    n_samples = 0
    min_speed = float("inf")

    for seg in curve.segments:
        ts = np.linspace(0.0, 1.0, 65)
        for _ in range(64):
            pts = seg.points(ts)
            vec = field(pts)
            speed = np.hypot(vec[:, 0], vec[:, 1])
            k = int(np.argmin(speed))
            min_speed = min(min_speed, float(speed[k]))
            if speed[k] <= VANISH_TOL:
                raise FieldVanishesOnCurve(
                    f"|field| = {speed[k]:.3e} at {pts[k]} on the curve"
                )
            cross = vec[:-1, 0] * vec[1:, 1] - vec[:-1, 1] * vec[1:, 0]
            dot = vec[:-1, 0] * vec[1:, 0] + vec[:-1, 1] * vec[1:, 1]
            dth = np.arctan2(cross, dot)
            bad = np.abs(dth) > MAX_STEP_ANGLE
            if not bool(np.any(bad)):
                total_angle += float(np.sum(dth))
                n_samples += ts.size
                break
            if n_samples + ts.size + int(np.count_nonzero(bad)) > max_samples:
                raise NoConvergence(
                    f"winding refinement exceeded the {max_samples}-sample budget"
                )
            mids = 0.5 * (ts[:-1][bad] + ts[1:][bad])
            ts = np.sort(np.concatenate([ts, mids]))
        else:
            raise NoConvergence("winding refinement failed to settle in 64 passes")

    w = total_angle / (2.0 * pi)
    index = int(round(w))
    residual = abs(w - index)
    if residual > RESIDUAL_LIMIT:
        raise NoConvergence(f"winding {w:.6f} is not within {RESIDUAL_LIMIT} of an integer")

    mu_plus: int | None = None
    mu_minus: int | None = None
    n_deg = 0
    balance: bool | None = None
    if rest_points is not None:
        mu_plus = 0
        mu_minus = 0
        for rp in rest_points:
            if not curve.contains((rp.s, rp.i)):
                continue
            if rp.local_index == 1:
                mu_plus += 1
            elif rp.local_index == -1:
                mu_minus += 1
            else:
                n_deg += 1
        balance = None if n_deg else (mu_plus - mu_minus == index)

    return IndexReport(
        curve_index=index,
        winding=w,
        angle_residual=residual,
        n_samples=n_samples,
        min_speed=min_speed,
        mu_plus=mu_plus,
        mu_minus=mu_minus,
        n_degenerate_enclosed=n_deg,
        balance_ok=balance,
    )


def inwardness_on_curve(field, curve: JordanCurve, samples: int = 1024) -> CurveInwardnessReport:
    """Check N . X >= -1e-10 at smooth samples, N the inward (left) normal.

    Samples midpoints of a uniform subdivision of each segment, never the
    junctions.  For a positively oriented curve the interior lies to the
    left of travel, so the inward normal is the tangent rotated by +pi/2.
    A reversed (clockwise) curve fails because every normal flips.
    """
    total = curve.total_length
    min_dot = float("inf")
    worst_point = PlanarState(0.0, 0.0)
    worst_seg = -1
    for si, seg in enumerate(curve.segments):
        k = max(8, int(round(samples * seg.length / total)))
        ts = (np.arange(k) + 0.5) / k
        pts = seg.points(ts)
        tan = seg.tangent(ts)
        norm = np.hypot(tan[:, 0], tan[:, 1])
        nx, ny = -tan[:, 1] / norm, tan[:, 0] / norm
        vec = field(pts)
        dots = nx * vec[:, 0] + ny * vec[:, 1]
        j = int(np.argmin(dots))
        if dots[j] < min_dot:
            min_dot = float(dots[j])
            worst_point = PlanarState(pts[j, 0], pts[j, 1])
            worst_seg = si
    return CurveInwardnessReport(
        ok=min_dot >= -1e-10,
        min_dot=min_dot,
        worst_point=worst_point,
        worst_segment=worst_seg,
    )


def curve_triangle(inset: float = 0.0) -> JordanCurve:
    """Boundary of D1, shrunk inward by ``inset`` along every edge normal.

    inset = 0 gives the exact triangle with vertices (0,0), (1,0), (0,1).
    The three edges shift inward by the inset distance and the new vertices
    are the pairwise intersections of the shifted edge lines.
    """
    if not (0.0 <= inset < 0.1):
        raise CurveConstructionError(f"inset must lie in [0, 0.1), got {inset}")
    c = 1.0 - (1.0 + sqrt(2.0)) * inset
    a = (inset, inset)          # right-angle corner
    b = (c, inset)              # bottom-right
    d = (inset, c)              # top-left
    segments = (
        LineSegment(a, b),
        LineSegment(b, d),
        LineSegment(d, a),
    )
    return JordanCurve(segments, (3.0 * pi / 4.0, 3.0 * pi / 4.0, pi / 2.0))


def circle_curve(center, radius: float) -> JordanCurve:
    """Counterclockwise circle as a single-arc Jordan curve."""
    if radius <= 0.0:
        raise CurveConstructionError(f"radius must be positive, got {radius}")
    cx, cy = float(center[0]), float(center[1])
    return JordanCurve((ArcSegment((cx, cy), float(radius), 0.0, 2.0 * pi),), (0.0,))


def curve_origin_enclosed(p: ModelParams, disk_radius: float = 0.05) -> JordanCurve:
    """Boundary of D1 with the origin corner replaced by an outward arc.

    Built for the special case b = beta1 = gamma = 0, where the origin is a
    rest point: the arc of radius ``disk_radius`` centered at the origin
    bulges outside D1 (through negative coordinates), so the origin ends up
    strictly inside the curve while the rest of the boundary of D1 is kept.

    Raises:
        SpecialCaseError: parameters are not the special case.
        CurveConstructionError: bad radius, or another rest point of the
            plane lies inside the added disk.
    """
    if not p.is_special_case:
        raise SpecialCaseError("origin-enclosing curve needs b = beta1 = gamma = 0")
    if not (0.0 < disk_radius < 0.1):
        raise CurveConstructionError(f"disk_radius must lie in (0, 0.1), got {disk_radius}")
    for rp in find_rest_points(p, region="plane"):
        dist = np.hypot(rp.s, rp.i)
        if dist > 1e-9 and dist <= disk_radius:
            raise CurveConstructionError(
                f"rest point ({rp.s:.4g}, {rp.i:.4g}) lies inside the origin disk"
            )
    r = float(disk_radius)
    segments = (
        LineSegment((r, 0.0), (1.0, 0.0)),
        LineSegment((1.0, 0.0), (0.0, 1.0)),
        LineSegment((0.0, 1.0), (0.0, r)),
        ArcSegment((0.0, 0.0), r, pi / 2.0, 2.0 * pi),
    )
    angles = (3.0 * pi / 4.0, 3.0 * pi / 4.0, -pi / 2.0, -pi / 2.0)
    return JordanCurve(segments, angles)


def auto_excision_radii(p: ModelParams, cap: float = 0.05) -> tuple[float, float, float]:
    """Safe disk radii for ``curve_origin_excised`` on a bistable instance.

    Shrinks the cap until every disk keeps clear of the neighboring arcs,
    the far corners, and the interior rest points (factor-2 separation).
    """
    rep = special_case_report(p)
    s_p = rep.axis_s_point.s
    i_p = rep.axis_i_point.i
    interior = [rp for rp in find_rest_points(p, region="D1") if rp.is_interior()]
    limits = [cap, s_p / 3.0, i_p / 3.0, (1.0 - s_p) / 2.0, (1.0 - i_p) / 2.0]
    for rp in interior:
        for cx, cy in ((0.0, 0.0), (0.0, i_p), (s_p, 0.0)):
            limits.append(np.hypot(rp.s - cx, rp.i - cy) / 2.5)
    r = float(min(limits))
    if r <= 0.0:
        raise CurveConstructionError("no positive radius separates the three disks")
    return (r, r, r)


def curve_origin_excised(
    p: ModelParams, radii: tuple[float, float, float] | None = None
) -> JordanCurve:
    """Boundary of (D1 plus two axis disks) minus an origin disk.

    For the bistable special case: the disks at (0, 1 - alpha/(eps2 - eps1))
    and (1 - beta/eps2, 0) bulge outward so both boundary sinks are enclosed,
    while the disk at the origin is removed so the source there is excluded.
    The resulting Jordan curve encloses exactly the two sinks and the
    interior saddle.

    Args:
        p: special-case parameters with regime two-boundary-sinks-plus-saddle.
        radii: (origin, axis-i, axis-s) disk radii; default via
            ``auto_excision_radii``.

    Raises:
        SpecialCaseError: not the special case, or not the bistable regime.
        CurveConstructionError: arcs overlap, reach a far corner, or crowd an
            interior rest point.
    """
    rep = special_case_report(p)
    if rep.regime_label != SPECIAL_BISTABLE:
        raise SpecialCaseError(
            f"excised curve needs the bistable special regime, got {rep.regime_label!r}"
        )
    if radii is None:
        radii = auto_excision_radii(p)
    r1, r2, r3 = (float(r) for r in radii)
    if min(r1, r2, r3) <= 0.0:
        raise CurveConstructionError(f"radii must be positive, got {radii}")
    s_p = rep.axis_s_point.s
    i_p = rep.axis_i_point.i
    if r1 + r3 >= s_p:
        raise CurveConstructionError("origin and axis-s disks overlap along the bottom edge")
    if s_p + r3 >= 1.0:
        raise CurveConstructionError("axis-s disk reaches the corner (1, 0)")
    if r1 + r2 >= i_p:
        raise CurveConstructionError("origin and axis-i disks overlap along the left edge")
    if i_p + r2 >= 1.0:
        raise CurveConstructionError("axis-i disk reaches the corner (0, 1)")
    for rp in find_rest_points(p, region="D1"):
        if not rp.is_interior():
            continue
        for (cx, cy), r in (((0.0, 0.0), r1), ((0.0, i_p), r2), ((s_p, 0.0), r3)):
            if np.hypot(rp.s - cx, rp.i - cy) <= 2.0 * r:
                raise CurveConstructionError(
                    f"interior rest point ({rp.s:.4g}, {rp.i:.4g}) crowds the disk at "
                    f"({cx:.4g}, {cy:.4g})"
                )

    segments = (
        LineSegment((r1, 0.0), (s_p - r3, 0.0)),
        ArcSegment((s_p, 0.0), r3, pi, 2.0 * pi),
        LineSegment((s_p + r3, 0.0), (1.0, 0.0)),
        LineSegment((1.0, 0.0), (0.0, 1.0)),
        LineSegment((0.0, 1.0), (0.0, i_p + r2)),
        ArcSegment((0.0, i_p), r2, pi / 2.0, 3.0 * pi / 2.0),
        LineSegment((0.0, i_p - r2), (0.0, r1)),
        ArcSegment((0.0, 0.0), r1, pi / 2.0, 0.0),
    )
    angles = (
        -pi / 2.0,
        -pi / 2.0,
        3.0 * pi / 4.0,
        3.0 * pi / 4.0,
        -pi / 2.0,
        -pi / 2.0,
        pi / 2.0,
        pi / 2.0,
    )
    return JordanCurve(segments, angles)


def local_index(
    p: ModelParams,
    rp: RestPoint,
    radius: float = 0.05,
    rest_points: list[RestPoint] | None = None,
    max_retries: int = 6,
) -> IndexReport:
    """Index of a small circle around one rest point.

    The circle must not enclose or touch any other rest point; the radius is
    halved up to ``max_retries`` times when another rest point sits within
    twice the radius, or when the field vanishes on the circle.

    Returns the IndexReport of the final circle; for a nondegenerate point
    the curve index equals the eigenvalue-based local index.
    """
    if rest_points is None:
        rest_points = find_rest_points(p, region="plane")
    others = [q for q in rest_points if max(abs(q.s - rp.s), abs(q.i - rp.i)) > 1e-9]
    fld = planar_field(p)
    r = float(radius)
    last_error: Exception | None = None
    for _ in range(max_retries + 1):
        clear = all(np.hypot(q.s - rp.s, q.i - rp.i) > 2.0 * r for q in others)
        if clear:
            try:
                return winding_index(fld, circle_curve((rp.s, rp.i), r))
            except FieldVanishesOnCurve as exc:
                last_error = exc
        r *= 0.5
    if last_error is not None:
        raise last_error
    raise CurveConstructionError(
        f"no circle around ({rp.s:.4g}, {rp.i:.4g}) separates it from its neighbors"
    )
