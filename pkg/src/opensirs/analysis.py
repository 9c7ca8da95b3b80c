"""Scenario-level analysis: regime classification, bistable construction,
perturbation continuation, basin geometry, and parameter sweeps.

For strictly positive parameters the planar system admits exactly one of two
nondegenerate interior configurations: a unique sink (label A_UniqueGAS) or
two sinks separated by a saddle (label B_TwoSinksOneSaddle).  Any other
nondegenerate configuration is impossible for this vector field, so meeting
one is treated as a solver defect and raised loudly rather than binned.

Bistable instances are constructed in the closed special case b=beta1=gamma=0
(where the admissible band of the threshold ratio T0/T1 is known exactly) and
then carried into the strictly positive regime by a small joint perturbation
of b, gamma, beta1 with beta held fixed.

Basin geometry in regime B: the saddle's stable manifold is grown by
backward integration from two seeds straddling the saddle along the stable
eigenvector, the two basins are probed by forward omega-limit runs, and the
two boundary points where the assignment switches are located by bisection
along the arc-length parameterization of the triangle boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .dynamics import DEFAULT_ATOL, DEFAULT_RTOL, omega_limit
from .equilibria import (
    RestPoint,
    SADDLE,
    SINK,
    SOURCE,
    DEGENERATE,
    SPECIAL_BISTABLE,
    TOL_DEG,
    find_rest_points,
    special_case_report,
)
from .errors import (
    EmptyInterval,
    FieldVanishesOnCurve,
    InconsistentWithTheorem,
    OpenSirsError,
    PersistenceFailure,
    SpecialCaseError,
)
from .model import ModelParams, PlanarState, planar_field, planar_rhs
from .winding import IndexReport, curve_triangle, winding_index

__all__ = [
    "REGIME_A",
    "REGIME_B",
    "REGIME_DEGENERATE",
    "RegimeVerdict",
    "BasinReport",
    "SweepAxis",
    "SweepResult",
    "classify_regime",
    "bistable_special_instance",
    "perturb_special_case",
    "basin_analysis",
    "parameter_sweep",
    "straddling_death_rate",
]

REGIME_A = "A_UniqueGAS"
REGIME_B = "B_TwoSinksOneSaddle"
REGIME_DEGENERATE = "DegenerateDetected"

# Aliases accepted wherever a parameter axis is named.
_AXIS_ALIASES = {"lambda": "lam"}
_PARAM_NAMES = ("b", "d", "eps1", "eps2", "lam", "alpha", "gamma", "beta1", "beta2")


@dataclass(frozen=True)
class RegimeVerdict:
    """Interior rest-point census of one strictly positive instance.

    mu0, mu1, mu2 count interior sinks, saddles, sources.  For a
    nondegenerate verdict mu0 - mu1 + mu2 = 1 and mu2 = 0 hold by
    construction (any other census raises instead of returning).
    """

    label: str
    rest_points: tuple[RestPoint, ...]
    index_report: IndexReport | None
    mu0: int
    mu1: int
    mu2: int

    @property
    def sinks(self) -> tuple[RestPoint, ...]:
        return tuple(rp for rp in self.rest_points if rp.classification == SINK)

    @property
    def saddles(self) -> tuple[RestPoint, ...]:
        return tuple(rp for rp in self.rest_points if rp.classification == SADDLE)


@dataclass(frozen=True)
class BasinReport:
    """Basin geometry of a regime-B instance.

    ``branches`` are the two stable-manifold polylines, each starting at the
    saddle; ``assignments[k]`` is the index into ``sinks`` of the sink that
    probe k converges to, or -1 when unassigned (flagged with a reason).
    ``boundary_crossings`` are the two boundary points where the omega-limit
    switches sinks, ordered by arc length from the origin corner.
    """

    saddle: RestPoint
    sinks: tuple[RestPoint, RestPoint]
    branches: tuple[np.ndarray, np.ndarray]
    branch_exits: tuple[str, str]
    probes: np.ndarray
    assignments: np.ndarray
    flagged: tuple[tuple[int, str], ...]
    boundary_crossings: tuple[PlanarState, PlanarState]
    agreement_fraction: float
    n_side_checked: int

    @property
    def sink_assignment(self) -> dict[tuple[float, float], int]:
        return {
            (float(p[0]), float(p[1])): int(a)
            for p, a in zip(self.probes, self.assignments)
        }

    @property
    def manifold_polyline(self) -> np.ndarray:
        """Single separatrix polyline: branch 0 reversed, saddle, branch 1."""
        return np.vstack([self.branches[0][::-1], self.branches[1][1:]])


def classify_regime(
    p: ModelParams,
    inset: float = 1e-4,
    tol_deg: float = TOL_DEG,
) -> RegimeVerdict:
    """Census of interior rest points plus the boundary winding index.

    Args:
        p: strictly positive parameters (the d rate may be anything; it does
            not enter the planar system).
        inset: inset of the boundary index curve; halved up to twice when a
            rest point sits close enough to the curve to stall the winding
            computation.
        tol_deg: determinant threshold below which a rest point counts as
            degenerate.

    Returns:
        RegimeVerdict labeled A_UniqueGAS, B_TwoSinksOneSaddle, or
        DegenerateDetected.

    Raises:
        ValueError: parameters not strictly positive.
        InconsistentWithTheorem: a nondegenerate census other than
            (1 sink) or (2 sinks + 1 saddle); impossible for this field,
            so it signals a solver defect.
    """
    if not p.is_strictly_positive():
        raise ValueError("regime classification requires strictly positive parameters")

    all_points = find_rest_points(p, region="D1")
    interior = tuple(rp for rp in all_points if rp.is_interior())

    report: IndexReport | None = None
    last_err: FieldVanishesOnCurve | None = None
    for shrink in (1.0, 0.5, 0.25):
        try:
            report = winding_index(
                planar_field(p), curve_triangle(inset * shrink), rest_points=all_points
            )
            break
        except FieldVanishesOnCurve as err:
            last_err = err
    if report is None and last_err is not None:
        raise last_err

    degenerate = [rp for rp in interior if rp.classification == DEGENERATE
                  or abs(rp.det) <= tol_deg]
    mu0 = sum(1 for rp in interior if rp.classification == SINK)
    mu1 = sum(1 for rp in interior if rp.classification == SADDLE)
    mu2 = sum(1 for rp in interior if rp.classification == SOURCE)

    if degenerate:
        label = REGIME_DEGENERATE
    elif (mu0, mu1, mu2) == (1, 0, 0):
        label = REGIME_A
    elif (mu0, mu1, mu2) == (2, 1, 0):
        label = REGIME_B
    else:
        raise InconsistentWithTheorem(
            f"nondegenerate interior census (sinks={mu0}, saddles={mu1}, "
            f"sources={mu2}) is neither (1,0,0) nor (2,1,0); solver defect for {p}"
        )
    return RegimeVerdict(
        label=label,
        rest_points=interior,
        index_report=report,
        mu0=mu0,
        mu1=mu1,
        mu2=mu2,
    )


def bistable_special_instance(
    eps1: float,
    eps2: float,
    lam: float,
    ratio_fraction: float = 0.4,
) -> ModelParams:
    """Construct a special-case instance with two boundary sinks and a saddle.

    Requires eps2 > eps1 > lam > 0.  The admissible band for the threshold
    ratio T0/T1 is the open interval (1/(1 - lam/eps2), 1 + lam/(eps2-eps1)),
    nonempty exactly under that ordering.  The ratio is placed at
    ratio_fraction of the way across the band, the recovery-side rate is
    fixed at alpha = (eps2 - eps1)/2, and the outside transmission is then
    beta = eps2 - ratio*T1 with T1 = eps2 - eps1 - alpha.

    With (eps1, eps2, lam) = (2, 4, 1) and ratio_fraction = 0.4 the band is
    (4/3, 3/2), the ratio lands on 1.4, and beta = 2.6.

    Raises:
        EmptyInterval: ordering violated (band empty or degenerate).
        ValueError: ratio_fraction outside (0, 1).
    """
    if not 0.0 < ratio_fraction < 1.0:
        raise ValueError(f"ratio_fraction must lie in (0, 1), got {ratio_fraction}")
    if not (eps2 > eps1 > lam > 0.0):
        raise EmptyInterval(
            f"admissible ratio band requires eps2 > eps1 > lam > 0, got "
            f"eps1={eps1}, eps2={eps2}, lam={lam}"
        )
    lo = 1.0 / (1.0 - lam / eps2)
    hi = 1.0 + lam / (eps2 - eps1)
    if not lo < hi:
        raise EmptyInterval(f"ratio band ({lo}, {hi}) is empty")
    ratio = lo + ratio_fraction * (hi - lo)

    alpha = 0.5 * (eps2 - eps1)
    t1 = eps2 - eps1 - alpha
    beta = eps2 - ratio * t1
    if beta <= 0.0:
        raise EmptyInterval(f"derived outside transmission beta={beta} is not positive")

    p = ModelParams(
        b=0.0, d=0.0, eps1=eps1, eps2=eps2, lam=lam,
        alpha=alpha, gamma=0.0, beta1=0.0, beta2=beta,
    )
    rep = special_case_report(p)
    if rep.regime_label != SPECIAL_BISTABLE:
        raise SpecialCaseError(
            f"constructed instance labeled {rep.regime_label}, expected "
            f"{SPECIAL_BISTABLE}; thresholds T0..T3 = "
            f"({rep.T0}, {rep.T1}, {rep.T2}, {rep.T3})"
        )
    return p


def perturb_special_case(p_special: ModelParams, delta: float = 1e-3) -> ModelParams:
    """Carry a bistable special-case instance into strictly positive rates.

    Sets b = gamma = beta1 = delta and reduces beta2 by delta so the total
    outside transmission is unchanged.  If the perturbed instance fails to
    classify as regime B the offset is halved and retried, up to 10 times.

    Args:
        p_special: instance with b = beta1 = gamma = 0 labeled as having two
            boundary sinks and a saddle.
        delta: initial positive offset.

    Returns:
        The first perturbed instance classifying as B_TwoSinksOneSaddle.

    Raises:
        SpecialCaseError: wrong special-case label.
        ValueError: delta not positive (zero offset defeats the purpose).
        PersistenceFailure: no tried offset produced regime B.
    """
    rep = special_case_report(p_special)
    if rep.regime_label != SPECIAL_BISTABLE:
        raise SpecialCaseError(
            f"perturbation requires label {SPECIAL_BISTABLE}, got {rep.regime_label}"
        )
    if delta <= 0.0:
        raise ValueError("delta must be positive; zero keeps the degenerate case")

    tried = []
    dk = float(delta)
    for _ in range(10):
        tried.append(dk)
        if p_special.beta2 - dk > 0.0:
            candidate = replace(
                p_special, b=dk, gamma=dk, beta1=dk, beta2=p_special.beta2 - dk
            )
            try:
                verdict = classify_regime(candidate)
            except OpenSirsError:
                verdict = None
            if verdict is not None and verdict.label == REGIME_B:
                return candidate
        dk *= 0.5
    raise PersistenceFailure(
        f"no offset in {tried} produced two interior sinks and a saddle"
    )


# Arc-length parameterization of the boundary of D1, origin corner first:
# bottom edge (length 1), hypotenuse (length sqrt 2), left edge (length 1).
_PERIMETER = 2.0 + np.sqrt(2.0)


def _boundary_point(arc: float) -> np.ndarray:
    a = float(arc) % _PERIMETER
    if a <= 1.0:
        return np.array([a, 0.0])
    if a <= 1.0 + np.sqrt(2.0):
        u = (a - 1.0) / np.sqrt(2.0)
        return np.array([1.0 - u, u])
    v = a - 1.0 - np.sqrt(2.0)
    return np.array([0.0, 1.0 - v])


def _grow_branch(
    p: ModelParams,
    seed: np.ndarray,
    saddle_loc: np.ndarray,
    rtol: float,
    atol: float,
    time_cap: float = 1e4,
    arc_cap: float = 10.0,
    n_samples: int = 400,
) -> tuple[np.ndarray, str]:
    """One stable-manifold branch by backward integration until leaving D1.

    The integrated state is (s, i, arc length); leaving any of the three
    boundary half-planes by 1e-9, running out the arc budget, or the time
    budget all terminate.  Returns the polyline (saddle first) and the
    reason the run stopped.
    """

    def rhs(t, y):
        f = planar_rhs(p, y[:2])
        return np.array([-f[0], -f[1], float(np.hypot(f[0], f[1]))])

    def exit_s(t, y):
        return y[0] + 1e-9

    def exit_i(t, y):
        return y[1] + 1e-9

    def exit_hyp(t, y):
        return 1.0 - y[0] - y[1] + 1e-9

    def arc_spent(t, y):
        return arc_cap - y[2]

    events = [exit_s, exit_i, exit_hyp, arc_spent]
    for ev in events:
        ev.terminal = True  # type: ignore[attr-defined]
        ev.direction = -1  # type: ignore[attr-defined]

    sol = solve_ivp(
        rhs,
        (0.0, float(time_cap)),
        np.array([seed[0], seed[1], 0.0]),
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=events,
    )
    names = ("left D1 through s=0", "left D1 through i=0",
             "left D1 through s+i=1", "arc budget spent")
    reason = "time budget spent"
    for k, hits in enumerate(sol.t_events):
        if len(hits):
            reason = names[k]
    ts = np.linspace(0.0, float(sol.t[-1]), n_samples)
    pts = sol.sol(ts)[:2].T
    return np.vstack([saddle_loc, pts]), reason


def _side_of_polyline(poly: np.ndarray, q: np.ndarray) -> tuple[float, float]:
    """(signed side, distance) of point q relative to a polyline.

    Side is the cross-product sign against the nearest segment; distance is
    the usual point-to-segment minimum.
    """
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom[denom == 0.0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", q - a, ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    d = np.hypot(*(q - proj).T)
    j = int(np.argmin(d))
    cross = ab[j, 0] * (q[1] - a[j, 1]) - ab[j, 1] * (q[0] - a[j, 0])
    return float(np.sign(cross)), float(d[j])


def basin_analysis(
    p: ModelParams,
    verdict: RegimeVerdict,
    probe_resolution: int = 10,
    boundary_samples: int = 32,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> BasinReport:
    """Basin geometry of a regime-B instance.

    Grows the saddle's stable manifold backward from seeds at
    saddle +- 1e-6 * v_stable, assigns a probe grid to sinks by forward
    omega-limit runs, bisects the two boundary switch points to arc-length
    tolerance 1e-6 (at most 40 halvings each), and cross-validates probe
    assignments against the side of the manifold polyline they lie on.

    Args:
        p: the instance of the verdict.
        verdict: regime-B verdict for p.
        probe_resolution: probe grid density m; probes are the lattice
            ((j+.5)/m, (k+.5)/m) clipped to s+i < 1 - 1/(2m).
        boundary_samples: initial boundary scan density.

    Raises:
        ValueError: verdict is not regime B.
        InconsistentWithTheorem: boundary scan finds a switch count other
            than two.
    """
    if verdict.label != REGIME_B:
        raise ValueError(f"basin analysis requires regime B, got {verdict.label}")
    saddle = verdict.saddles[0]
    sinks = tuple(sorted(verdict.sinks, key=lambda rp: (rp.s, rp.i)))
    rest_points = list(verdict.rest_points)

    evals, evecs = np.linalg.eig(np.asarray(saddle.jacobian))
    stable_dir = np.real(evecs[:, int(np.argmin(np.real(evals)))])
    stable_dir = stable_dir / np.hypot(*stable_dir)
    loc = np.array([saddle.s, saddle.i])

    branches = []
    exits = []
    for sign in (1.0, -1.0):
        poly, reason = _grow_branch(p, loc + sign * 1e-6 * stable_dir, loc, rtol, atol)
        branches.append(poly)
        exits.append(reason)

    def assign(point) -> tuple[int, str | None]:
        lim = omega_limit(p, point, rest_points=rest_points, rtol=rtol, atol=atol)
        if not lim.converged:
            return -1, f"unconverged ({lim.reason})"
        for k, sk in enumerate(sinks):
            if lim.matched_rest_point is sk:
                return k, None
        return -1, f"settled at non-sink {lim.matched_rest_point.classification}"

    m = int(probe_resolution)
    grid = [
        (sj, ik)
        for j in range(m)
        for k in range(m)
        if (sj := (j + 0.5) / m) + (ik := (k + 0.5) / m) < 1.0 - 0.5 / m
    ]
    probes = np.array(grid)
    assignments = np.full(len(grid), -1, dtype=int)
    flagged: list[tuple[int, str]] = []
    for idx, pt in enumerate(grid):
        a, why = assign(pt)
        assignments[idx] = a
        if why is not None:
            flagged.append((idx, why))

    # Boundary switch points: coarse cyclic scan, then bisection per switch.
    arcs = (np.arange(boundary_samples) + 0.5) / boundary_samples * _PERIMETER
    b_assign = []
    for a in arcs:
        k, _ = assign(_boundary_point(a))
        b_assign.append(k)
    known = [(a, k) for a, k in zip(arcs, b_assign) if k >= 0]
    if len(known) < 2:
        raise InconsistentWithTheorem("boundary scan produced no sink assignments")
    switches = []
    for (a0, k0), (a1, k1) in zip(known, known[1:] + [(known[0][0] + _PERIMETER, known[0][1])]):
        if k0 != k1:
            switches.append((a0, k0, a1, k1))
    if len(switches) != 2:
        raise InconsistentWithTheorem(
            f"omega-limit switches sinks {len(switches)} times along the "
            f"boundary; exactly 2 expected in regime B"
        )
    crossings = []
    for a_lo, k_lo, a_hi, _k_hi in switches:
        lo, hi = a_lo, a_hi
        for _ in range(40):
            if hi - lo < 1e-6:
                break
            mid = 0.5 * (lo + hi)
            k_mid, _ = assign(_boundary_point(mid))
            if k_mid == k_lo:
                lo = mid
            else:
                hi = mid
        pt = _boundary_point(0.5 * (lo + hi))
        crossings.append(PlanarState(s=float(pt[0]) + 0.0, i=float(pt[1]) + 0.0))

    # Cross-validation: probe sink vs side of the separatrix polyline.
    poly = np.vstack([branches[0][::-1], branches[1][1:]])
    by_side: dict[float, list[int]] = {}
    checked = []
    for idx, pt in enumerate(grid):
        if assignments[idx] < 0:
            continue
        side, dist = _side_of_polyline(poly, np.asarray(pt))
        if dist < 1e-3 or side == 0.0:
            continue
        checked.append((idx, side))
        by_side.setdefault(side, []).append(int(assignments[idx]))
    majority = {
        side: max(set(ks), key=ks.count) for side, ks in by_side.items() if ks
    }
    n_agree = sum(
        1 for idx, side in checked if assignments[idx] == majority.get(side, -2)
    )
    fraction = n_agree / len(checked) if checked else float("nan")

    return BasinReport(
        saddle=saddle,
        sinks=sinks,
        branches=(branches[0], branches[1]),
        branch_exits=(exits[0], exits[1]),
        probes=probes,
        assignments=assignments,
        flagged=tuple(flagged),
        boundary_crossings=(crossings[0], crossings[1]),
        agreement_fraction=float(fraction),
        n_side_checked=len(checked),
    )


@dataclass(frozen=True)
class SweepAxis:
    """One swept parameter: field name (aliases: lambda -> lam, beta means
    total outside transmission, applied through beta2) and an inclusive
    linear range."""

    name: str
    lo: float
    hi: float
    n: int

    def __post_init__(self) -> None:
        name = _AXIS_ALIASES.get(self.name, self.name)
        if name not in _PARAM_NAMES + ("beta",):
            raise ValueError(f"unknown parameter axis {self.name!r}")
        object.__setattr__(self, "name", name)
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.lo <= self.hi):
            raise ValueError(f"bad axis range [{self.lo}, {self.hi}]")
        if self.lo < 0.0:
            raise ValueError("axis ranges must keep parameters nonnegative")
        if self.n < 2:
            raise ValueError("axis resolution must be at least 2")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class SweepResult:
    """Regime labels over a 2-parameter grid.

    labels[j][k] corresponds to (axis1.values()[j], axis2.values()[k]);
    cells whose classification raised carry the label "error:<ExcName>",
    mus[j][k] = None, and an entry in ``errors``.
    """

    axis1: SweepAxis
    axis2: SweepAxis
    labels: tuple[tuple[str, ...], ...]
    mus: tuple[tuple[tuple[int, int, int] | None, ...], ...]
    errors: tuple[tuple[int, int, str], ...]

    def count(self, label: str) -> int:
        return sum(row.count(label) for row in self.labels)

    def fraction(self, label: str) -> float:
        total = self.axis1.n * self.axis2.n
        return self.count(label) / total


def _apply_axis(p: ModelParams, name: str, value: float) -> ModelParams:
    if name == "beta":
        return replace(p, beta2=value - p.beta1)
    return replace(p, **{name: value})


def parameter_sweep(p_base: ModelParams, axis1: SweepAxis, axis2: SweepAxis) -> SweepResult:
    """Classify the regime over a 2-parameter grid around a base instance.

    Each cell is evaluated independently; a cell that raises records
    "error:<ExcName>" and the sweep continues.  Labels A and B regions meet
    only across label changes or error/degenerate cells.
    """
    labels: list[tuple[str, ...]] = []
    mus: list[tuple[tuple[int, int, int] | None, ...]] = []
    errors: list[tuple[int, int, str]] = []
    for j, v1 in enumerate(axis1.values()):
        row = []
        mu_row: list[tuple[int, int, int] | None] = []
        for k, v2 in enumerate(axis2.values()):
            try:
                cell = _apply_axis(_apply_axis(p_base, axis1.name, v1), axis2.name, v2)
                verdict = classify_regime(cell)
                row.append(verdict.label)
                mu_row.append((verdict.mu0, verdict.mu1, verdict.mu2))
            except (OpenSirsError, ValueError) as err:
                row.append(f"error:{type(err).__name__}")
                mu_row.append(None)
                errors.append((j, k, str(err)))
        labels.append(tuple(row))
        mus.append(tuple(mu_row))
    return SweepResult(
        axis1=axis1, axis2=axis2, labels=tuple(labels), mus=tuple(mus),
        errors=tuple(errors)
    )


def straddling_death_rate(
    p: ModelParams,
    verdict: RegimeVerdict,
    margin: float = 0.05,
) -> tuple[float, tuple[float, float]]:
    """A death rate making the two sinks' growth thresholds straddle 1.

    For sink k with loss rate E_k = eps1*i_k + eps2*r_k the threshold is
    T_k = b/(d + E_k); a single d puts one above 1+margin and the other
    below 1-margin exactly when the feasible interval

        [max(0, b/(1-margin) - E_max),  b/(1+margin) - E_min]

    is nonempty, which needs b comparable to the sinks' loss rates.  Returns
    the midpoint d and the two thresholds (ordered like verdict's sinks
    sorted by (s, i)).

    Raises:
        ValueError: verdict is not regime B.
        EmptyInterval: no nonnegative d separates the thresholds by the
            margin (in particular whenever b is small).
    """
    if verdict.label != REGIME_B:
        raise ValueError(f"threshold straddle requires regime B, got {verdict.label}")
    sinks = tuple(sorted(verdict.sinks, key=lambda rp: (rp.s, rp.i)))
    loss = [p.eps1 * rp.i + p.eps2 * (1.0 - rp.s - rp.i) for rp in sinks]
    e_min, e_max = min(loss), max(loss)
    d_hi = p.b / (1.0 + margin) - e_min
    d_lo = max(0.0, p.b / (1.0 - margin) - e_max)
    if d_hi < d_lo:
        raise EmptyInterval(
            f"no nonnegative death rate separates thresholds by {margin}: "
            f"sink loss rates {loss}, birth rate {p.b}"
        )
    d = 0.5 * (d_lo + d_hi)
    thresholds = tuple(p.b / (d + e) for e in loss)
    return d, thresholds
