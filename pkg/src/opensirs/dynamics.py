"""Time integration, omega-limit location, and population growth verdicts.

Integration uses an adaptive embedded Runge-Kutta 5(4) pair (scipy's RK45)
at tight default tolerances (rtol 1e-9, atol 1e-12).  No projection onto the
simplex is ever applied: the drift of s + i + r away from 1 is a measured
quantity, and staying under 1e-9 over [0, 100] is part of the contract.

Three coordinate systems can be integrated:

* ``planar``      -- (s, i) on D1;
* ``proportions`` -- (s, i, r) on the simplex;
* ``population``  -- raw (S, I, R) head counts.

For long-horizon population runs the growth verdict integrates (s, i, r)
together with log N, using N'/N = b - d - eps1*i - eps2*r; this is the same
system in coordinates that cannot overflow while N ranges over hundreds of
orders of magnitude.

The growth threshold at a proportion equilibrium (s*, i*, r*) is::

    T = b / (d + eps1*i* + eps2*r*)

N grows without bound along trajectories attracted to the equilibrium when
T > 1 and decays to zero when T < 1; the verdict refuses to call a sign
within the margin |T - 1| < 0.05.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .equilibria import RestPoint, find_rest_points
from .errors import NonFiniteState, StepSizeUnderflow
from .model import ModelParams, PlanarState, planar_rhs, population_rhs, proportion_rhs

__all__ = [
    "Trajectory",
    "OmegaLimitResult",
    "GrowthReport",
    "DEFAULT_RTOL",
    "DEFAULT_ATOL",
    "integrate",
    "omega_limit",
    "growth_threshold",
    "verify_growth",
    "sigma_drift",
]

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12
# Velocity norm below which a planar state counts as settled.
STALL_SPEED = 1e-10
# Noise-floor exit: settled enough once within matching range of a rest point.
FLOOR_SPEED = 1e-8
# Max-norm distance for matching a settled state to a located rest point.
MATCH_TOL = 1e-6
GROWTH_MARGIN = 0.05

_SYSTEM_DIM = {"planar": 2, "proportions": 3, "population": 3}


@dataclass(frozen=True)
class Trajectory:
    """Stored solution samples of one integration run.

    ``times`` is strictly increasing; ``states`` has one row per time.
    ``halted`` carries a reason string when integration stopped early
    (population underflow), else None.
    """

    system: str
    times: np.ndarray
    states: np.ndarray
    rtol: float
    atol: float
    halted: str | None = None

    def __post_init__(self) -> None:
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("trajectory times must be strictly increasing")
        if self.states.shape[0] != self.times.shape[0]:
            raise ValueError("one state row per time sample required")

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class OmegaLimitResult:
    """Outcome of following a planar trajectory until the field stalls.

    ``converged`` is True exactly when the settled state lies within
    max-norm 1e-6 of a located rest point; ``final_distance`` is that
    distance to the nearest rest point whether or not it matched.
    """

    limit_point: PlanarState
    matched_rest_point: RestPoint | None
    converged: bool
    final_distance: float
    final_speed: float
    final_time: float
    reason: str


@dataclass(frozen=True)
class GrowthReport:
    """Predicted vs observed long-run population growth near an attractor."""

    threshold: float
    equilibrium: tuple[float, float, float]
    inconclusive: bool
    predicted: str                 # "grows", "decays", or "inconclusive"
    observed: str | None           # sign of late-time d(log N)/dt, if run
    late_rate: float | None        # mean d(log N)/dt over the late window
    ok: bool | None


def _rhs_for(system: str, p: ModelParams):
    if system == "planar":
        return lambda t, y: planar_rhs(p, y)
    if system == "proportions":
        return lambda t, y: proportion_rhs(p, y)
    if system == "population":
        # Trial stages of an accepted-positive solution can overshoot to
        # N <= 0 during decay to extinction; every term of the count field
        # is homogeneous of degree one, so its continuous extension there
        # is zero and clamping is exact on the domain boundary.
        def guarded(t, y):
            y = np.maximum(y, 0.0)
            if float(np.sum(y)) <= 0.0:
                return np.zeros_like(y)
            return population_rhs(p, y)

        return guarded
    raise ValueError(f"unknown system {system!r}; expected planar|proportions|population")


def integrate(
    system: str,
    p: ModelParams,
    x0,
    t_end: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    n_store: int = 201,
) -> Trajectory:
    """Integrate one of the three systems over [0, t_end].

    Args:
        system: "planar", "proportions", or "population".
        p: model parameters.
        x0: initial state (state object or sequence of the right dimension).
        t_end: positive final time.
        rtol, atol: tolerances of the embedded 5(4) pair.
        n_store: number of stored samples (at least 200 are kept).

    Returns:
        Trajectory with ``n_store`` dense-output samples.  A population run
        switches internally to (s, i, r, log N) once N leaves the window
        where raw counts stay accurate, and halts early with ``halted`` set
        when N crosses 1e-300 (underflow) or 1e300 (overflow).

    Raises:
        StepSizeUnderflow: the integrator stalled before t_end.
        NonFiniteState: a stored state is NaN or infinite.
    """
    if system not in _SYSTEM_DIM:
        raise ValueError(f"unknown system {system!r}; expected planar|proportions|population")
    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if hasattr(x0, "as_array"):
        y0 = x0.as_array()
    else:
        y0 = np.asarray(x0, dtype=float)
    if y0.shape != (_SYSTEM_DIM[system],):
        raise ValueError(f"initial state for {system} must have shape ({_SYSTEM_DIM[system]},)")
    n_store = max(200, int(n_store))

    if system == "population":
        if float(np.sum(y0)) <= 0.0:
            raise ValueError("population start must have N > 0")
        return _integrate_population(p, y0, float(t_end), rtol, atol, n_store)

    sol = solve_ivp(
        _rhs_for(system, p),
        (0.0, float(t_end)),
        y0,
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=True,
    )
    if sol.status == -1:
        raise StepSizeUnderflow(f"integration of {system} failed: {sol.message}")

    halted = None
    t_stop = float(sol.t[-1])

    times = np.linspace(0.0, t_stop, n_store)
    states = sol.sol(times).T
    if not np.all(np.isfinite(states)):
        raise NonFiniteState(f"integration of {system} produced non-finite states")
    return Trajectory(
        system=system, times=times, states=states, rtol=rtol, atol=atol, halted=halted
    )


_LOG_UNDER = float(np.log(1e-300))
_LOG_OVER = float(np.log(1e300))


def _integrate_population(
    p: ModelParams, y0: np.ndarray, t_end: float, rtol: float, atol: float, n_store: int
) -> Trajectory:
    """Two-phase head-count integration.

    Raw counts keep relative accuracy only while N sits well above atol, so
    once N leaves [max(1e-100, 1e6 atol), 1e100] the run switches to
    (s, i, r, log N), which carries N across the whole float range.  The
    log phase halts with a flag when N crosses 1e-300 or 1e300; stored
    samples are reported as counts throughout.
    """
    n0 = float(np.sum(y0))
    switch_lo = max(1e-100, 1e6 * atol)
    switch_hi = 1e100

    raw_sol = None
    t_switch = 0.0
    y_switch = y0
    if switch_lo < n0 < switch_hi:

        def low(t, y):
            return float(np.sum(np.maximum(y, 0.0))) - switch_lo

        def high(t, y):
            return float(np.sum(y)) - switch_hi

        low.terminal = True  # type: ignore[attr-defined]
        low.direction = -1  # type: ignore[attr-defined]
        high.terminal = True  # type: ignore[attr-defined]
        high.direction = 1  # type: ignore[attr-defined]

        raw_sol = solve_ivp(
            _rhs_for("population", p),
            (0.0, t_end),
            y0,
            method="RK45",
            rtol=rtol,
            atol=atol,
            dense_output=True,
            events=[low, high],
        )
        if raw_sol.status == -1:
            raise StepSizeUnderflow(f"integration of population failed: {raw_sol.message}")
        if raw_sol.status == 0:
            times = np.linspace(0.0, t_end, n_store)
            states = raw_sol.sol(times).T
            if not np.all(np.isfinite(states)):
                raise NonFiniteState("integration of population produced non-finite states")
            return Trajectory(
                system="population", times=times, states=states,
                rtol=rtol, atol=atol, halted=None,
            )
        hits = [ev[0] for ev in raw_sol.t_events if len(ev)]
        t_switch = float(min(hits))
        y_switch = np.maximum(np.asarray(raw_sol.sol(t_switch), dtype=float), 0.0)

    n_sw = float(np.sum(y_switch))
    z0 = np.array([y_switch[0] / n_sw, y_switch[1] / n_sw, np.log(n_sw)])

    def under(t, z):
        return z[2] - _LOG_UNDER

    def over(t, z):
        return z[2] - _LOG_OVER

    under.terminal = True  # type: ignore[attr-defined]
    under.direction = -1  # type: ignore[attr-defined]
    over.terminal = True  # type: ignore[attr-defined]
    over.direction = 1  # type: ignore[attr-defined]

    log_sol = solve_ivp(
        _log_population_rhs(p),
        (t_switch, t_end),
        z0,
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=[under, over],
    )
    if log_sol.status == -1:
        raise StepSizeUnderflow(f"integration of population failed: {log_sol.message}")

    halted = None
    t_stop = float(log_sol.t[-1])
    if log_sol.status == 1:
        if len(log_sol.t_events[0]):
            halted = "population underflow (N < 1e-300)"
            t_stop = float(log_sol.t_events[0][0])
        else:
            halted = "population overflow (N > 1e300)"
            t_stop = float(log_sol.t_events[1][0])

    times = np.linspace(0.0, t_stop, n_store)
    states = np.empty((n_store, 3))
    in_raw = times <= t_switch if raw_sol is not None else np.zeros(n_store, dtype=bool)
    if np.any(in_raw):
        states[in_raw] = raw_sol.sol(times[in_raw]).T
    if np.any(~in_raw):
        z = log_sol.sol(times[~in_raw])
        n = np.exp(z[2])
        states[~in_raw] = np.stack([n * z[0], n * z[1], n * (1.0 - z[0] - z[1])], axis=-1)
    if not np.all(np.isfinite(states)):
        raise NonFiniteState("integration of population produced non-finite states")
    return Trajectory(
        system="population", times=times, states=states, rtol=rtol, atol=atol, halted=halted
    )


def sigma_drift(traj: Trajectory) -> float:
    """Largest |s + i + r - 1| along a proportions trajectory."""
    if traj.system != "proportions":
        raise ValueError("sigma drift is defined for proportions trajectories")
    return float(np.max(np.abs(np.sum(traj.states, axis=1) - 1.0)))


def omega_limit(
    p: ModelParams,
    x0,
    max_time: float = 1e5,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    rest_points: list[RestPoint] | None = None,
    floor_speed: float = FLOOR_SPEED,
) -> OmegaLimitResult:
    """Follow the planar flow from x0 until the velocity norm stalls.

    The preferred stopping trigger is an integrator event at |planar field|
    < 1e-10.  Near a slowly attracting rest point the measured speed can
    floor at the integration noise level (about rtol times the state scale)
    without ever crossing that threshold, so integration proceeds in
    doubling time chunks and also stops once the state sits within max-norm
    1e-6 of a located rest point with speed below 1e-8; a run that does
    neither ends at max_time.  Either way the verdict is the same:
    converged is True exactly when the final state lies within max-norm
    1e-6 of a located rest point.

    Args:
        p: model parameters.
        x0: starting point; must lie in D1 (tolerance 1e-9).
        max_time: time budget; a run that stalls away from every located
            rest point is reported as not converged, never silently
            dropped.
        rest_points: optional precomputed rest points (saves a solve).
        floor_speed: early-exit speed threshold; 0.0 disables the floor
            exit so only the strict stall event (or max_time) ends the run.
            Use with rtol around 1e-12 or the event may sit below the
            integration noise level.

    Returns:
        OmegaLimitResult.
    """
    if hasattr(x0, "as_array"):
        y0 = x0.as_array()
    else:
        y0 = np.asarray(x0, dtype=float)
    s0, i0 = float(y0[0]), float(y0[1])
    if not (s0 >= -1e-9 and i0 >= -1e-9 and s0 + i0 <= 1.0 + 1e-9):
        raise ValueError(f"omega_limit start ({s0}, {i0}) is outside D1")

    if rest_points is None:
        rest_points = find_rest_points(p, region="D1")

    def match(state: np.ndarray) -> tuple[RestPoint | None, float]:
        best: RestPoint | None = None
        best_d = float("inf")
        for rp in rest_points:
            dist = max(abs(state[0] - rp.s), abs(state[1] - rp.i))
            if dist < best_d:
                best, best_d = rp, dist
        return best, best_d

    def result(state: np.ndarray, t: float, reason: str) -> OmegaLimitResult:
        f = planar_rhs(p, state)
        rp, dist = match(state)
        hit = dist <= MATCH_TOL
        return OmegaLimitResult(
            limit_point=PlanarState(s=float(state[0]) + 0.0, i=float(state[1]) + 0.0),
            matched_rest_point=rp if hit else None,
            converged=hit,
            final_distance=dist,
            final_speed=float(np.hypot(f[0], f[1])),
            final_time=t,
            reason=reason if hit else f"{reason}, no rest point within 1e-6",
        )

    f0 = planar_rhs(p, y0)
    if float(np.hypot(f0[0], f0[1])) < STALL_SPEED:
        return result(y0, 0.0, "started at rest")

    def stalled(t, y):
        f = planar_rhs(p, y)
        # fire a hair inside the threshold so the exit state satisfies the
        # strict bound despite event root-finding tolerance
        return float(np.hypot(f[0], f[1])) - STALL_SPEED * (1.0 - 1e-4)

    stalled.terminal = True  # type: ignore[attr-defined]
    stalled.direction = -1  # type: ignore[attr-defined]

    t_now, y_now, chunk = 0.0, y0, 100.0
    while t_now < max_time:
        t_next = min(t_now + chunk, float(max_time))
        sol = solve_ivp(
            lambda t, y: planar_rhs(p, y),
            (t_now, t_next),
            y_now,
            method="RK45",
            rtol=rtol,
            atol=atol,
            events=stalled,
        )
        if sol.status == -1:
            raise StepSizeUnderflow(f"omega-limit integration failed: {sol.message}")
        y_now, t_now = sol.y[:, -1], float(sol.t[-1])
        if sol.status == 1:
            return result(y_now, t_now, "velocity stall")
        f = planar_rhs(p, y_now)
        if float(np.hypot(f[0], f[1])) < floor_speed:
            rp, dist = match(y_now)
            if dist <= MATCH_TOL:
                return result(y_now, t_now, "velocity floor")
        chunk *= 2.0
    return result(y_now, t_now, "max_time")


def growth_threshold(p: ModelParams, equilibrium) -> float:
    """Growth threshold T = b / (d + eps1*i* + eps2*r*) at an equilibrium.

    Args:
        p: model parameters.
        equilibrium: proportion equilibrium (s*, i*, r*); the proportion
            field there must have max-norm residual < 1e-8.

    Raises:
        ValueError: residual too large, or the denominator is zero.
    """
    if hasattr(equilibrium, "as_array"):
        eq = equilibrium.as_array()
    else:
        eq = np.asarray(equilibrium, dtype=float)
    res = float(np.max(np.abs(proportion_rhs(p, eq))))
    if res > 1e-8:
        raise ValueError(f"not a proportion equilibrium: residual {res:.3e}")
    denom = p.d + p.eps1 * eq[1] + p.eps2 * eq[2]
    if denom <= 0.0:
        raise ValueError("growth threshold undefined: d + eps1*i* + eps2*r* is zero")
    return p.b / denom


def _log_population_rhs(p: ModelParams):
    # Chart (s, i, log N) with r = 1 - s - i eliminated: the redundant
    # 3-component proportions leak off the simplex at rate eps1*i+eps2*r-b,
    # which corrupts d(log N)/dt on long runs, while this chart cannot.
    def rhs(t, y):
        s, i = y[0], y[1]
        planar = planar_rhs(p, (s, i))
        dlogn = p.b - p.d - p.eps1 * i - p.eps2 * (1.0 - s - i)
        return np.array([planar[0], planar[1], dlogn])

    return rhs


def verify_growth(
    p: ModelParams,
    x0,
    horizon: float = 500.0,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> GrowthReport:
    """Check the predicted growth sign of N along one trajectory.

    The proportions are followed to their omega limit to find the attracting
    equilibrium and its threshold T; then (s, i, log N) is integrated
    over the horizon and the mean of d(log N)/dt over the last fifth is
    compared with the prediction.  Log-scale integration keeps the check
    meaningful when N traverses hundreds of orders of magnitude.

    Args:
        p: model parameters.
        x0: PopulationState or (S, I, R) with N > 0.
        horizon: duration of the verification run.

    Returns:
        GrowthReport; ``ok`` is None when |T - 1| < 0.05 (inconclusive by
        contract) and a bool otherwise.
    """
    if hasattr(x0, "as_array"):
        y0 = x0.as_array()
    else:
        y0 = np.asarray(x0, dtype=float)
    n0 = float(np.sum(y0))
    if n0 <= 0.0:
        raise ValueError("verify_growth needs a start with N > 0")
    s0, i0 = float(y0[0]) / n0, float(y0[1]) / n0

    lim = omega_limit(p, (s0, i0), rtol=rtol, atol=atol)
    if not lim.converged or lim.matched_rest_point is None:
        raise ValueError(f"trajectory did not settle at an equilibrium ({lim.reason})")
    s_star, i_star = lim.matched_rest_point.s, lim.matched_rest_point.i
    eq = (s_star, i_star, 1.0 - s_star - i_star)
    T = growth_threshold(p, eq)

    if abs(T - 1.0) < GROWTH_MARGIN:
        return GrowthReport(
            threshold=T,
            equilibrium=eq,
            inconclusive=True,
            predicted="inconclusive",
            observed=None,
            late_rate=None,
            ok=None,
        )

    sol = solve_ivp(
        _log_population_rhs(p),
        (0.0, float(horizon)),
        np.array([s0, i0, np.log(n0)]),
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=True,
    )
    if sol.status != 0:
        raise StepSizeUnderflow(f"growth verification integration failed: {sol.message}")
    times = np.linspace(0.8 * horizon, horizon, 64)
    states = sol.sol(times)
    rates = p.b - p.d - p.eps1 * states[1] - p.eps2 * (1.0 - states[0] - states[1])
    late = float(np.mean(rates))

    predicted = "grows" if T > 1.0 else "decays"
    observed = "grows" if late > 0.0 else "decays"
    return GrowthReport(
        threshold=T,
        equilibrium=eq,
        inconclusive=False,
        predicted=predicted,
        observed=observed,
        late_rate=late,
        ok=observed == predicted,
    )
