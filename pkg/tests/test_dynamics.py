"""Integration, omega limits, and population growth thresholds."""

import numpy as np
import pytest

from opensirs import (
    ModelParams,
    PlanarState,
    Trajectory,
    growth_threshold,
    integrate,
    omega_limit,
    sigma_drift,
    verify_growth,
)

from conftest import GENERIC_A_PARAMS, SPECIAL_BISTABLE_PARAMS


def _with_d(p, d):
    return ModelParams(b=p.b, d=d, eps1=p.eps1, eps2=p.eps2, lam=p.lam,
                       alpha=p.alpha, gamma=p.gamma, beta1=p.beta1, beta2=p.beta2)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(system="planar", times=np.array([0.0, 1.0, 1.0]),
                   states=np.zeros((3, 2)), rtol=1e-9, atol=1e-12, halted=None)
    with pytest.raises(ValueError):
        integrate("planar", GENERIC_A_PARAMS, (0.3, 0.3), t_end=-1.0)
    with pytest.raises(ValueError):
        integrate("orbits", GENERIC_A_PARAMS, (0.3, 0.3), t_end=1.0)
    with pytest.raises(ValueError):
        integrate("planar", GENERIC_A_PARAMS, (0.3, 0.3, 0.1), t_end=1.0)


def test_planar_run_reaches_sink():
    tr = integrate("planar", GENERIC_A_PARAMS, (0.3, 0.3), t_end=200.0)
    assert tr.system == "planar"
    assert len(tr.times) == 201
    assert np.all(np.diff(tr.times) > 0)
    assert tr.halted is None
    # frozen sink of the generic instance
    assert tr.final_state == pytest.approx([0.828541414898, 0.086025937024], abs=1e-6)


def test_sigma_drift_attracting_instance():
    """b above eps1*i + eps2*r keeps the simplex numerically attracting."""
    tr = integrate("proportions", GENERIC_A_PARAMS, (0.3, 0.3, 0.4), t_end=100.0)
    assert sigma_drift(tr) < 1e-9


def test_sigma_drift_repelling_instance_grows_as_predicted(perturbed_b):
    """With b far below eps1*i + eps2*r the simplex repels: rounding noise
    is amplified like exp((E - b) t), so the drift bound can only hold on
    short horizons.  Checked: still tiny at t=5, visible at t=10, order one
    by t=15.  Drift is measured on the raw 3-component system, never
    projected away.
    """
    drifts = [sigma_drift(integrate("proportions", perturbed_b, (0.3, 0.3, 0.4), t_end=T))
              for T in (5.0, 10.0, 15.0)]
    assert drifts[0] < 1e-9
    assert 1e-6 < drifts[1] < 1e-2
    assert drifts[2] > 0.1


def test_sigma_drift_requires_proportions():
    tr = integrate("planar", GENERIC_A_PARAMS, (0.3, 0.3), t_end=1.0)
    with pytest.raises(ValueError):
        sigma_drift(tr)


def test_all_susceptible_start_enters_interior():
    tr = integrate("proportions", GENERIC_A_PARAMS, (1.0, 0.0, 0.0), t_end=0.05)
    assert np.all(tr.states[1:, 1] > 0.0)
    assert np.all(tr.states[1:, 2] > 0.0)


def test_population_matches_normalized_proportions():
    p = GENERIC_A_PARAMS
    trp = integrate("proportions", p, (0.3, 0.3, 0.4), t_end=50.0)
    trc = integrate("population", p, (3.0, 3.0, 4.0), t_end=50.0)
    props = trc.states / trc.states.sum(axis=1, keepdims=True)
    assert np.max(np.abs(props - trp.states)) < 1e-6


def test_population_underflow_halts():
    p = _with_d(SPECIAL_BISTABLE_PARAMS, 2.0)
    tr = integrate("population", p, (0.4, 0.3, 0.3), t_end=400.0)
    assert tr.halted is not None and "underflow" in tr.halted
    N = tr.states.sum(axis=1)
    assert N[-1] == pytest.approx(1e-300, rel=1e-6)
    assert tr.times[-1] < 400.0
    # late decay rate equals -(d + eps1 i* + eps2 r* - b) at the reached sink
    lnN = np.log(N)
    rate = (lnN[-1] - lnN[150]) / (tr.times[-1] - tr.times[150])
    assert rate == pytest.approx(-4.6178, abs=1e-3)


def test_population_overflow_halts():
    p = ModelParams(b=6.0, d=0.1, eps1=1.0, eps2=2.0, lam=0.7, alpha=0.5,
                    gamma=0.4, beta1=0.1, beta2=0.2)
    tr = integrate("population", p, (0.4, 0.3, 0.3), t_end=300.0)
    assert tr.halted is not None and "overflow" in tr.halted
    assert tr.states.sum(axis=1)[-1] == pytest.approx(1e300, rel=1e-6)


def test_population_requires_positive_start():
    with pytest.raises(ValueError):
        integrate("population", GENERIC_A_PARAMS, (0.0, 0.0, 0.0), t_end=1.0)


def test_omega_limit_generic_sink():
    res = omega_limit(GENERIC_A_PARAMS, PlanarState(0.3, 0.3))
    assert res.converged
    assert res.matched_rest_point is not None
    assert res.final_distance < 1e-6
    assert res.matched_rest_point.classification == "sink"


def test_omega_limit_strict_stall():
    """With the floor exit disabled and tight tolerances the integrator
    runs until the velocity event itself fires below 1e-10."""
    res = omega_limit(GENERIC_A_PARAMS, PlanarState(0.3, 0.3),
                      rtol=1e-12, atol=1e-14, floor_speed=0.0)
    assert res.reason == "velocity stall"
    assert res.final_speed <= 1.0000001e-10
    assert res.final_distance < 1e-6
    assert res.converged


def test_omega_limit_started_at_rest():
    from opensirs import find_rest_points

    sink = [rp for rp in find_rest_points(GENERIC_A_PARAMS) if rp.classification == "sink"][0]
    res = omega_limit(GENERIC_A_PARAMS, PlanarState(sink.s, sink.i))
    assert res.reason == "started at rest"
    assert res.final_time == 0.0
    assert res.converged


def test_omega_limit_rejects_outside_region():
    with pytest.raises(ValueError):
        omega_limit(GENERIC_A_PARAMS, PlanarState(0.9, 0.9))


def test_omega_limit_budget_exhausted():
    res = omega_limit(GENERIC_A_PARAMS, PlanarState(0.3, 0.3), max_time=0.5)
    assert not res.converged
    assert "max_time" in res.reason


def test_growth_threshold_frozen_values():
    """T = b/(d + eps1 i* + eps2 r*) at the generic sink, d swept by hand."""
    sink = (0.828541414898152, 0.086025937024012, 0.0854326480778362)
    E = GENERIC_A_PARAMS.eps1 * sink[1] + GENERIC_A_PARAMS.eps2 * sink[2]
    for d in (0.0, 0.5):
        p = _with_d(GENERIC_A_PARAMS, d)
        assert growth_threshold(p, sink) == pytest.approx(p.b / (d + E), rel=1e-12)
    assert growth_threshold(_with_d(GENERIC_A_PARAMS, 0.0), sink) == pytest.approx(
        1.16780941212643, rel=1e-9)
    assert growth_threshold(_with_d(GENERIC_A_PARAMS, 0.5), sink) == pytest.approx(
        0.396358138196034, rel=1e-9)


def test_growth_threshold_rejects_non_equilibrium():
    with pytest.raises(ValueError):
        growth_threshold(GENERIC_A_PARAMS, (0.3, 0.3, 0.4))


def test_verify_growth_three_outcomes():
    sink = (0.828541414898152, 0.086025937024012, 0.0854326480778362)
    E = GENERIC_A_PARAMS.eps1 * sink[1] + GENERIC_A_PARAMS.eps2 * sink[2]
    x0 = (0.4, 0.3, 0.3)

    rep = verify_growth(_with_d(GENERIC_A_PARAMS, 0.0), x0)
    assert (rep.predicted, rep.observed, rep.ok) == ("grows", "grows", True)
    assert rep.late_rate > 0.0

    rep = verify_growth(_with_d(GENERIC_A_PARAMS, 0.5), x0)
    assert (rep.predicted, rep.observed, rep.ok) == ("decays", "decays", True)
    assert rep.late_rate < 0.0

    rep = verify_growth(_with_d(GENERIC_A_PARAMS, GENERIC_A_PARAMS.b - E), x0)
    assert rep.inconclusive
    assert rep.ok is None and rep.observed is None
    assert rep.threshold == pytest.approx(1.0, abs=1e-9)


def test_verify_growth_special_case_decay():
    """b = 0 forces T = 0: any start near the endemic axis sink decays."""
    p = _with_d(SPECIAL_BISTABLE_PARAMS, 0.1)
    rep = verify_growth(p, (0.01, 0.5, 0.49))
    assert rep.threshold == 0.0
    assert (rep.predicted, rep.observed, rep.ok) == ("decays", "decays", True)
