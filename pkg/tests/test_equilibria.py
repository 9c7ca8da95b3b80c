"""Rest-point location, classification, and the invariant-axes thresholds."""

import numpy as np
import pytest

from opensirs import (
    ModelParams,
    SADDLE,
    SINK,
    SOURCE,
    SpecialCaseError,
    classify,
    degeneracy_scan,
    find_rest_points,
    jacobian,
    planar_rhs,
    special_case_report,
    trace_identity_check,
)

from conftest import (
    GENERIC_A_PARAMS,
    SPECIAL_BISTABLE_PARAMS,
    draw_origin_only_special,
    draw_positive_params,
)

# Hand values for the canonical invariant-axes instance
# (eps1=2, eps2=4, lam=1, alpha=1, beta=2.6):
#   s' = s(1.4 - 4s - 3i),  i' = i(1.0 - 3s - 2i)
# give rest points (0,0), (0.35,0), (0,0.5), (0.2,0.2) with eigenvalues
# {1.4, 1.0}, {-1.4, -0.05}, {-0.1, -1.0}, {(-1.2 +- sqrt(1.6))/2}.
SADDLE_EIGS = ((-1.2 + np.sqrt(1.6)) / 2.0, (-1.2 - np.sqrt(1.6)) / 2.0)


def _by_location(points):
    return {(round(rp.s, 9), round(rp.i, 9)): rp for rp in points}


def test_canonical_special_rest_points_frozen():
    pts = find_rest_points(SPECIAL_BISTABLE_PARAMS, region="D1")
    assert len(pts) == 4
    table = _by_location(pts)
    assert set(table) == {(0.0, 0.0), (0.35, 0.0), (0.0, 0.5), (0.2, 0.2)}

    origin = table[(0.0, 0.0)]
    assert origin.classification == SOURCE
    assert sorted(e.real for e in origin.eigenvalues) == pytest.approx([1.0, 1.4], abs=1e-12)

    axis_s = table[(0.35, 0.0)]
    assert axis_s.classification == SINK
    assert sorted(e.real for e in axis_s.eigenvalues) == pytest.approx([-1.4, -0.05], abs=1e-12)

    axis_i = table[(0.0, 0.5)]
    assert axis_i.classification == SINK
    assert sorted(e.real for e in axis_i.eigenvalues) == pytest.approx([-1.0, -0.1], abs=1e-12)

    saddle = table[(0.2, 0.2)]
    assert saddle.classification == SADDLE
    assert saddle.det == pytest.approx(-0.04, abs=1e-12)
    assert saddle.trace == pytest.approx(-1.2, abs=1e-12)
    got = sorted(e.real for e in saddle.eigenvalues)
    assert got == pytest.approx(sorted(SADDLE_EIGS), abs=1e-12)
    assert saddle.local_index == -1
    assert saddle.is_interior()
    assert not axis_s.is_interior()


def test_residuals_below_gate():
    rng = np.random.default_rng(21)
    for _ in range(25):
        p = draw_positive_params(rng)
        for rp in find_rest_points(p, region="plane"):
            f = planar_rhs(p, (rp.s, rp.i))
            assert float(np.max(np.abs(f))) < 1e-9
            assert rp.residual < 1e-9


def test_region_filter_is_a_subset():
    rng = np.random.default_rng(22)
    for _ in range(10):
        p = draw_positive_params(rng)
        inside = {(round(rp.s, 10), round(rp.i, 10)) for rp in find_rest_points(p, region="D1")}
        plane = {(round(rp.s, 10), round(rp.i, 10)) for rp in find_rest_points(p, region="plane")}
        assert inside <= plane
        for s, i in inside:
            assert s >= -1e-9 and i >= -1e-9 and s + i <= 1.0 + 1e-9


def test_jacobian_matches_central_differences():
    rng = np.random.default_rng(23)
    h = 1e-6
    for _ in range(20):
        p = draw_positive_params(rng)
        x = rng.uniform(0.05, 0.45, size=2)
        J = jacobian(p, x)
        fd = np.empty((2, 2))
        for col in range(2):
            e = np.zeros(2)
            e[col] = h
            fd[:, col] = (planar_rhs(p, x + e) - planar_rhs(p, x - e)) / (2.0 * h)
        scale = max(1.0, float(np.max(np.abs(J))))
        assert np.max(np.abs(J - fd)) <= 1e-6 * scale


def test_stored_jacobian_consistent_with_eigenvalues():
    p = GENERIC_A_PARAMS
    for rp in find_rest_points(p, region="D1"):
        eigs = np.linalg.eigvals(rp.jacobian)
        got = sorted(rp.eigenvalues, key=lambda z: (z.real, z.imag))
        ref = sorted(eigs, key=lambda z: (z.real, z.imag))
        assert np.allclose(got, ref, rtol=0.0, atol=1e-12)


def test_classify_rejects_nonzero_location():
    with pytest.raises(ValueError):
        classify(GENERIC_A_PARAMS, (0.5, 0.3))


def test_trace_identity_at_interior_points():
    rng = np.random.default_rng(24)
    checked = 0
    for _ in range(30):
        p = draw_positive_params(rng)
        for rp in find_rest_points(p, region="D1"):
            if rp.is_interior():
                assert trace_identity_check(p, rp) < 1e-9
                checked += 1
    assert checked >= 20


def test_special_report_frozen_thresholds():
    rep = special_case_report(SPECIAL_BISTABLE_PARAMS)
    assert rep.T0 == pytest.approx(1.4, abs=1e-12)
    assert rep.T1 == pytest.approx(1.0, abs=1e-12)
    assert rep.T2 == pytest.approx(-0.1, abs=1e-12)
    assert rep.T3 == pytest.approx(-0.05, abs=1e-12)
    assert rep.regime_label == "TwoBoundarySinksPlusSaddle"
    assert (rep.axis_s_point.s, rep.axis_s_point.i) == pytest.approx((0.35, 0.0), abs=1e-12)
    assert (rep.axis_i_point.s, rep.axis_i_point.i) == pytest.approx((0.0, 0.5), abs=1e-12)
    assert rep.axis_s_in_region and rep.axis_i_in_region


def test_special_report_threshold_formulas():
    """T0..T3 agree with direct evaluation of the defining expressions."""
    rng = np.random.default_rng(25)
    for _ in range(20):
        p = draw_origin_only_special(rng)
        rep = special_case_report(p)
        T0 = p.eps2 - p.beta
        T1 = p.eps2 - p.eps1 - p.alpha
        T2 = T0 + (p.eps1 - p.eps2 - p.lam) * T1 / (p.eps2 - p.eps1)
        T3 = T1 - (p.eps2 - p.lam) * T0 / p.eps2
        assert rep.T0 == pytest.approx(T0, rel=1e-12)
        assert rep.T1 == pytest.approx(T1, rel=1e-12)
        assert rep.T2 == pytest.approx(T2, rel=1e-12)
        assert rep.T3 == pytest.approx(T3, rel=1e-12)
        assert rep.regime_label == "OriginOnly"
        assert not (rep.axis_s_in_region or rep.axis_i_in_region)


def test_special_report_rejects_general_params():
    with pytest.raises(SpecialCaseError):
        special_case_report(GENERIC_A_PARAMS)


def test_origin_only_draws_have_single_region_rest_point():
    rng = np.random.default_rng(26)
    for _ in range(20):
        p = draw_origin_only_special(rng)
        pts = find_rest_points(p, region="D1")
        assert len(pts) == 1
        assert (pts[0].s, pts[0].i) == pytest.approx((0.0, 0.0), abs=1e-12)
        assert pts[0].classification == SINK


def test_degeneracy_scan_clean_instances_empty():
    assert degeneracy_scan(GENERIC_A_PARAMS) == []
    assert degeneracy_scan(SPECIAL_BISTABLE_PARAMS) == []


def test_degeneracy_scan_near_fold():
    """Bisect the two-sink collapse along b and catch the fold by |det|.

    Parameter bisection cannot push |det| to the 1e-12 classification
    threshold (|det| ~ sqrt of the parameter offset), so the scan is called
    with a loosened tolerance.
    """
    import warnings

    from opensirs import NearDegenerateWarning, bistable_special_instance, perturb_special_case

    base = perturb_special_case(bistable_special_instance(2.0, 4.0, 1.0), 1e-3)

    def n_interior(b):
        p = ModelParams(b=b, d=0.0, eps1=base.eps1, eps2=base.eps2, lam=base.lam,
                        alpha=base.alpha, gamma=base.gamma, beta1=base.beta1,
                        beta2=base.beta2)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NearDegenerateWarning)
            return p, sum(rp.is_interior() for rp in find_rest_points(p, region="D1"))

    lo, hi = base.b, 0.05
    assert n_interior(lo)[1] == 3
    assert n_interior(hi)[1] < 3
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if n_interior(mid)[1] == 3:
            lo = mid
        else:
            hi = mid
    p_fold, _ = n_interior(lo)
    with pytest.warns(NearDegenerateWarning):
        near = degeneracy_scan(p_fold, tol=1e-4)
    assert len(near) >= 1
    assert all(rp.is_interior() for rp in near)
