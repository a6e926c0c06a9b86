"""Geodesics, the transverse linear ODE, and the isometry group."""

import numpy as np
import pytest

from ecsw.dynamics import (
    MAX_STEP,
    GroupElement,
    act,
    compose,
    identity_element,
    integrate_geodesic,
    inverse,
    parallel_transport_quadratic,
    pullback_residual,
    solve_E_ode,
    wronskian,
)
from ecsw.metrics import RoterMetric, SinusoidProfile
from tests.conftest import CUBIC, make_spec

# The transverse ODE has exponentially growing modes, so elements that live
# on long domains (period shifts plus inverses) are seeded small to keep the
# far ends of their solutions in the well-conditioned range.
LONG_DOMAIN_SCALE = 1e-8
SHORT_DOMAIN_SCALE = 1e-3


def _element(spec, rng, domain, p, scale):
    d = spec.n - 2
    sol = solve_E_ode(
        spec,
        rng.uniform(-1.0, 1.0, size=d) * scale,
        rng.uniform(-1.0, 1.0, size=d) * scale,
        domain,
    )
    return GroupElement(spec, p, float(rng.uniform(-1.0, 1.0)), sol)


# --- geodesic integration -------------------------------------------------------


def test_rk4_is_fourth_order(n4_metric):
    x0 = np.array([0.3, -0.5, 1.2, 0.7])
    v0 = np.array([0.8, 0.4, -0.9, 0.6])
    ref = integrate_geodesic(n4_metric, x0, v0, (0.0, 2.0), step=2.5e-4).points[-1]
    coarse = integrate_geodesic(n4_metric, x0, v0, (0.0, 2.0), step=8e-3).points[-1]
    fine = integrate_geodesic(n4_metric, x0, v0, (0.0, 2.0), step=4e-3).points[-1]
    ratio = np.max(np.abs(coarse - ref)) / np.max(np.abs(fine - ref))
    assert 14.0 < ratio < 18.0  # halving the step divides the error by ~2^4


def test_constant_t_line_is_geodesic(n4_metric, rng):
    x0 = rng.uniform(-1.0, 1.0, size=4)
    e_s = np.array([0.0, 1.0, 0.0, 0.0])
    traj = integrate_geodesic(n4_metric, x0, e_s, (0.0, 2.0), step=1e-3)
    expect = x0[None, :] + np.outer(traj.taus, e_s)
    assert np.max(np.abs(traj.points - expect)) < 1e-12
    # the direction is null and carries no transverse momentum, exactly
    assert np.max(np.abs(traj.speed_sq)) == 0.0
    assert np.max(np.abs(traj.s_momentum)) == 0.0


def test_speed_and_momentum_are_conserved(n4_metric, rng):
    x0 = rng.uniform(-1.0, 1.0, size=4)
    v0 = rng.uniform(-1.0, 1.0, size=4)
    v0[0] = 0.2
    traj = integrate_geodesic(n4_metric, x0, v0, (0.0, 3.0), step=1e-3)
    assert np.max(traj.speed_sq) - np.min(traj.speed_sq) < 1e-10
    assert np.max(traj.s_momentum) - np.min(traj.s_momentum) < 1e-10


def test_null_direction_transports_to_itself(n4_metric, rng):
    x0 = rng.uniform(-1.0, 1.0, size=4)
    pts = (
        x0 - 0.1 * rng.standard_normal(4),
        x0,
        x0 + 0.1 * rng.standard_normal(4),
    )
    e_s = np.array([0.0, 1.0, 0.0, 0.0])
    out = parallel_transport_quadratic(n4_metric, pts, e_s, 1.0)
    np.testing.assert_array_equal(out, e_s)


def test_trajectory_csv_round_trip(n4_metric, tmp_path):
    traj = integrate_geodesic(
        n4_metric, np.zeros(4), np.array([0.2, 1.0, 0.1, 0.0]), (0.0, 0.1)
    )
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0].startswith("step,tau,t,s,v1,v2")
    assert len(rows) == len(traj.taus) + 1
    last = np.array([float(c) for c in rows[-1].split(",")[2:6]])
    np.testing.assert_allclose(last, traj.points[-1], rtol=1e-15)


def test_step_guard():
    metric = RoterMetric(make_spec(4, SinusoidProfile()))
    with pytest.raises(ValueError, match="step"):
        integrate_geodesic(metric, np.zeros(4), np.ones(4), (0.0, 1.0),
                           step=2 * MAX_STEP)
    with pytest.raises(ValueError, match="span"):
        integrate_geodesic(metric, np.zeros(4), np.ones(4), (1.0, 1.0))


# --- the transverse linear ODE ----------------------------------------------------


def test_wronskian_is_constant(n4_spec, rng):
    sa = solve_E_ode(n4_spec, rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2), (0.0, 2.0))
    sb = solve_E_ode(n4_spec, rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2), (0.0, 2.0))
    values = [wronskian(n4_spec, sa, sb, t) for t in (0.0, 0.7, 1.3, 2.0)]
    assert max(values) - min(values) < 1e-10
    assert abs(wronskian(n4_spec, sa, sb, 1.0) + wronskian(n4_spec, sb, sa, 1.0)) < 1e-14


def test_solution_space_has_full_dimension(n4_spec):
    # initial data (u, u') at t=0 maps to data at t=1 with trivial kernel,
    # so the space of solutions keeps dimension 2 (n - 2) = 4
    d = 2
    cols = []
    for k in range(2 * d):
        u0 = np.zeros(d)
        ud0 = np.zeros(d)
        (u0 if k < d else ud0)[k % d] = 1.0
        sol = solve_E_ode(n4_spec, u0, ud0, (0.0, 1.0))
        u1, ud1 = sol.value(1.0)
        cols.append(np.concatenate([u1, ud1]))
    assert abs(np.linalg.det(np.stack(cols, axis=1))) > 1e-3


def test_interpolation_matches_refined_grid(n4_spec, rng):
    u0 = rng.uniform(-1.0, 1.0, size=2)
    ud0 = rng.uniform(-1.0, 1.0, size=2)
    coarse = solve_E_ode(n4_spec, u0, ud0, (0.0, 2.0), step=4e-3)
    fine = solve_E_ode(n4_spec, u0, ud0, (0.0, 2.0), step=5e-4)
    for t in (0.3141, 0.9999, 1.7321):
        uc, udc = coarse.value(t)
        uf, udf = fine.value(t)
        assert np.max(np.abs(uc - uf)) < 1e-10
        assert np.max(np.abs(udc - udf)) < 1e-9


def test_ode_guards(n4_spec):
    with pytest.raises(ValueError, match="length"):
        solve_E_ode(n4_spec, np.zeros(3), np.zeros(3), (0.0, 1.0))
    with pytest.raises(ValueError, match="span"):
        solve_E_ode(n4_spec, np.zeros(2), np.zeros(2), (1.0, 0.0))
    sol = solve_E_ode(n4_spec, np.ones(2), np.zeros(2), (0.0, 1.0))
    with pytest.raises(ValueError, match="domain"):
        sol.value(2.0)


# --- the isometry group ------------------------------------------------------------


def test_identity_element_fixes_points(n4_spec, rng):
    ident = identity_element(n4_spec, (-1.0, 1.0))
    for _ in range(3):
        x = rng.uniform(-0.9, 0.9, size=4)
        np.testing.assert_array_equal(act(ident, x), x)


def test_period_validation(n4_spec):
    sol = solve_E_ode(n4_spec, np.zeros(2), np.zeros(2), (-1.0, 1.0))
    with pytest.raises(ValueError, match="period"):
        GroupElement(n4_spec, 1.0, 0.0, sol)
    # a full period of the profile is accepted
    GroupElement(n4_spec, n4_spec.profile.period, 0.0, sol)


def test_group_axioms_periodic_profile(n4_spec, n4_metric, rng):
    period = n4_spec.profile.period
    domain = (-0.5 - period, 0.5 + 2.0 * period + 0.3)
    g1 = _element(n4_spec, rng, domain, 0.0, LONG_DOMAIN_SCALE)
    g2 = _element(n4_spec, rng, domain, period, LONG_DOMAIN_SCALE)
    g3 = _element(n4_spec, rng, domain, 0.0, LONG_DOMAIN_SCALE)
    for _ in range(3):
        x = rng.uniform(-0.5, 0.5, size=4)
        hom = act(compose(g1, g2), x) - act(g1, act(g2, x))
        assert np.max(np.abs(hom)) < 1e-10
        left = act(compose(compose(g1, g2), g3), x)
        right = act(compose(g1, compose(g2, g3)), x)
        assert np.max(np.abs(left - right)) < 1e-10
        assert np.max(np.abs(act(inverse(g2), act(g2, x)) - x)) < 1e-10
        assert pullback_residual(g1, n4_metric, x) < 1e-10
        assert pullback_residual(g2, n4_metric, x) < 1e-10


def test_group_axioms_aperiodic_profile(rng):
    spec = make_spec(4, CUBIC)
    metric = RoterMetric(spec)
    domain = (-1.1, 1.1)
    h1 = _element(spec, rng, domain, 0.0, SHORT_DOMAIN_SCALE)
    h2 = _element(spec, rng, domain, 0.0, SHORT_DOMAIN_SCALE)
    for _ in range(3):
        x = rng.uniform(-0.5, 0.5, size=4)
        hom = act(compose(h1, h2), x) - act(h1, act(h2, x))
        assert np.max(np.abs(hom)) < 1e-10
        assert np.max(np.abs(act(inverse(h1), act(h1, x)) - x)) < 1e-10
        assert pullback_residual(h1, metric, x) < 1e-10
