"""Geodesics, the transverse linear ODE, and the isometry action.

Three layers:

* fixed-step RK4 geodesic integration for any jet provider, with the two
  conserved quantities g(x', x') and g(x', e_s) sampled along the way;

* the linear second-order system u'' = f(t) u + A u on the fibre V, whose
  solutions parameterize the isometries

      F(t, s, v) = (t + p, s + q - <u'(t), 2 v + u(t)>, v + u(t))

  for any f-period p (the group law composes the translation parts and adds
  a Wronskian constant to q);

* the completeness variation: from a unit-t-speed base curve y and a
  transverse field w solving

      nabla^2 w = -R(y', w) y' - nabla_{y'} y' - (Q(w)/4) u,
      Q(w) = 6 <A w_V, w'_V> + 6 f g(w', w) + 2 f' g(w, w),  u = 2 e_s,

  the geodesic variation x(t, s) = exp_{y(t)}(s w(t)) straightens y out:
  x_tt(., 1) = 0, with x_tt + (s-1)(P a - s Q u / 4) = 0 at interior s
  (P a is the base acceleration parallel-transported up the s-geodesic).
  ``completeness_variation_check`` measures all three facts by finite
  differences of the numerically integrated variation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvature import christoffel, curvature_pack
from .errors import NumericalAbort
from .metrics import RoterMetric, RoterSpec

MAX_STEP = 1e-2
PERIOD_TOL = 1e-10
PERIOD_SAMPLES = 100
DOMAIN_SLACK = 1e-9


def _gamma_at(provider, x):
    return christoffel(provider.jet(np.asarray(x, dtype=float), order=1))


def _check_step(step: float):
    if not (0.0 < step <= MAX_STEP):
        raise ValueError(f"step must lie in (0, {MAX_STEP}]")


# --------------------------------------------------------------------------
# Geodesics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Sampled geodesic: parameter grid, points, velocities, invariants."""

    taus: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    speed_sq: np.ndarray
    s_momentum: np.ndarray

    def to_csv(self, path):
        k = self.points.shape[1] - 2
        cols = ["step", "tau", "t", "s"] + [f"v{i + 1}" for i in range(k)]
        cols += ["g_xdot_xdot", "g_xdot_ds"]
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for i in range(len(self.taus)):
                row = [f"{i:d}", f"{self.taus[i]:.17g}"]
                row += [f"{c:.17g}" for c in self.points[i]]
                row += [f"{self.speed_sq[i]:.17g}", f"{self.s_momentum[i]:.17g}"]
                fh.write(",".join(row) + "\n")


def integrate_geodesic(provider, x0, v0, span, step: float = 1e-3) -> Trajectory:
    """Fixed-step RK4 for x'' = -Gamma(x)(x', x') over span = (a, b)."""
    _check_step(step)
    a, b = float(span[0]), float(span[1])
    if not b > a:
        raise ValueError("span must satisfy b > a")
    n_steps = max(1, int(round((b - a) / step)))
    h = (b - a) / n_steps
    x = np.asarray(x0, dtype=float).copy()
    v = np.asarray(v0, dtype=float).copy()
    n = x.shape[0]

    def rhs(state):
        xs, vs = state[:n], state[n:]
        gam = _gamma_at(provider, xs)
        return np.concatenate([vs, -np.einsum("lij,i,j->l", gam, vs, vs)])

    taus = np.empty(n_steps + 1)
    points = np.empty((n_steps + 1, n))
    velocities = np.empty((n_steps + 1, n))
    state = np.concatenate([x, v])
    for k in range(n_steps + 1):
        taus[k] = a + k * h
        points[k] = state[:n]
        velocities[k] = state[n:]
        if not np.all(np.isfinite(state)):
            raise NumericalAbort(f"geodesic state became non-finite at step {k}")
        if k < n_steps:
            state = _rk4_step(rhs, state, h)

    gs = [provider.jet(p, order=0).g for p in points]
    speed_sq = np.array([v @ g @ v for g, v in zip(gs, velocities)])
    s_mom = np.array([(g @ v)[1] for g, v in zip(gs, velocities)])
    return Trajectory(taus, points, velocities, speed_sq, s_mom)


def _rk4_step(rhs, state, h):
    k1 = rhs(state)
    k2 = rhs(state + 0.5 * h * k1)
    k3 = rhs(state + 0.5 * h * k2)
    k4 = rhs(state + h * k3)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _rk4_step_t(rhs, t, state, h):
    k1 = rhs(t, state)
    k2 = rhs(t + 0.5 * h, state + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, state + 0.5 * h * k2)
    k4 = rhs(t + h, state + h * k3)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# --------------------------------------------------------------------------
# The transverse linear ODE u'' = f(t) u + A u
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OdeSolution:
    """Grid samples of one solution, with cubic Hermite evaluation."""

    spec: RoterSpec
    ts: np.ndarray
    us: np.ndarray
    udots: np.ndarray

    @property
    def domain(self) -> tuple:
        return float(self.ts[0]), float(self.ts[-1])

    def _acc(self, k: int) -> np.ndarray:
        return self.spec.profile(self.ts[k]) * self.us[k] + self.spec.A @ self.us[k]

    def value(self, t: float):
        """(u(t), u'(t)) by Hermite interpolation on the bracketing cell."""
        a, b = self.domain
        if t < a - DOMAIN_SLACK or t > b + DOMAIN_SLACK:
            raise ValueError(f"t = {t} outside the solution domain [{a}, {b}]")
        t = min(max(t, a), b)
        k = int(np.searchsorted(self.ts, t, side="right") - 1)
        k = min(max(k, 0), len(self.ts) - 2)
        h = self.ts[k + 1] - self.ts[k]
        th = (t - self.ts[k]) / h
        h00 = 2 * th**3 - 3 * th**2 + 1
        h10 = th**3 - 2 * th**2 + th
        h01 = -2 * th**3 + 3 * th**2
        h11 = th**3 - th**2
        u = (
            h00 * self.us[k]
            + h10 * h * self.udots[k]
            + h01 * self.us[k + 1]
            + h11 * h * self.udots[k + 1]
        )
        udot = (
            h00 * self.udots[k]
            + h10 * h * self._acc(k)
            + h01 * self.udots[k + 1]
            + h11 * h * self._acc(k + 1)
        )
        return u, udot


def solve_E_ode(spec: RoterSpec, u0, udot0, span, step: float = 1e-3) -> OdeSolution:
    """Integrate u'' = f(t) u + A u with fixed-step RK4 from span[0]."""
    _check_step(step)
    a, b = float(span[0]), float(span[1])
    if not b > a:
        raise ValueError("span must satisfy b > a")
    d = spec.inner.dim
    u0 = np.asarray(u0, dtype=float)
    udot0 = np.asarray(udot0, dtype=float)
    if u0.shape != (d,) or udot0.shape != (d,):
        raise ValueError(f"initial data must be vectors of length {d}")
    n_steps = max(1, int(round((b - a) / step)))
    h = (b - a) / n_steps

    def rhs(t, y):
        u, ud = y[:d], y[d:]
        return np.concatenate([ud, spec.profile(t) * u + spec.A @ u])

    ts = a + h * np.arange(n_steps + 1)
    us = np.empty((n_steps + 1, d))
    uds = np.empty((n_steps + 1, d))
    y = np.concatenate([u0, udot0])
    for k in range(n_steps + 1):
        us[k], uds[k] = y[:d], y[d:]
        if not np.all(np.isfinite(y)):
            raise NumericalAbort(f"ODE state became non-finite at t = {ts[k]}")
        if k < n_steps:
            y = _rk4_step_t(rhs, ts[k], y, h)
    return OdeSolution(spec, ts, us, uds)


def wronskian(spec: RoterSpec, sol_a: OdeSolution, sol_b: OdeSolution, t: float) -> float:
    """<a', b> - <a, b'> in the fibre inner product (constant in t)."""
    ua, uda = sol_a.value(t)
    ub, udb = sol_b.value(t)
    G = spec.inner.matrix
    return float(uda @ G @ ub - ua @ G @ udb)


# --------------------------------------------------------------------------
# The isometry group
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupElement:
    """(p, q, u): t-shift by an f-period, s-shift, and a fibre solution."""

    spec: RoterSpec
    p: float
    q: float
    solution: OdeSolution

    def __post_init__(self):
        if self.p != 0.0:
            a, b = self.solution.domain
            ts = np.linspace(a, b, PERIOD_SAMPLES)
            f = self.spec.profile
            worst = max(abs(f(t + self.p) - f(t)) for t in ts)
            if worst > PERIOD_TOL:
                raise ValueError(
                    f"p = {self.p} is not a period of the profile "
                    f"(max |f(t+p)-f(t)| = {worst:.3e})"
                )


def identity_element(spec: RoterSpec, span, step: float = 1e-3) -> GroupElement:
    d = spec.inner.dim
    zero = np.zeros(d)
    return GroupElement(spec, 0.0, 0.0, solve_E_ode(spec, zero, zero, span, step))


def act(elem: GroupElement, x) -> np.ndarray:
    """Apply the isometry to a chart point (t, s, v)."""
    x = np.asarray(x, dtype=float)
    t, s, v = x[0], x[1], x[2:]
    u, udot = elem.solution.value(t)
    G = elem.spec.inner.matrix
    out = np.empty_like(x)
    out[0] = t + elem.p
    out[1] = s + elem.q - float(udot @ G @ (2.0 * v + u))
    out[2:] = v + u
    return out


def compose(e1: GroupElement, e2: GroupElement, step: float = 1e-3) -> GroupElement:
    """The element acting as e1 after e2."""
    if e1.spec is not e2.spec and e1.spec != e2.spec:
        raise ValueError("group elements must share construction data")
    spec = e1.spec
    a1, b1 = e1.solution.domain
    a2, b2 = e2.solution.domain
    a = max(a2, a1 - e2.p)
    b = min(b2, b1 - e2.p)
    if not b > a:
        raise ValueError("composed solution has an empty domain")
    G = spec.inner.matrix

    def combined(t):
        u2, ud2 = e2.solution.value(t)
        u1, ud1 = e1.solution.value(t + e2.p)
        return u2 + u1, ud2 + ud1

    tc = 0.5 * (a + b)
    u2c, ud2c = e2.solution.value(tc)
    u1c, ud1c = e1.solution.value(tc + e2.p)
    c = float(ud1c @ G @ u2c - u1c @ G @ ud2c)

    u0, udot0 = combined(a)
    sol = solve_E_ode(spec, u0, udot0, (a, b), step)
    return GroupElement(spec, e1.p + e2.p, e1.q + e2.q - c, sol)


def inverse(e: GroupElement, step: float = 1e-3) -> GroupElement:
    a, b = e.solution.domain
    ua, uda = e.solution.value(a)
    sol = solve_E_ode(e.spec, -ua, -uda, (a + e.p, b + e.p), step)
    return GroupElement(e.spec, -e.p, -e.q, sol)


def action_differential(elem: GroupElement, x) -> np.ndarray:
    """The Jacobian J[i, j] = dF^i/dx^j of the action at x."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    t, v = x[0], x[2:]
    u, udot = elem.solution.value(t)
    spec = elem.spec
    G = spec.inner.matrix
    uddot = spec.profile(t) * u + spec.A @ u
    J = np.zeros((n, n))
    J[0, 0] = 1.0
    J[1, 0] = -float(uddot @ G @ (2.0 * v + u)) - float(udot @ G @ udot)
    J[1, 1] = 1.0
    J[1, 2:] = -2.0 * (G @ udot)
    J[2:, 0] = udot
    J[2:, 2:] = np.eye(n - 2)
    return J


def pullback_residual(elem: GroupElement, provider, x) -> float:
    """max |J' g(F x) J - g(x)| at the point x."""
    x = np.asarray(x, dtype=float)
    y = act(elem, x)
    J = action_differential(elem, x)
    g_x = provider.jet(x, order=0).g
    g_y = provider.jet(y, order=0).g
    return float(np.max(np.abs(J.T @ g_y @ J - g_x)))


# --------------------------------------------------------------------------
# Completeness variation
# --------------------------------------------------------------------------


def parallel_transport_quadratic(provider, pts, vec, tau0: float, steps: int = 2):
    """Transport ``vec`` to tau = 0 along the quadratic through three points.

    ``pts = (x_minus, x_center, x_plus)`` are samples at tau = -1, 0, +1;
    the transport starts at parameter ``tau0``.
    """
    xm, x0, xp = (np.asarray(p, dtype=float) for p in pts)
    lin = 0.5 * (xp - xm)
    quad = 0.5 * (xp - 2.0 * x0 + xm)

    def curve(tau):
        return x0 + tau * lin + tau * tau * quad

    def speed(tau):
        return lin + 2.0 * tau * quad

    def rhs(tau, v):
        gam = _gamma_at(provider, curve(tau))
        return -np.einsum("lij,i,j->l", gam, speed(tau), v)

    h = (0.0 - tau0) / steps
    v = np.asarray(vec, dtype=float).copy()
    tau = tau0
    for _ in range(steps):
        v = _rk4_step_t(rhs, tau, v, h)
        tau += h
    return v


def _exp_with_transport(provider, x0, w0, carried, steps: int):
    """s-geodesic from (x0, w0) carrying a parallel vector; returns samples
    (x, xdot, carried) at s = 1/4, 1/2, 3/4, 1."""
    n = x0.shape[0]
    h = 1.0 / steps

    def rhs(state):
        x, v, c = state[:n], state[n : 2 * n], state[2 * n :]
        gam = _gamma_at(provider, x)
        acc = -np.einsum("lij,i,j->l", gam, v, v)
        cdot = -np.einsum("lij,i,j->l", gam, v, c)
        return np.concatenate([v, acc, cdot])

    state = np.concatenate([x0, w0, carried])
    record = {}
    marks = {steps // 4: 0, steps // 2: 1, (3 * steps) // 4: 2, steps: 3}
    for k in range(1, steps + 1):
        state = _rk4_step(rhs, state, h)
        if k in marks:
            record[marks[k]] = (
                state[:n].copy(),
                state[n : 2 * n].copy(),
                state[2 * n :].copy(),
            )
    if not np.all(np.isfinite(state)):
        raise NumericalAbort("variation geodesic became non-finite")
    return [record[i] for i in range(4)]


def completeness_variation_check(
    spec: RoterSpec,
    y_func,
    w0,
    wdot0,
    *,
    t_max: float = 3.0,
    stations: int = 31,
    h: float = 1e-3,
    exp_steps: int = 200,
) -> dict:
    """Residuals of the geodesic-variation construction.

    ``y_func(t)`` must return (point, velocity) with velocity[0] = 1.  The
    returned dict carries the worst straightening residual at s = 1, the
    worst interior-identity residual at s in {1/4, 1/2, 3/4}, and the spread
    of the conserved quantity Q across s, all absolute, together with the
    magnitudes the acceleration field and Q actually attain (callers judging
    strongly growing profiles should divide by those scales).
    """
    provider = RoterMetric(spec)
    n = spec.n
    G = spec.inner.matrix
    A = spec.A
    f = spec.profile
    u_null = np.zeros(n)
    u_null[1] = 2.0

    w0 = np.asarray(w0, dtype=float).copy()
    wdot0 = np.asarray(wdot0, dtype=float).copy()
    w0[0] = 0.0
    wdot0[0] = 0.0

    def accel(t):
        _, vm = y_func(t - 1e-5)
        _, vp = y_func(t + 1e-5)
        x, v = y_func(t)
        gam = _gamma_at(provider, x)
        return (vp - vm) / 2e-5 + np.einsum("lij,i,j->l", gam, v, v)

    # --- integrate the w-ODE on a grid aligned with the stations ---
    t_lo = -2.0 * h
    n_steps = int(round((t_max + 2.0 * h - t_lo) / h))
    ts = t_lo + h * np.arange(n_steps + 1)

    def w_rhs(t, state):
        w, om = state[:n], state[n:]
        x, v = y_func(t)
        pack = curvature_pack(provider.jet(x, order=2))
        wdot = om - np.einsum("lij,i,j->l", pack.gamma, v, w)
        r_term = np.einsum("lijk,i,j,k->l", pack.riemann13, v, w, v)
        q = (
            8.0 * float((A @ w[2:]) @ G @ om[2:])
            + 8.0 * f(t) * float(om @ pack.g @ w)
            + 2.0 * f.derivative(t, 1) * float(w @ pack.g @ w)
        )
        nabla_om = -r_term - accel(t) - 0.25 * q * u_null
        omdot = nabla_om - np.einsum("lij,i,j->l", pack.gamma, v, om)
        return np.concatenate([wdot, omdot]), q

    ws = np.empty((n_steps + 1, n))
    oms = np.empty((n_steps + 1, n))
    qs = np.empty(n_steps + 1)
    state = np.concatenate([w0, wdot0])
    for k in range(n_steps + 1):
        ws[k], oms[k] = state[:n], state[n:]
        qs[k] = w_rhs(ts[k], state)[1]
        if not np.all(np.isfinite(state)):
            raise NumericalAbort("w-ODE state became non-finite")
        if k < n_steps:
            state = _rk4_step_t(lambda t, y: w_rhs(t, y)[0], ts[k], state, h)

    # --- geodesic variation at each station ---
    s_vals = np.array([0.25, 0.5, 0.75, 1.0])
    station_ts = np.linspace(0.0, t_max, stations)
    geo_res = 0.0
    mid_res = 0.0
    q_spread = 0.0
    var_scale = 0.0
    q_scale = 0.0
    for t_j in station_ts:
        k_c = int(round((t_j - t_lo) / h))
        samples = {}
        for off, k_off in ((-1, k_c - 2), (0, k_c), (1, k_c + 2)):
            t_off = ts[k_off]
            x0 = y_func(t_off)[0]
            samples[off] = _exp_with_transport(
                provider, x0, ws[k_off], accel(t_off), exp_steps
            )
        q_vals = [qs[k_c]]
        for si, s in enumerate(s_vals):
            xm, x0c, xp = (samples[off][si][0] for off in (-1, 0, 1))
            vp = (xp - x0c) / (2.0 * h)
            vm = (x0c - xm) / (2.0 * h)
            pv_p = parallel_transport_quadratic(provider, (xm, x0c, xp), vp, 0.5)
            pv_m = parallel_transport_quadratic(provider, (xm, x0c, xp), vm, -0.5)
            x_tt = (pv_p - pv_m) / (2.0 * h)

            # Q from t-differences of the first integrals of the s-velocity
            alphas = []
            betas = []
            for off in (-1, 0, 1):
                x_s, xdot_s = samples[off][si][0], samples[off][si][1]
                g_here = provider.jet(x_s, order=0).g
                alphas.append(float((A @ xdot_s[2:]) @ G @ xdot_s[2:]))
                betas.append(float(xdot_s @ g_here @ xdot_s))
            alpha_dot = (alphas[2] - alphas[0]) / (4.0 * h)
            beta_dot = (betas[2] - betas[0]) / (4.0 * h)
            q_s = (
                4.0 * alpha_dot
                + 4.0 * f(t_j) * beta_dot
                + 2.0 * f.derivative(t_j, 1) * betas[1]
            )
            q_vals.append(q_s)

            if s == 1.0:
                geo_res = max(geo_res, float(np.max(np.abs(x_tt))))
            else:
                var_scale = max(var_scale, float(np.max(np.abs(x_tt))))
                carried = samples[0][si][2]
                identity = x_tt + (s - 1.0) * (carried - s * q_s * u_null / 4.0)
                mid_res = max(mid_res, float(np.max(np.abs(identity))))
        q_spread = max(q_spread, float(max(q_vals) - min(q_vals)))
        q_scale = max(q_scale, float(max(abs(q) for q in q_vals)))

    return {
        "geodesic_residual": geo_res,
        "intermediate_residual": mid_res,
        "q_spread": q_spread,
        "variation_scale": var_scale,
        "q_scale": q_scale,
    }
