"""Metric jet providers.

A *jet* at a chart point is the metric component matrix together with its
coordinate partial derivatives up to order 3.  Index convention: derivative
axes come first, so ``dg[k, i, j] = d_k g_ij``, ``d2g[k, l, i, j] =
d_k d_l g_ij``, and so on.

The main provider is the block family

    g = kappa dt^2 + dt ds + <,>   on R^2 x V,
    kappa(t, v) = f(t) <v, v> + <A v, v>,

in coordinates (t, s, v^1, ..., v^{n-2}) with index 0 = t and 1 = s, where
``dt ds`` stands for the symmetric product (so g_ts = 1/2).  Its jets are
exact closed forms: kappa is quadratic in v and smooth in t, and g_tt is the
only component with nonzero derivatives.  Oracle fixtures (flat, constant
curvature, random polynomial perturbation) and a finite-difference
cross-check complete the module.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import NumericalAbort
from .tensors import FibreMetric

# Tolerance for validating user-supplied construction data (self-adjointness
# and tracelessness of A): inputs are exact-ish matrices, so this is tight.
SPEC_TOL = 1e-12

# Admissible central-difference steps for the jet oracle.
FD_STEP_MIN = 1e-5
FD_STEP_MAX = 1e-2


# --------------------------------------------------------------------------
# Scalar profiles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PolynomialProfile:
    """f(t) = sum_k coeffs[k] t^k (ascending order)."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def derivative(self, t: float, order: int = 0) -> float:
        c = np.asarray(self.coeffs)
        if order > 0:
            c = npoly.polyder(c, m=order)
        return float(npoly.polyval(t, c))

    def __call__(self, t: float) -> float:
        return self.derivative(t, 0)

    @property
    def nonconstant(self) -> bool:
        return any(c != 0.0 for c in self.coeffs[1:])


@dataclass(frozen=True)
class SinusoidProfile:
    """f(t) = amplitude * sin(frequency * t + phase)."""

    amplitude: float = 1.0
    frequency: float = 1.0
    phase: float = 0.0

    def derivative(self, t: float, order: int = 0) -> float:
        # d^k/dt^k sin(w t + p) = w^k sin(w t + p + k pi/2)
        w = self.frequency
        return float(
            self.amplitude * w**order * np.sin(w * t + self.phase + order * np.pi / 2.0)
        )

    def __call__(self, t: float) -> float:
        return self.derivative(t, 0)

    @property
    def nonconstant(self) -> bool:
        return self.amplitude != 0.0 and self.frequency != 0.0

    @property
    def period(self) -> float:
        """The fundamental period 2 pi / |frequency|."""
        return float(2.0 * np.pi / abs(self.frequency))


@dataclass(frozen=True)
class ExponentialProfile:
    """f(t) = amplitude * exp(rate * t)."""

    amplitude: float = 1.0
    rate: float = 1.0

    def derivative(self, t: float, order: int = 0) -> float:
        with np.errstate(over="ignore"):
            return float(self.amplitude * self.rate**order * np.exp(self.rate * t))

    def __call__(self, t: float) -> float:
        return self.derivative(t, 0)

    @property
    def nonconstant(self) -> bool:
        return self.amplitude != 0.0 and self.rate != 0.0


# --------------------------------------------------------------------------
# Construction data and jets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RoterSpec:
    """Construction data (V-inner product, operator A, scalar profile).

    A must be nonzero, traceless, and self-adjoint relative to the inner
    product; f must be nonconstant.  Violations raise ValueError naming the
    failed invariant.
    """

    inner: FibreMetric
    A: np.ndarray
    profile: object

    def __post_init__(self):
        a = np.asarray(self.A, dtype=float)
        object.__setattr__(self, "A", a)
        d = self.inner.dim
        if a.shape != (d, d):
            raise ValueError(f"A must be {d}x{d} to match the inner product")
        if d < 2:
            raise ValueError("dimension n = dim V + 2 must be at least 4")
        m = self.inner.matrix @ a
        if np.max(np.abs(m - m.T)) > SPEC_TOL:
            raise ValueError("A is not self-adjoint relative to the inner product")
        if abs(np.trace(a)) > SPEC_TOL:
            raise ValueError("A is not traceless")
        if not np.any(a):
            raise ValueError("A must be nonzero")
        if not getattr(self.profile, "nonconstant", False):
            raise ValueError("profile f must be nonconstant")

    @property
    def n(self) -> int:
        return self.inner.dim + 2


@dataclass(frozen=True)
class MetricJet:
    """Metric components and partials (derivative axes first) at one point."""

    point: np.ndarray
    g: np.ndarray
    dg: np.ndarray | None = None
    d2g: np.ndarray | None = None
    d3g: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.g.shape[0]


def _check_point(point, n):
    p = np.asarray(point, dtype=float)
    if p.shape != (n,):
        raise ValueError(f"point must have length {n}, got shape {p.shape}")
    return p


class RoterMetric:
    """Exact jets of g = kappa dt^2 + dt ds + <,> for a given spec."""

    def __init__(self, spec: RoterSpec):
        self.spec = spec
        self.G = spec.inner.matrix
        self.A = spec.A
        # M = G A is symmetric by self-adjointness; kappa = f <v,v> + v' M v.
        self.M = self.G @ spec.A

    @property
    def dim(self) -> int:
        return self.spec.n

    def kappa(self, t: float, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(self.spec.profile(t) * (v @ self.G @ v) + v @ self.M @ v)

    def jet(self, point, order: int = 3) -> MetricJet:
        n = self.dim
        p = _check_point(point, n)
        t, v = p[0], p[2:]
        f = [self.spec.profile.derivative(t, k) for k in range(order + 1)]
        if not all(np.isfinite(fk) for fk in f):
            raise NumericalAbort(f"profile jet is not finite at t={float(t):g}")
        vGv = float(v @ self.G @ v)
        Gv = self.G @ v

        g = np.zeros((n, n))
        g[0, 0] = f[0] * vGv + float(v @ self.M @ v)
        g[0, 1] = g[1, 0] = 0.5
        g[2:, 2:] = self.G
        if order == 0:
            return MetricJet(p, g)

        dg = np.zeros((n, n, n))
        dg[0, 0, 0] = f[1] * vGv
        dg[2:, 0, 0] = 2.0 * (f[0] * Gv + self.M @ v)
        if order == 1:
            return MetricJet(p, g, dg)

        d2g = np.zeros((n, n, n, n))
        d2g[0, 0, 0, 0] = f[2] * vGv
        d2g[0, 2:, 0, 0] = d2g[2:, 0, 0, 0] = 2.0 * f[1] * Gv
        d2g[2:, 2:, 0, 0] = 2.0 * (f[0] * self.G + self.M)
        if order == 2:
            return MetricJet(p, g, dg, d2g)

        d3g = np.zeros((n, n, n, n, n))
        d3g[0, 0, 0, 0, 0] = f[3] * vGv
        d3g[0, 0, 2:, 0, 0] = d3g[0, 2:, 0, 0, 0] = d3g[2:, 0, 0, 0, 0] = 2.0 * f[2] * Gv
        twoG = 2.0 * f[1] * self.G
        d3g[0, 2:, 2:, 0, 0] = d3g[2:, 0, 2:, 0, 0] = d3g[2:, 2:, 0, 0, 0] = twoG
        return MetricJet(p, g, dg, d2g, d3g)


class ConstantCurvatureMetric:
    """g_ij = delta_ij / (1 + (K/4)|x|^2)^2, constant sectional curvature K."""

    def __init__(self, K: float, dim: int):
        if dim < 4:
            raise ValueError("dimension must be at least 4")
        self.K = float(K)
        self._dim = int(dim)

    @property
    def dim(self) -> int:
        return self._dim

    def jet(self, point, order: int = 3) -> MetricJet:
        n = self._dim
        x = _check_point(point, n)
        K = self.K
        phi = 1.0 + 0.25 * K * float(x @ x)
        if phi <= 1e-6:
            raise ValueError("conformal factor too close to zero at this point")
        eye = np.eye(n)
        u = phi**-2
        g = u * eye
        if order == 0:
            return MetricJet(x, g)

        # u = phi^{-2} with phi_k = (K/2) x_k; all derivatives in closed form.
        du = -K * phi**-3 * x
        dg = np.einsum("k,ij->kij", du, eye)
        if order == 1:
            return MetricJet(x, g, dg)

        d2u = 1.5 * K**2 * phi**-4 * np.outer(x, x) - K * phi**-3 * eye
        d2g = np.einsum("kl,ij->klij", d2u, eye)
        if order == 2:
            return MetricJet(x, g, dg, d2g)

        d3u = -3.0 * K**3 * phi**-5 * np.einsum("k,l,m->klm", x, x, x)
        sym = (
            np.einsum("km,l->klm", eye, x)
            + np.einsum("lm,k->klm", eye, x)
            + np.einsum("kl,m->klm", eye, x)
        )
        d3u += 1.5 * K**2 * phi**-4 * sym
        d3g = np.einsum("klm,ij->klmij", d3u, eye)
        return MetricJet(x, g, dg, d2g, d3g)


@lru_cache(maxsize=None)
def _monomial_exponents(n: int, degree: int):
    """Exponent tuples of all monomials in n variables of total degree <= degree."""
    out = []
    for total in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), total):
            alpha = [0] * n
            for i in combo:
                alpha[i] += 1
            out.append(tuple(alpha))
    return tuple(out)


def _falling(a: int, b: int) -> float:
    r = 1.0
    for i in range(b):
        r *= a - i
    return r


class PerturbedFlatMetric:
    """Flat metric plus a seeded polynomial perturbation with exact jets.

    g(x) = I + amplitude * P(x) with P_ij a symmetric matrix of polynomials
    of degree <= 3; the coefficients are drawn once from the seed, so equal
    seeds give bitwise-identical providers.
    """

    def __init__(self, dim: int, amplitude: float, seed: int, degree: int = 3):
        if dim < 4:
            raise ValueError("dimension must be at least 4")
        self._dim = int(dim)
        self.amplitude = float(amplitude)
        self.degree = int(degree)
        self.exponents = np.array(_monomial_exponents(self._dim, self.degree))
        rng = np.random.default_rng(seed)
        raw = rng.uniform(-1.0, 1.0, size=(len(self.exponents), self._dim, self._dim))
        self.coeffs = 0.5 * (raw + raw.transpose(0, 2, 1))

    @property
    def dim(self) -> int:
        return self._dim

    def _eval(self, x, deriv=()):
        """Sum of coeffs[m] * D_deriv x^alpha_m over all monomials m."""
        counts = np.zeros(self._dim, dtype=int)
        for k in deriv:
            counts[k] += 1
        vals = np.empty(len(self.exponents))
        for m, alpha in enumerate(self.exponents):
            if np.any(counts > alpha):
                vals[m] = 0.0
                continue
            v = 1.0
            for i in range(self._dim):
                v *= _falling(int(alpha[i]), int(counts[i])) * x[i] ** int(
                    alpha[i] - counts[i]
                )
            vals[m] = v
        return np.einsum("m,mij->ij", vals, self.coeffs)

    def jet(self, point, order: int = 3) -> MetricJet:
        n = self._dim
        x = _check_point(point, n)
        g = np.eye(n) + self.amplitude * self._eval(x)
        if abs(np.linalg.det(g)) <= 1e-12:
            raise ValueError("perturbed metric is degenerate at this point")
        if order == 0:
            return MetricJet(x, g)
        a = self.amplitude
        dg = np.stack([a * self._eval(x, (k,)) for k in range(n)])
        if order == 1:
            return MetricJet(x, g, dg)
        d2g = np.stack(
            [
                np.stack([a * self._eval(x, (k, l)) for l in range(n)])
                for k in range(n)
            ]
        )
        if order == 2:
            return MetricJet(x, g, dg, d2g)
        d3g = np.stack(
            [
                np.stack(
                    [
                        np.stack([a * self._eval(x, (k, l, m)) for m in range(n)])
                        for l in range(n)
                    ]
                )
                for k in range(n)
            ]
        )
        return MetricJet(x, g, dg, d2g, d3g)


# --------------------------------------------------------------------------
# Functional entry points and the finite-difference oracle
# --------------------------------------------------------------------------


def roter_jet(spec: RoterSpec, point, order: int = 3) -> MetricJet:
    return RoterMetric(spec).jet(point, order)


def const_curvature_jet(K: float, n: int, point, order: int = 3) -> MetricJet:
    return ConstantCurvatureMetric(K, n).jet(point, order)


def random_perturbation_jet(
    seed: int, amplitude: float, n: int, point, order: int = 3
) -> MetricJet:
    return PerturbedFlatMetric(n, amplitude, seed).jet(point, order)


def fd_jet_oracle(provider, point, step: float = 1e-3) -> MetricJet:
    """Jet whose derivative blocks are nested central differences of g.

    Only 0th-order provider evaluations are used.  The k-th derivative
    operators are literal compositions of the elementary central difference
    (g(x + h e_k) - g(x - h e_k)) / 2h, so e.g. the repeated-axis second
    derivative uses the width-2h stencil.  Evaluations are memoized on the
    offset lattice.
    """
    if not (FD_STEP_MIN <= step <= FD_STEP_MAX):
        raise ValueError(f"step must lie in [{FD_STEP_MIN}, {FD_STEP_MAX}]")
    n = provider.dim
    x = _check_point(point, n)
    cache = {}

    def g_at(offset):
        if offset not in cache:
            cache[offset] = provider.jet(x + step * np.array(offset), order=0).g
        return cache[offset]

    def compose(axes):
        weights = {(0,) * n: 1.0}
        for k in axes:
            new = {}
            for off, w in weights.items():
                for shift, sw in ((1, 0.5 / step), (-1, -0.5 / step)):
                    noff = list(off)
                    noff[k] += shift
                    noff = tuple(noff)
                    new[noff] = new.get(noff, 0.0) + w * sw
            weights = new
        return sum(w * g_at(off) for off, w in weights.items())

    g = g_at((0,) * n)
    dg = np.stack([compose((k,)) for k in range(n)])
    d2g = np.stack(
        [np.stack([compose((k, l)) for l in range(n)]) for k in range(n)]
    )
    d3g = np.stack(
        [
            np.stack(
                [np.stack([compose((k, l, m)) for m in range(n)]) for l in range(n)]
            )
            for k in range(n)
        ]
    )
    return MetricJet(x, g, dg, d2g, d3g)
