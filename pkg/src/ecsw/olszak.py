"""The distinguished null line distribution of a Weyl tensor.

For a metric whose Weyl tensor is nonzero, the distribution

    D = { u : xi ^ W(X, Y) = 0 for all X, Y },   xi = g(u, .),

is computed pointwise from the span of the 2-forms Omega = W(e_i, e_j, ., .)
as the kernel of the stacked wedge system

    (xi ^ Omega)_{abc} = xi_a Omega_bc + xi_b Omega_ca + xi_c Omega_ab = 0

over all increasing triples a < b < c.  On the block family the result is
the null line spanned by the s-coordinate direction, the chain

    (Ker ric)^perp  <  D  <  D^perp  <  Ker ric,    D  <  Ker W

holds, and the operator A of the construction is recovered from the
bilinear form Phi = W(., u~, u~, .) restricted to the fibre slots.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .curvature import CurvaturePack, relative_residual

# 2-forms whose norm is below this (relative to the largest) are dropped.
OMEGA_DROP_RTOL = 1e-12
# Singular values below this (relative to the largest) count as kernel.
KERNEL_RTOL = 1e-9
# |Phi| below this triggers the "essentially zero" flag on recovery.
PHI_ZERO_TOL = 1e-10


def weyl_image_2forms(pack: CurvaturePack) -> list:
    """The 2-forms W(e_i, e_j, ., .) for i < j, small ones dropped."""
    W = pack.weyl
    n = pack.dim
    forms = [W[i, j] for i in range(n) for j in range(i + 1, n)]
    top = max(float(np.max(np.abs(f))) for f in forms)
    if top == 0.0:
        return []
    return [f for f in forms if np.max(np.abs(f)) > OMEGA_DROP_RTOL * top]


def two_form_span_dimension(omegas, rtol: float = KERNEL_RTOL) -> int:
    """Dimension of the linear span of the given 2-forms."""
    if not omegas:
        return 0
    mat = np.stack([om.ravel() for om in omegas])
    svals = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(svals > rtol * svals[0]))


def null_space(mat: np.ndarray, rtol: float = KERNEL_RTOL) -> np.ndarray:
    """Orthonormal kernel basis (columns) of a matrix via SVD."""
    m = np.atleast_2d(np.asarray(mat, dtype=float))
    _, svals, vt = np.linalg.svd(m)
    top = svals[0] if svals.size else 0.0
    rank = int(np.sum(svals > rtol * top)) if top > 0 else 0
    return vt[rank:].T


def inclusion_residual(sub: np.ndarray, ambient: np.ndarray) -> float:
    """sin of the largest principal angle of span(sub) against span(ambient).

    Both arguments are column-stacked bases; an empty ``sub`` is vacuously
    included (residual 0), while a nonzero ``sub`` against an empty
    ``ambient`` gives residual 1.
    """
    if sub.size == 0 or sub.shape[1] == 0:
        return 0.0
    q_sub, _ = np.linalg.qr(sub)
    if ambient.size == 0 or ambient.shape[1] == 0:
        return 1.0
    q_amb, _ = np.linalg.qr(ambient)
    leftover = q_sub - q_amb @ (q_amb.T @ q_sub)
    return float(np.linalg.norm(leftover, ord=2))


@dataclass(frozen=True)
class DistributionBasis:
    """Kernel of the wedge system (vacuous when the Weyl tensor vanishes)."""

    dim_D: int
    basis_D: np.ndarray
    basis_Dperp: np.ndarray
    degenerate: bool


def olszak_distribution(pack: CurvaturePack) -> DistributionBasis:
    """Solve the stacked wedge system for D and compute its g-complement."""
    n = pack.dim
    g = pack.g
    omegas = weyl_image_2forms(pack)
    if not omegas:
        eye = np.eye(n)
        return DistributionBasis(n, eye, eye, True)

    triples = list(itertools.combinations(range(n), 3))
    rows = np.empty((len(omegas) * len(triples), n))
    r = 0
    for om in omegas:
        for (a, b, c) in triples:
            rows[r] = g[a] * om[b, c] + g[b] * om[c, a] + g[c] * om[a, b]
            r += 1
    basis_D = null_space(rows)
    basis_Dperp = null_space(basis_D.T @ g)
    return DistributionBasis(basis_D.shape[1], basis_D, basis_Dperp, False)


def check_structure(db: DistributionBasis, pack: CurvaturePack) -> dict:
    """Residuals of the structural relations tying D to ric and W.

    Returns a dict of named max-norm residuals; nothing is thrown, so the
    caller decides which entries matter for a given metric.
    """
    g, W, ric = pack.g, pack.weyl, pack.ricci
    D, Dp = db.basis_D, db.basis_Dperp
    w_scale = float(np.max(np.abs(W)))
    ric_scale = float(np.max(np.abs(ric)))

    total_null = float(np.max(np.abs(D.T @ g @ D))) if D.size else 0.0

    w_kills_d = 0.0
    for u in D.T:
        w_kills_d = max(
            w_kills_d,
            relative_residual(np.einsum("ijkl,i->jkl", W, u), w_scale),
        )

    ric_kills_dperp = 0.0
    for w in Dp.T:
        ric_kills_dperp = max(
            ric_kills_dperp, relative_residual(ric @ w, ric_scale)
        )

    ker_ric = null_space(ric)
    ker_ric_perp = null_space(ker_ric.T @ g)

    w_on_dperp = 0.0
    r_on_dperp = 0.0
    r_scale = float(np.max(np.abs(pack.riemann04)))
    for x, y in itertools.combinations_with_replacement(Dp.T, 2):
        w_on_dperp = max(
            w_on_dperp,
            relative_residual(np.einsum("ijkl,i,j->kl", W, x, y), w_scale),
        )
        r_on_dperp = max(
            r_on_dperp,
            relative_residual(
                np.einsum("ijkl,i,j->kl", pack.riemann04, x, y), r_scale
            ),
        )

    return {
        "total_null": total_null,
        "w_kills_d": w_kills_d,
        "ric_kills_dperp": ric_kills_dperp,
        "kerric_perp_in_d": inclusion_residual(ker_ric_perp, D),
        "d_in_dperp": inclusion_residual(D, Dp),
        "dperp_in_kerric": inclusion_residual(Dp, ker_ric),
        "w_on_dperp_pairs": w_on_dperp,
        "r_on_dperp_pairs": r_on_dperp,
    }


@dataclass(frozen=True)
class PhiValue:
    """Result of recovering the construction operator from W along D."""

    matrix: np.ndarray
    norm_factor: float
    recovered_A: np.ndarray
    xi_residual: float
    phi_nonzero: bool


def phi_and_recover_A(pack: CurvaturePack, db: DistributionBasis) -> PhiValue:
    """Recover A from Phi = W(., u~, u~, .) in the block chart.

    Requires dim D = 1.  The line generator is rescaled internally so the
    covector xi = g(u, .) evaluates to 1 on the first coordinate direction,
    making the result independent of the basis scaling; ``xi_residual``
    reports how far xi then is from the first coordinate covector.
    """
    if db.dim_D != 1:
        raise ValueError(f"recovery needs a one-dimensional D, got {db.dim_D}")
    n = pack.dim
    u_raw = db.basis_D[:, 0]
    xi_raw = pack.g @ u_raw
    if abs(xi_raw[0]) < 1e-14:
        raise ValueError("the D line is g-orthogonal to the first coordinate")
    u = u_raw / xi_raw[0]
    xi = pack.g @ u
    e0 = np.zeros(n)
    e0[0] = 1.0
    xi_residual = float(np.max(np.abs(xi - e0)))

    phi = pack.weyl[2:, 0, 0, 2:].copy()
    gamma = pack.g[2:, 2:]
    recovered = np.linalg.solve(gamma, phi)
    norm_sq = abs(float(np.trace(recovered @ recovered)))
    nonzero = float(np.max(np.abs(phi))) > PHI_ZERO_TOL
    factor = norm_sq**-0.25 if nonzero and norm_sq > 0 else float("nan")
    return PhiValue(phi, factor, recovered, xi_residual, nonzero)
