"""Curvature of a pseudo-Riemannian metric from its coordinate jet.

Sign conventions (fixed throughout the package):

    R(X, Y)Z = nabla_Y nabla_X Z - nabla_X nabla_Y Z + nabla_[X,Y] Z,

so in components

    R^l_{ijk} = d_j Gamma^l_{ik} - d_i Gamma^l_{jk}
                + Gamma^m_{ik} Gamma^l_{jm} - Gamma^m_{jk} Gamma^l_{im},

with ``riemann13[l, i, j, k]`` the coefficient of R(e_i, e_j) e_k on e_l and
``riemann04[i, j, k, l] = g_lm R^m_{ijk}``.  With this choice a space of
constant sectional curvature K satisfies R = (K/2) g ^ g where ^ is the
Kulkarni-Nomizu product, the Ricci tensor is ricci[j, k] =
riemann13[i, j, i, k], and the Weyl tensor is

    W = R - (n - 2)^{-1} g ^ sigma,   sigma = ricci - s g / (2n - 2).

All residual helpers return max-norm residuals relative to
max(1, ref_scale).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalAbort
from .metrics import MetricJet

MIN_DIM = 4


def relative_residual(residual: np.ndarray, reference) -> float:
    """max |residual| / max(1, scale(reference))."""
    if isinstance(reference, np.ndarray):
        scale = float(np.max(np.abs(reference))) if reference.size else 0.0
    else:
        scale = float(reference)
    r = float(np.max(np.abs(residual))) if np.size(residual) else 0.0
    return r / max(1.0, scale)


def kulkarni_nomizu(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a ^ b)_ijkl = a_ik b_jl + a_jl b_ik - a_il b_jk - a_jk b_il."""
    return (
        np.einsum("ik,jl->ijkl", a, b)
        + np.einsum("jl,ik->ijkl", a, b)
        - np.einsum("il,jk->ijkl", a, b)
        - np.einsum("jk,il->ijkl", a, b)
    )


def christoffel(jet: MetricJet) -> np.ndarray:
    """Gamma^l_{ij} from g and dg."""
    g_inv = np.linalg.inv(jet.g)
    dg = jet.dg
    S = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
    return 0.5 * np.einsum("lm,mij->lij", g_inv, S)


def covariant_derivative(t: np.ndarray, variance: str, gamma: np.ndarray,
                         dt: np.ndarray) -> np.ndarray:
    """(nabla t) with the derivative axis first.

    ``t`` has one axis per character of ``variance`` ('u' upper, 'd' lower)
    and ``dt[k] = d_k t``.
    """
    nabla = dt.copy()
    for r, c in enumerate(variance):
        if c == "u":
            term = np.tensordot(gamma, t, axes=([2], [r]))
            nabla += np.moveaxis(term, [0, 1], [r + 1, 0])
        elif c == "d":
            term = np.tensordot(gamma, t, axes=([0], [r]))
            nabla -= np.moveaxis(term, [0, 1], [0, r + 1])
        else:
            raise ValueError(f"variance characters must be 'u' or 'd', got {c!r}")
    return nabla


@dataclass(frozen=True)
class CurvaturePack:
    """All curvature fields of one metric jet at one point."""

    jet: MetricJet
    g: np.ndarray
    g_inv: np.ndarray
    gamma: np.ndarray
    riemann13: np.ndarray
    riemann04: np.ndarray
    ricci: np.ndarray
    scalar: float
    schouten: np.ndarray
    weyl: np.ndarray
    # order-3 jets only (None otherwise)
    dgamma: np.ndarray | None = None
    nabla_riemann: np.ndarray | None = None
    nabla_ricci: np.ndarray | None = None
    nabla_weyl: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.g.shape[0]


def curvature_pack(jet: MetricJet) -> CurvaturePack:
    """Compute curvature (and, with an order-3 jet, first covariant
    derivatives of R, ricci, W) from the metric jet."""
    n = jet.dim
    if n < MIN_DIM:
        raise ValueError(f"dimension must be at least {MIN_DIM}, got {n}")
    if jet.dg is None or jet.d2g is None:
        raise ValueError("curvature needs a jet of order >= 2")

    g, dg, d2g = jet.g, jet.dg, jet.d2g
    if not np.all(np.isfinite(g)):
        raise NumericalAbort("metric components are not finite")
    try:
        g_inv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise NumericalAbort("metric inversion failed") from exc
    S = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
    gamma = 0.5 * np.einsum("lm,mij->lij", g_inv, S)

    dg_inv = -np.einsum("la,kab,bm->klm", g_inv, dg, g_inv)
    dS = d2g.transpose(0, 2, 1, 3) + d2g.transpose(0, 2, 3, 1) - d2g
    dgamma = 0.5 * (
        np.einsum("klm,mij->klij", dg_inv, S)
        + np.einsum("lm,kmij->klij", g_inv, dS)
    )

    riemann13 = (
        dgamma.transpose(1, 2, 0, 3)
        - dgamma.transpose(1, 0, 2, 3)
        + np.einsum("mik,ljm->lijk", gamma, gamma)
        - np.einsum("mjk,lim->lijk", gamma, gamma)
    )
    riemann04 = np.einsum("mijk,ml->ijkl", riemann13, g)
    ricci = np.einsum("ijik->jk", riemann13)
    scalar = float(np.einsum("jk,jk->", g_inv, ricci))
    schouten = ricci - scalar * g / (2.0 * n - 2.0)
    weyl = riemann04 - kulkarni_nomizu(g, schouten) / (n - 2.0)

    nabla_riemann = nabla_ricci = nabla_weyl = None
    if jet.d3g is not None:
        d3g = jet.d3g
        P1 = np.einsum("ae,kef,fc,lcd,db->klab", g_inv, dg, g_inv, dg, g_inv)
        d2g_inv = P1 + P1.transpose(1, 0, 2, 3) - np.einsum(
            "ac,klcd,db->klab", g_inv, d2g, g_inv
        )
        d2S = d3g.transpose(0, 1, 3, 2, 4) + d3g.transpose(0, 1, 3, 4, 2) - d3g
        d2gamma = 0.5 * (
            np.einsum("klam,mij->klaij", d2g_inv, S)
            + np.einsum("kam,lmij->klaij", dg_inv, dS)
            + np.einsum("lam,kmij->klaij", dg_inv, dS)
            + np.einsum("am,klmij->klaij", g_inv, d2S)
        )
        driemann13 = (
            d2gamma.transpose(0, 2, 3, 1, 4)
            - d2gamma.transpose(0, 2, 1, 3, 4)
            + np.einsum("pmik,ljm->plijk", dgamma, gamma)
            + np.einsum("mik,pljm->plijk", gamma, dgamma)
            - np.einsum("pmjk,lim->plijk", dgamma, gamma)
            - np.einsum("mjk,plim->plijk", gamma, dgamma)
        )
        driemann04 = np.einsum("pmijk,ml->pijkl", driemann13, g) + np.einsum(
            "mijk,pml->pijkl", riemann13, dg
        )
        dricci = np.einsum("pijik->pjk", driemann13)
        dscalar = np.einsum("pjk,jk->p", dg_inv, ricci) + np.einsum(
            "jk,pjk->p", g_inv, dricci
        )
        dschouten = dricci - (
            np.einsum("p,jk->pjk", dscalar, g) + scalar * dg
        ) / (2.0 * n - 2.0)
        dweyl = driemann04.copy()
        for p in range(n):
            dweyl[p] -= (
                kulkarni_nomizu(dg[p], schouten)
                + kulkarni_nomizu(g, dschouten[p])
            ) / (n - 2.0)
        nabla_riemann = covariant_derivative(riemann04, "dddd", gamma, driemann04)
        nabla_ricci = covariant_derivative(ricci, "dd", gamma, dricci)
        nabla_weyl = covariant_derivative(weyl, "dddd", gamma, dweyl)

    pack = CurvaturePack(
        jet=jet,
        g=g,
        g_inv=g_inv,
        gamma=gamma,
        riemann13=riemann13,
        riemann04=riemann04,
        ricci=ricci,
        scalar=scalar,
        schouten=schouten,
        weyl=weyl,
        dgamma=dgamma,
        nabla_riemann=nabla_riemann,
        nabla_ricci=nabla_ricci,
        nabla_weyl=nabla_weyl,
    )
    for name in ("riemann04", "ricci", "weyl", "nabla_riemann", "nabla_weyl"):
        arr = getattr(pack, name)
        if arr is not None and not np.all(np.isfinite(arr)):
            raise NumericalAbort(f"non-finite values in {name}")
    return pack


# --------------------------------------------------------------------------
# Identity residuals
# --------------------------------------------------------------------------


def riemann_symmetry_residuals(pack: CurvaturePack) -> dict:
    """Antisymmetry in both pairs, pair symmetry, first Bianchi."""
    R = pack.riemann04
    scale = np.max(np.abs(R))
    return {
        "antisym_first": relative_residual(R + R.transpose(1, 0, 2, 3), scale),
        "antisym_last": relative_residual(R + R.transpose(0, 1, 3, 2), scale),
        "pair_symmetry": relative_residual(R - R.transpose(2, 3, 0, 1), scale),
        "first_bianchi": relative_residual(
            R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2), scale
        ),
    }


def weyl_trace_residuals(pack: CurvaturePack) -> float:
    """Max over all six g^{..} contractions of W (all must vanish)."""
    W, gi = pack.weyl, pack.g_inv
    scale = max(np.max(np.abs(W)), np.max(np.abs(pack.riemann04)))
    worst = 0.0
    for a in range(4):
        for b in range(a + 1, 4):
            tr = np.tensordot(gi, W, axes=([0, 1], [a, b]))
            worst = max(worst, relative_residual(tr, scale))
    return worst


def second_bianchi_residual(pack: CurvaturePack) -> float:
    """Cyclic sum of nabla R over the derivative slot and the first pair."""
    nR = pack.nabla_riemann
    if nR is None:
        raise ValueError("second Bianchi needs an order-3 jet")
    cyc = nR + nR.transpose(1, 2, 0, 3, 4) + nR.transpose(2, 0, 1, 3, 4)
    return relative_residual(cyc, np.max(np.abs(nR)))


def metric_compatibility_residual(pack: CurvaturePack) -> float:
    """nabla g = 0."""
    ng = covariant_derivative(pack.g, "dd", pack.gamma, pack.jet.dg)
    return relative_residual(ng, np.max(np.abs(pack.g)))


def ricci_image_residual(pack: CurvaturePack, direction: np.ndarray) -> float:
    """Residual of im(Ric) lying inside span(direction).

    Ric is the endomorphism g^{ik} ricci_kj; every column is projected off
    the given direction (Euclidean projection) and the worst leftover entry
    is reported relative to the endomorphism's own scale.
    """
    end = pack.g_inv @ pack.ricci
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    off_axis = end - np.outer(d, d @ end)
    return relative_residual(off_axis, np.max(np.abs(end)))


def codazzi_residual(pack: CurvaturePack) -> float:
    """Total symmetry of nabla ricci (derivative slot vs tensor slots)."""
    nr = pack.nabla_ricci
    if nr is None:
        raise ValueError("needs an order-3 jet")
    scale = max(np.max(np.abs(nr)), 1e-300)
    res = max(
        np.max(np.abs(nr - nr.transpose(1, 0, 2))),
        np.max(np.abs(nr - nr.transpose(0, 2, 1))),
    )
    return relative_residual(res, scale)
