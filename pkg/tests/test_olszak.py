"""Distribution extraction from the Weyl image, and operator recovery."""

import dataclasses

import numpy as np
import pytest

from ecsw.curvature import CurvaturePack, curvature_pack
from ecsw.metrics import RoterMetric, SinusoidProfile
from ecsw.olszak import (
    DistributionBasis,
    check_structure,
    inclusion_residual,
    null_space,
    olszak_distribution,
    phi_and_recover_A,
    two_form_span_dimension,
)
from tests.conftest import make_spec


def _forged_pack(g: np.ndarray, weyl: np.ndarray) -> CurvaturePack:
    """A pack carrying only the fields the distribution code reads."""
    n = g.shape[0]
    zero2 = np.zeros((n, n))
    return CurvaturePack(
        jet=None,
        g=g,
        g_inv=np.linalg.inv(g),
        gamma=np.zeros((n, n, n)),
        riemann13=np.zeros((n,) * 4),
        riemann04=weyl,
        ricci=zero2,
        scalar=0.0,
        schouten=zero2,
        weyl=weyl,
    )


# --- linear-algebra helpers ---------------------------------------------------------


def test_inclusion_residual_basics(rng):
    a = rng.standard_normal((5, 2))
    assert inclusion_residual(a, a) < 1e-14
    # orthogonal complement: nothing of the subspace is captured
    e01 = np.eye(5)[:, :2]
    e34 = np.eye(5)[:, 3:]
    assert abs(inclusion_residual(e01, e34) - 1.0) < 1e-14
    empty = np.zeros((5, 0))
    assert inclusion_residual(empty, e01) == 0.0
    assert inclusion_residual(e01, empty) == 1.0


def test_null_space_shape_and_quality(rng):
    cols = rng.standard_normal((4, 2))
    mat = cols @ rng.standard_normal((2, 4))  # rank 2
    ns = null_space(mat)
    assert ns.shape == (4, 2)
    assert np.max(np.abs(mat @ ns)) < 1e-12
    np.testing.assert_allclose(ns.T @ ns, np.eye(2), atol=1e-12)


def test_two_form_span_dimension(rng):
    a = rng.standard_normal((4, 4))
    a -= a.T
    b = rng.standard_normal((4, 4))
    b -= b.T
    assert two_form_span_dimension([a, b, 2.0 * a - b]) == 2
    assert two_form_span_dimension([]) == 0


# --- the wedge system on synthetic data ---------------------------------------------


@pytest.mark.parametrize("eps", [1.0, 1e-3])
def test_decomposable_weyl_gives_the_two_plane(eps):
    # W = eps * omega (x) omega with omega = (e0 + e1) ^ e2 on signature
    # (-+++): the solution plane is spanned by e1 - e0 and e2, independent
    # of the overall scale.
    g = np.diag([-1.0, 1.0, 1.0, 1.0])
    lam = np.array([1.0, 1.0, 0.0, 0.0])
    mu = np.array([0.0, 0.0, 1.0, 0.0])
    omega = np.outer(lam, mu) - np.outer(mu, lam)
    weyl = eps * np.einsum("ij,kl->ijkl", omega, omega)
    db = olszak_distribution(_forged_pack(g, weyl))
    assert db.dim_D == 2
    assert not db.degenerate
    expect_d = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    expect_dp = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
    assert inclusion_residual(db.basis_D, expect_d) < 1e-12
    assert inclusion_residual(expect_d, db.basis_D) < 1e-12
    assert inclusion_residual(db.basis_Dperp, expect_dp) < 1e-12
    assert inclusion_residual(expect_dp, db.basis_Dperp) < 1e-12


def test_vanishing_weyl_is_degenerate():
    g = np.diag([-1.0, 1.0, 1.0, 1.0])
    db = olszak_distribution(_forged_pack(g, np.zeros((4, 4, 4, 4))))
    assert db.degenerate
    assert db.dim_D == 4
    np.testing.assert_array_equal(db.basis_D, np.eye(4))
    np.testing.assert_array_equal(db.basis_Dperp, np.eye(4))


# --- the family metrics --------------------------------------------------------------


@pytest.mark.parametrize("n", [4, 5, 6])
def test_distribution_is_the_null_coordinate_line(n, rng):
    metric = RoterMetric(make_spec(n, SinusoidProfile()))
    e_s = np.zeros(n)
    e_s[1] = 1.0
    for _ in range(3):
        p = rng.uniform(-2.0, 2.0, size=n)
        pack = curvature_pack(metric.jet(p, order=2))
        db = olszak_distribution(pack)
        assert db.dim_D == 1
        assert not db.degenerate
        assert inclusion_residual(db.basis_D, e_s[:, None]) < 1e-12
        status = check_structure(db, pack)
        assert status["total_null"] == 0.0
        assert max(status.values()) < 1e-12


def test_corrupted_weyl_is_flagged(n4_metric):
    pack = curvature_pack(n4_metric.jet(np.array([0.3, -0.7, 1.1, 0.4]), order=2))
    db = olszak_distribution(pack)
    clean = check_structure(db, pack)
    assert clean["w_kills_d"] < 1e-9
    bad_w = pack.weyl.copy()
    bad_w[1, 0, 0, 1] += 0.1
    corrupt = check_structure(db, dataclasses.replace(pack, weyl=bad_w))
    assert corrupt["w_kills_d"] > 1e-4


# --- operator recovery ---------------------------------------------------------------


def test_recovery_matches_construction_operator(n4_metric, rng):
    for _ in range(3):
        p = rng.uniform(-2.0, 2.0, size=4)
        pack = curvature_pack(n4_metric.jet(p, order=2))
        db = olszak_distribution(pack)
        pv = phi_and_recover_A(pack, db)
        assert pv.phi_nonzero
        np.testing.assert_allclose(pv.recovered_A, np.diag([1.0, -1.0]), atol=1e-12)
        assert pv.xi_residual < 1e-14
        # |tr(A^2)| = 2 here, so the normalizing factor is 2^(-1/4)
        assert abs(pv.norm_factor - 2.0 ** -0.25) < 1e-12
        # the recovered operator is traceless and self-adjoint for the
        # fibre inner product
        assert abs(np.trace(pv.recovered_A)) < 1e-8
        sym = pack.g[2:, 2:] @ pv.recovered_A
        assert np.max(np.abs(sym - sym.T)) < 1e-8


def test_recovery_unchanged_under_generator_rescale(n4_metric):
    pack = curvature_pack(n4_metric.jet(np.array([0.9, 0.2, -1.3, 0.5]), order=2))
    db = olszak_distribution(pack)
    doubled = DistributionBasis(1, 2.0 * db.basis_D, db.basis_Dperp, False)
    pv1 = phi_and_recover_A(pack, db)
    pv2 = phi_and_recover_A(pack, doubled)
    np.testing.assert_array_equal(pv1.recovered_A, pv2.recovered_A)
    assert pv1.norm_factor == pv2.norm_factor
    assert pv2.xi_residual < 1e-14


def test_recovery_requires_a_line():
    g = np.diag([-1.0, 1.0, 1.0, 1.0])
    lam = np.array([1.0, 1.0, 0.0, 0.0])
    mu = np.array([0.0, 0.0, 1.0, 0.0])
    omega = np.outer(lam, mu) - np.outer(mu, lam)
    weyl = np.einsum("ij,kl->ijkl", omega, omega)
    pack = _forged_pack(g, weyl)
    db = olszak_distribution(pack)
    with pytest.raises(ValueError, match="one-dimensional"):
        phi_and_recover_A(pack, db)


def test_norm_factor_constant_across_points(n4_metric, rng):
    factors = []
    for _ in range(10):
        p = rng.uniform(-2.0, 2.0, size=4)
        pack = curvature_pack(n4_metric.jet(p, order=2))
        pv = phi_and_recover_A(pack, olszak_distribution(pack))
        factors.append(pv.norm_factor)
    med = float(np.median(factors))
    assert (max(factors) - min(factors)) / abs(med) < 1e-7
