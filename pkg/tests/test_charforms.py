"""Pfaffians of skew tuples and the curvature integrands."""

import numpy as np
import pytest

from ecsw.charforms import (
    SkewTuple,
    curvature_operator,
    euler_form_at,
    generating_form_at,
    pfaffian,
    random_skew_tuple,
)
from ecsw.curvature import curvature_pack
from ecsw.metrics import (
    ConstantCurvatureMetric,
    PerturbedFlatMetric,
    RoterMetric,
    SinusoidProfile,
)
from ecsw.oracles import pfaffian_cofactor
from ecsw.tensors import FibreMetric, wedge_eval_basis
from tests.conftest import make_spec

J = np.array([[0.0, -1.0], [1.0, 0.0]])


# --- Pfaffian conventions -----------------------------------------------------------


def test_pfaffian_single_rotation():
    # the operator with matrix [[0, -a], [a, 0]] on the euclidean plane has
    # Pfaffian a
    fibre = FibreMetric(np.eye(2))
    st = SkewTuple(fibre, (0.7 * J,))
    assert pfaffian(st) == 0.7


def test_pfaffian_block_pair():
    fibre = FibreMetric(np.eye(4))
    s1 = np.zeros((4, 4))
    s1[:2, :2] = 0.7 * J
    s2 = np.zeros((4, 4))
    s2[2:, 2:] = -1.3 * J
    assert abs(pfaffian(SkewTuple(fibre, (s1, s2))) + 0.91) < 1e-14


def test_cofactor_oracle_conventions(rng):
    z = np.array([[0.0, 0.7], [-0.7, 0.0]])
    assert pfaffian_cofactor(z) == 0.7
    for _ in range(5):
        raw = rng.uniform(-1.0, 1.0, size=(6, 6))
        b = raw - raw.T
        pf = pfaffian_cofactor(b)
        assert abs(pf * pf - np.linalg.det(b)) < 1e-12


def test_wedge_power_matches_cofactor(rng):
    # (omega ^ omega)(basis) = 2! pf(omega) in dimension 4
    raw = rng.uniform(-1.0, 1.0, size=(4, 4))
    b = raw - raw.T
    assert abs(wedge_eval_basis([b, b]) - 2.0 * pfaffian_cofactor(b)) < 1e-12


def test_orientation_flips_sign():
    fibre = FibreMetric(np.eye(2))
    plus = SkewTuple(fibre, (0.7 * J,), orientation=1.0)
    minus = SkewTuple(fibre, (0.7 * J,), orientation=-1.0)
    assert pfaffian(plus) == -pfaffian(minus)


@pytest.mark.parametrize("signature", ["euclidean", "lorentzian"])
def test_common_kernel_kills_pfaffian(signature, rng):
    mat = np.eye(4) if signature == "euclidean" else np.diag([-1.0, 1.0, 1.0, 1.0])
    fibre = FibreMetric(mat)
    for _ in range(10):
        kernel = rng.uniform(-1.0, 1.0, size=4)
        st = random_skew_tuple(fibre, rng, common_kernel=kernel)
        assert abs(pfaffian(st)) < 1e-10


# --- tuple validation ---------------------------------------------------------------


def test_skew_tuple_rejects_bad_input():
    fibre = FibreMetric(np.eye(4))
    with pytest.raises(ValueError, match="expected 2 operators"):
        SkewTuple(fibre, (np.zeros((4, 4)),))
    with pytest.raises(ValueError, match="skew-adjoint"):
        SkewTuple(fibre, (np.eye(4), np.zeros((4, 4))))
    with pytest.raises(ValueError, match="orientation"):
        SkewTuple(fibre, (np.zeros((4, 4)), np.zeros((4, 4))), orientation=0.0)
    with pytest.raises(ValueError, match="even"):
        SkewTuple(FibreMetric(np.eye(3)), (np.zeros((3, 3)),))


# --- curvature integrands -----------------------------------------------------------


def test_curvature_operator_is_skew_adjoint(n4_metric, rng):
    pack = curvature_pack(n4_metric.jet(rng.uniform(-1, 1, size=4), order=2))
    u = rng.uniform(-1.0, 1.0, size=4)
    v = rng.uniform(-1.0, 1.0, size=4)
    s = curvature_operator(pack, u, v)
    z = s.T @ pack.g
    assert np.max(np.abs(z + z.T)) < 1e-12


def test_euler_form_vanishes_for_the_family(n4_metric, rng):
    pack = curvature_pack(n4_metric.jet(np.array([0.4, -0.2, 0.8, -1.1]), order=2))
    for _ in range(5):
        vectors = rng.uniform(-1.0, 1.0, size=(4, 4))
        assert abs(euler_form_at(pack, vectors)) < 1e-8
        assert abs(generating_form_at(pack, 1, vectors)) < 1e-8


def test_euler_form_nonzero_on_constant_curvature(rng):
    metric = ConstantCurvatureMetric(0.7, 4)
    pack = curvature_pack(metric.jet(rng.uniform(-0.4, 0.4, size=4), order=2))
    assert abs(euler_form_at(pack, rng.uniform(-1.0, 1.0, size=(4, 4)))) > 1e-6


def test_generating_form_nonzero_on_perturbed_flat(rng):
    metric = PerturbedFlatMetric(4, 0.05, seed=11)
    pack = curvature_pack(metric.jet(rng.uniform(-0.4, 0.4, size=4), order=2))
    assert abs(generating_form_at(pack, 1, rng.uniform(-1.0, 1.0, size=(4, 4)))) > 1e-4


def test_integrand_guards(rng):
    n5 = RoterMetric(make_spec(5, SinusoidProfile()))
    pack5 = curvature_pack(n5.jet(np.zeros(5), order=2))
    with pytest.raises(ValueError, match="even"):
        euler_form_at(pack5, np.eye(5))
    n4 = RoterMetric(make_spec(4, SinusoidProfile()))
    pack4 = curvature_pack(n4.jet(np.zeros(4), order=2))
    with pytest.raises(ValueError, match="dependent"):
        euler_form_at(pack4, np.zeros((4, 4)))
    with pytest.raises(ValueError, match="at least 1"):
        generating_form_at(pack4, 0, np.eye(4))
    with pytest.raises(ValueError, match="exceeds"):
        generating_form_at(pack4, 2, np.eye(4))
