"""Acceptance gate: the eight binding criteria, one test (and line) each.

Every test drives the library through the full procedure of its criterion
at the stated tolerance, so `pytest -v` shows one pass/fail line per
criterion.  The six construction combinations are the three fibre setups
crossed with the two clock profiles; the bundled suite configs cover three
of them end to end through the check registry.
"""

import json
import subprocess
import sys
import time

import numpy as np

from ecsw.charforms import (
    euler_form_at,
    generating_form_at,
    pfaffian,
    random_skew_tuple,
)
from ecsw.checks import CHECK_NAMES, build_report, report_bytes, run_checks
from ecsw.config import load_config
from ecsw.curvature import (
    christoffel,
    codazzi_residual,
    curvature_pack,
    kulkarni_nomizu,
)
from ecsw.dynamics import completeness_variation_check
from ecsw.metrics import (
    ConstantCurvatureMetric,
    PerturbedFlatMetric,
    RoterMetric,
    SinusoidProfile,
    fd_jet_oracle,
)
from ecsw.olszak import (
    DistributionBasis,
    check_structure,
    inclusion_residual,
    olszak_distribution,
    phi_and_recover_A,
)
from ecsw.oracles import (
    jet_comparison,
    pfaffian_cofactor,
    wedge_eval_full_permutations,
)
from ecsw.tensors import FibreMetric, wedge_eval_basis
from tests.conftest import CONFIG_DIR, CUBIC, make_spec

SEED = 20260817
BOX = {"t": (-1.5, 1.5), "s": (-2.0, 2.0), "v": (-1.0, 1.0)}
SUITE = ((4, SinusoidProfile()), (5, CUBIC), (6, SinusoidProfile()))
CONFIG_FILES = ("lorentz_n4_sin.json", "n5_cubic.json", "n6_sin.json")


def _box_points(rng, n, count):
    pts = np.empty((count, n))
    pts[:, 0] = rng.uniform(*BOX["t"], size=count)
    pts[:, 1] = rng.uniform(*BOX["s"], size=count)
    pts[:, 2:] = rng.uniform(BOX["v"][0], BOX["v"][1], size=(count, n - 2))
    return pts


def _suite_configs():
    return [
        load_config(CONFIG_DIR / name, known_checks=set(CHECK_NAMES))
        for name in CONFIG_FILES
    ]


def test_criterion_1_curvature_identity_suite():
    start = time.perf_counter()
    combo = 0
    for n in (4, 5, 6):
        for profile in (SinusoidProfile(), CUBIC):
            spec = make_spec(n, profile)
            metric = RoterMetric(spec)
            rng = np.random.default_rng([SEED, combo])
            combo += 1
            saw_moving_profile = False
            for point in _box_points(rng, n, 100):
                pack = curvature_pack(metric.jet(point, order=3))
                assert abs(pack.scalar) < 1e-9
                expected_ricci = np.zeros((n, n))
                expected_ricci[0, 0] = (2 - n) * profile(point[0])
                assert np.max(np.abs(pack.ricci - expected_ricci)) < 1e-9
                rebuilt = pack.weyl + kulkarni_nomizu(pack.g, pack.ricci) / (n - 2.0)
                r_scale = np.max(np.abs(pack.riemann04))
                assert np.max(np.abs(pack.riemann04 - rebuilt)) < 1e-10 * r_scale
                w_scale = np.max(np.abs(pack.weyl))
                assert w_scale > 1e-3
                assert np.max(np.abs(pack.nabla_weyl)) < 1e-8 * w_scale
                if abs(profile.derivative(point[0], 1)) > 0.1:
                    saw_moving_profile = True
                    assert np.max(np.abs(pack.nabla_riemann)) > 1e-6
                assert codazzi_residual(pack) < 1e-8
            assert saw_moving_profile
    assert time.perf_counter() - start < 30.0


def test_criterion_2_distribution_structure():
    for n, profile in SUITE:
        spec = make_spec(n, profile)
        metric = RoterMetric(spec)
        rng = np.random.default_rng([SEED, 20 + n])
        e_s = np.zeros((n, 1))
        e_s[1, 0] = 1.0
        for point in _box_points(rng, n, 20):
            jet = metric.jet(point, order=2)
            assert jet.g[1, 1] == 0.0  # the coordinate field is null, exactly
            gamma = christoffel(jet)
            assert np.max(np.abs(gamma[:, :, 1])) == 0.0
            assert np.max(np.abs(gamma[:, 1, :])) == 0.0
            pack = curvature_pack(jet)
            db = olszak_distribution(pack)
            assert db.dim_D == 1
            assert inclusion_residual(db.basis_D, e_s) < 1e-8
            status = check_structure(db, pack)
            for key, value in status.items():
                assert value < 1e-9, (key, value)


def test_criterion_3_characteristic_forms():
    rng = np.random.default_rng([SEED, 3])
    for n, profile in SUITE:
        metric = RoterMetric(make_spec(n, profile))
        pack = curvature_pack(metric.jet(_box_points(rng, n, 1)[0], order=2))
        for _ in range(20):
            if n % 2 == 0:
                basis = rng.uniform(-1.0, 1.0, size=(n, n))
                assert abs(euler_form_at(pack, basis)) < 1e-8
            vectors = rng.uniform(-1.0, 1.0, size=(n, 4))
            assert abs(generating_form_at(pack, 1, vectors)) < 1e-8
    # nondegeneracy controls: both integrands detect curved comparisons
    cc = curvature_pack(
        ConstantCurvatureMetric(0.7, 4).jet(rng.uniform(-0.4, 0.4, size=4), order=2)
    )
    assert abs(euler_form_at(cc, rng.uniform(-1.0, 1.0, size=(4, 4)))) > 1e-6
    pf = curvature_pack(
        PerturbedFlatMetric(4, 0.05, seed=11).jet(rng.uniform(-0.4, 0.4, size=4), order=2)
    )
    assert abs(generating_form_at(pf, 1, rng.uniform(-1.0, 1.0, size=(4, 4)))) > 1e-4
    # operators with a shared kernel direction have vanishing Pfaffian
    fibres = (
        FibreMetric(np.eye(2)),
        FibreMetric(np.eye(4)),
        FibreMetric(np.diag([-1.0, 1.0, 1.0, 1.0])),
    )
    for k in range(200):
        fibre = fibres[k % len(fibres)]
        kernel = rng.uniform(-1.0, 1.0, size=fibre.dim)
        st = random_skew_tuple(fibre, rng, common_kernel=kernel)
        assert abs(pfaffian(st)) < 1e-10


def test_criterion_4_operator_recovery():
    for n, profile in SUITE:
        spec = make_spec(n, profile)
        metric = RoterMetric(spec)
        rng = np.random.default_rng([SEED, 40 + n])
        a_scale = max(1.0, float(np.max(np.abs(spec.A))))
        factors = []
        for point in _box_points(rng, n, 20):
            pack = curvature_pack(metric.jet(point, order=2))
            db = olszak_distribution(pack)
            pv = phi_and_recover_A(pack, db)
            assert pv.phi_nonzero
            assert np.max(np.abs(pv.recovered_A - spec.A)) < 1e-6 * a_scale
            assert pv.xi_residual < 1e-6
            factors.append(pv.norm_factor)
        med = float(np.median(factors))
        assert (max(factors) - min(factors)) / abs(med) < 1e-7
        # rescaling the spanning field leaves the recovery untouched
        pack = curvature_pack(metric.jet(_box_points(rng, n, 1)[0], order=2))
        db = olszak_distribution(pack)
        doubled = DistributionBasis(1, 2.0 * db.basis_D, db.basis_Dperp, False)
        np.testing.assert_array_equal(
            phi_and_recover_A(pack, db).recovered_A,
            phi_and_recover_A(pack, doubled).recovered_A,
        )


def test_criterion_5_isometry_group():
    for cfg in _suite_configs():
        results = {
            r.name: r for r in run_checks(cfg, names=["lemma_7_1_iii", "group_axioms"])
        }
        pull = results["lemma_7_1_iii"]
        assert pull.tolerance == 1e-7
        assert pull.passed, pull.residual
        axioms = results["group_axioms"]
        assert axioms.tolerance == 1e-8
        assert axioms.passed, axioms.details


def test_criterion_6_geodesic_dynamics():
    start = time.perf_counter()
    wanted = ("remark_6_4", "geodesic_invariants", "e_ode_wronskian", "e_ode_dimension")
    for cfg in _suite_configs():
        for result in run_checks(cfg, names=list(wanted)):
            assert result.passed, (result.name, result.residual)
            if result.name == "e_ode_dimension":
                assert result.details["dimension"] == 2 * (cfg.n - 2)
    # the straightened variation ends geodesic for five seeded data sets
    spec = make_spec(4, SinusoidProfile())
    e0 = np.array([1.0, 0.0, 0.0, 0.0])
    for k in range(5):
        rng = np.random.default_rng([SEED, 60 + k])
        x0 = np.zeros(4)
        x0[1] = rng.uniform(-2.0, 2.0)
        x0[2:] = rng.uniform(-1.0, 1.0, size=2)

        def y_line(t, base=x0):
            p = base.copy()
            p[0] = t
            return p, e0

        out = completeness_variation_check(
            spec,
            y_line,
            rng.uniform(-1.0, 1.0, size=4),
            rng.uniform(-1.0, 1.0, size=4),
            t_max=3.0,
            stations=31,
        )
        assert out["geodesic_residual"] < 5e-3
    assert time.perf_counter() - start < 120.0


def test_criterion_7_oracle_agreement():
    rng = np.random.default_rng([SEED, 7])
    for n, profile in SUITE:
        metric = RoterMetric(make_spec(n, profile))
        for point in _box_points(rng, n, 3):
            exact = metric.jet(point, order=3)
            fd = fd_jet_oracle(metric, point)
            for name, diff in jet_comparison(exact, fd).items():
                scale = max(1.0, float(np.max(np.abs(getattr(exact, name)))))
                assert diff / scale < 1e-6, (n, name)
    cc = ConstantCurvatureMetric(0.7, 4)
    for point in rng.uniform(-0.5, 0.5, size=(3, 4)):
        pack = curvature_pack(cc.jet(point, order=2))
        assert abs(pack.scalar - 8.4) / 8.4 < 1e-8
        assert np.max(np.abs(pack.weyl)) < 1e-9
    for _ in range(5):
        mats = [rng.uniform(-1.0, 1.0, size=(4, 4)) for _ in range(2)]
        mats = [m - m.T for m in mats]
        assert abs(wedge_eval_basis(mats) - wedge_eval_full_permutations(mats)) < 1e-12
        z = mats[0]
        assert abs(wedge_eval_basis([z, z]) - 2.0 * pfaffian_cofactor(z)) < 1e-12
        assert abs(pfaffian_cofactor(z) ** 2 - np.linalg.det(z)) < 1e-12


def test_criterion_8_determinism_and_exit_codes(tmp_path):
    cfg = load_config(
        CONFIG_DIR / "lorentz_n4_sin.json", known_checks=set(CHECK_NAMES)
    )
    blob_a = report_bytes(build_report(cfg, run_checks(cfg, jobs=4)))
    blob_b = report_bytes(build_report(cfg, run_checks(cfg, jobs=4)))
    assert blob_a == blob_b
    report = json.loads(blob_a)
    assert report["summary"]["total"] == 35
    assert report["summary"]["passed"] == 35
    assert report["summary"]["overall_pass"] is True
    # the command line reproduces the same bytes and exits 0
    out_path = tmp_path / "report.json"
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "ecsw.cli",
            "verify",
            "--config",
            str(CONFIG_DIR / "lorentz_n4_sin.json"),
            "--report",
            str(out_path),
            "--jobs",
            "4",
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out_path.read_bytes() == blob_a
    # failure modes keep their distinct exit codes
    for name, code in (
        ("fail_tolerance.json", 1),
        ("bad_spec.json", 2),
        ("nan_overflow.json", 3),
    ):
        negative = subprocess.run(
            [
                sys.executable,
                "-m",
                "ecsw.cli",
                "verify",
                "--config",
                str(CONFIG_DIR / name),
                "--report",
                str(tmp_path / (name + ".report.json")),
            ],
            capture_output=True,
            text=True,
        )
        assert negative.returncode == code, (name, negative.stdout, negative.stderr)
