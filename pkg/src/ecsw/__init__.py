"""Verification toolkit for a null-parallel-Weyl metric family.

The package pairs closed-form metrics (the two-plus-fibre chart family,
constant-curvature controls, perturbed-flat controls) with a general
coordinate curvature engine and a registry of named, seeded checks covering
curvature decompositions, the null distribution cut out by the Weyl image,
vanishing characteristic forms, the isometry group of the family, and the
solution-space machinery behind the completeness construction.
"""

__version__ = "0.1.0"

from .errors import ConfigError, NumericalAbort
from .tensors import FibreMetric, Tensor, alternate, contract, wedge_eval_basis
from .metrics import (
    ConstantCurvatureMetric,
    ExponentialProfile,
    MetricJet,
    PerturbedFlatMetric,
    PolynomialProfile,
    RoterMetric,
    RoterSpec,
    SinusoidProfile,
    fd_jet_oracle,
)
from .curvature import CurvaturePack, curvature_pack
from .olszak import DistributionBasis, olszak_distribution, phi_and_recover_A
from .charforms import euler_form_at, generating_form_at, pfaffian
from .dynamics import (
    GroupElement,
    act,
    compose,
    identity_element,
    integrate_geodesic,
    inverse,
    solve_E_ode,
)
from .config import SuiteConfig, load_config, sample_points
from .checks import (
    CHECK_NAMES,
    REGISTRY,
    applicable_checks,
    build_report,
    report_bytes,
    run_checks,
)

__all__ = [
    "__version__",
    "ConfigError",
    "NumericalAbort",
    "FibreMetric",
    "Tensor",
    "alternate",
    "contract",
    "wedge_eval_basis",
    "ConstantCurvatureMetric",
    "ExponentialProfile",
    "MetricJet",
    "PerturbedFlatMetric",
    "PolynomialProfile",
    "RoterMetric",
    "RoterSpec",
    "SinusoidProfile",
    "fd_jet_oracle",
    "CurvaturePack",
    "curvature_pack",
    "DistributionBasis",
    "olszak_distribution",
    "phi_and_recover_A",
    "euler_form_at",
    "generating_form_at",
    "pfaffian",
    "GroupElement",
    "act",
    "compose",
    "identity_element",
    "integrate_geodesic",
    "inverse",
    "solve_E_ode",
    "SuiteConfig",
    "load_config",
    "sample_points",
    "CHECK_NAMES",
    "REGISTRY",
    "applicable_checks",
    "build_report",
    "report_bytes",
    "run_checks",
]
