"""Shared fixtures: the bundled suite configs and a couple of bare specs."""

import pathlib

import numpy as np
import pytest

from ecsw.config import load_config
from ecsw.metrics import (
    FibreMetric,
    PolynomialProfile,
    RoterMetric,
    RoterSpec,
    SinusoidProfile,
)

REPO = pathlib.Path(__file__).resolve().parent.parent
CONFIG_DIR = REPO / "configs"

# The three suite specs: dimensions 4/5/6 with the fibre inner products and
# endomorphisms used by the bundled configs.
CUBIC = PolynomialProfile((0.0, -1.0, 0.0, 1.0))


def make_spec(n: int, profile) -> RoterSpec:
    if n == 4:
        inner = FibreMetric(np.eye(2))
        A = np.diag([1.0, -1.0])
    elif n == 5:
        inner = FibreMetric(np.eye(3))
        A = np.diag([1.0, 1.0, -2.0])
    elif n == 6:
        inner = FibreMetric(np.diag([-1.0, 1.0, 1.0, 1.0]))
        A = np.diag([1.0, 1.0, -1.0, -1.0])
    else:
        raise ValueError(f"no suite spec for n={n}")
    return RoterSpec(inner, A, profile)


@pytest.fixture(scope="session")
def n4_spec():
    return make_spec(4, SinusoidProfile())


@pytest.fixture(scope="session")
def n4_metric(n4_spec):
    return RoterMetric(n4_spec)


@pytest.fixture(scope="session")
def lorentz_config():
    return load_config(str(CONFIG_DIR / "lorentz_n4_sin.json"), known_checks=None)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260817)
