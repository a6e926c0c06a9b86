"""Verification-suite configuration: JSON loading, validation, sampling.

A suite config is a JSON object with a ``spec`` block (inner product, the
self-adjoint traceless operator, and the scalar profile), plus optional
sampling, seeding, tolerance, and check-selection fields.  Everything is
validated eagerly; malformed input raises :class:`~ecsw.errors.ConfigError`
with a message naming the violated invariant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .metrics import (
    ExponentialProfile,
    PolynomialProfile,
    RoterSpec,
    SinusoidProfile,
)
from .tensors import FibreMetric

DEFAULT_SEED = 20260817
DEFAULT_SAMPLE_COUNT = 100
DEFAULT_POINT_BOX = {"t": (-1.5, 1.5), "s": (-2.0, 2.0), "v": (-1.0, 1.0)}

_PROFILE_FAMILIES = ("sinusoid", "polynomial", "exponential")


@dataclass(frozen=True)
class SuiteConfig:
    """Validated run configuration for the check suite."""

    spec: RoterSpec
    sample_count: int
    point_box: dict
    seed: int
    tolerances: dict
    checks: tuple | None  # None = every applicable check

    @property
    def n(self) -> int:
        return self.spec.n


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


def _as_float(value, name: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None
    _require(np.isfinite(out), f"{name} must be finite")
    return out


def _build_profile(block) -> object:
    _require(isinstance(block, dict), "spec.profile must be an object")
    family = block.get("family")
    _require(
        family in _PROFILE_FAMILIES,
        f"spec.profile.family must be one of {_PROFILE_FAMILIES}, got {family!r}",
    )
    known = {"family"}
    if family == "polynomial":
        coeffs = block.get("coeffs")
        _require(
            isinstance(coeffs, (list, tuple)) and len(coeffs) >= 1,
            "polynomial profile needs a nonempty coeffs list",
        )
        known.add("coeffs")
        profile = PolynomialProfile(
            tuple(_as_float(c, "profile coefficient") for c in coeffs)
        )
    elif family == "sinusoid":
        known |= {"amplitude", "frequency", "phase"}
        profile = SinusoidProfile(
            amplitude=_as_float(block.get("amplitude", 1.0), "profile amplitude"),
            frequency=_as_float(block.get("frequency", 1.0), "profile frequency"),
            phase=_as_float(block.get("phase", 0.0), "profile phase"),
        )
    else:
        known |= {"amplitude", "rate"}
        profile = ExponentialProfile(
            amplitude=_as_float(block.get("amplitude", 1.0), "profile amplitude"),
            rate=_as_float(block.get("rate", 1.0), "profile rate"),
        )
    extra = set(block) - known
    _require(not extra, f"unknown profile fields: {sorted(extra)}")
    return profile


def _build_spec(block) -> RoterSpec:
    _require(isinstance(block, dict), "config must contain a spec object")
    for key in ("inner", "A", "profile"):
        _require(key in block, f"spec is missing required field {key!r}")
    try:
        inner = FibreMetric(np.asarray(block["inner"], dtype=float))
        spec = RoterSpec(
            inner=inner,
            A=np.asarray(block["A"], dtype=float),
            profile=_build_profile(block["profile"]),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if "n" in block:
        declared = block["n"]
        _require(
            isinstance(declared, int) and declared == spec.n,
            f"declared n = {declared!r} but the spec block yields n = {spec.n}",
        )
    extra = set(block) - {"inner", "A", "profile", "n"}
    _require(not extra, f"unknown spec fields: {sorted(extra)}")
    return spec


def _build_point_box(block, default=None) -> dict:
    base = dict(DEFAULT_POINT_BOX if default is None else default)
    if block is None:
        return base
    _require(isinstance(block, dict), "point_box must be an object")
    for key, rng in block.items():
        _require(key in base, f"unknown point_box axis {key!r}")
        _require(
            isinstance(rng, (list, tuple)) and len(rng) == 2,
            f"point_box.{key} must be a [lo, hi] pair",
        )
        lo = _as_float(rng[0], f"point_box.{key}[0]")
        hi = _as_float(rng[1], f"point_box.{key}[1]")
        _require(lo < hi, f"point_box.{key} must satisfy lo < hi")
        base[key] = (lo, hi)
    return base


def load_config(source, known_checks=None) -> SuiteConfig:
    """Load and validate a suite config from a path or an already-parsed dict.

    ``known_checks``, when given, is the set of legal check names; any
    ``checks`` entry or ``tolerances`` key outside it is rejected.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        _require(path.is_file(), f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    else:
        raw = source
    _require(isinstance(raw, dict), "config root must be a JSON object")

    allowed = {"spec", "sample_count", "point_box", "seed", "tolerances", "checks"}
    extra = set(raw) - allowed
    _require(not extra, f"unknown config fields: {sorted(extra)}")

    spec = _build_spec(raw.get("spec"))

    sample_count = raw.get("sample_count", DEFAULT_SAMPLE_COUNT)
    _require(
        isinstance(sample_count, int) and sample_count >= 1,
        "sample_count must be a positive integer",
    )

    point_box = _build_point_box(raw.get("point_box"))

    seed = raw.get("seed", DEFAULT_SEED)
    _require(isinstance(seed, int) and seed >= 0, "seed must be a non-negative integer")

    tolerances = {}
    tol_block = raw.get("tolerances", {})
    _require(isinstance(tol_block, dict), "tolerances must be an object")
    for name, value in tol_block.items():
        if known_checks is not None:
            _require(name in known_checks, f"tolerance for unknown check {name!r}")
        tol = _as_float(value, f"tolerances.{name}")
        _require(tol > 0.0, f"tolerances.{name} must be positive")
        tolerances[name] = tol

    checks = raw.get("checks")
    if checks is not None:
        _require(
            isinstance(checks, list) and all(isinstance(c, str) for c in checks),
            "checks must be a list of check names",
        )
        seen = []
        for name in checks:
            if known_checks is not None:
                _require(name in known_checks, f"unknown check name {name!r}")
            if name not in seen:
                seen.append(name)
        checks = tuple(seen)

    return SuiteConfig(
        spec=spec,
        sample_count=sample_count,
        point_box=point_box,
        seed=seed,
        tolerances=tolerances,
        checks=checks,
    )


def sample_points(config: SuiteConfig, rng: np.random.Generator, count=None):
    """Draw chart points (t, s, v_1..v_{n-2}) uniformly from the point box."""
    count = config.sample_count if count is None else count
    n = config.n
    box = config.point_box
    pts = np.empty((count, n))
    pts[:, 0] = rng.uniform(box["t"][0], box["t"][1], size=count)
    pts[:, 1] = rng.uniform(box["s"][0], box["s"][1], size=count)
    pts[:, 2:] = rng.uniform(box["v"][0], box["v"][1], size=(count, n - 2))
    return pts


def config_echo(config: SuiteConfig) -> dict:
    """Normalized, JSON-ready snapshot of the configuration for reports."""
    profile = config.spec.profile
    if isinstance(profile, PolynomialProfile):
        pblock = {"family": "polynomial", "coeffs": list(profile.coeffs)}
    elif isinstance(profile, SinusoidProfile):
        pblock = {
            "family": "sinusoid",
            "amplitude": profile.amplitude,
            "frequency": profile.frequency,
            "phase": profile.phase,
        }
    else:
        pblock = {
            "family": "exponential",
            "amplitude": profile.amplitude,
            "rate": profile.rate,
        }
    return {
        "spec": {
            "n": config.n,
            "inner": config.spec.inner.matrix.tolist(),
            "A": config.spec.A.tolist(),
            "profile": pblock,
        },
        "sample_count": config.sample_count,
        "point_box": {k: list(v) for k, v in sorted(config.point_box.items())},
        "seed": config.seed,
        "tolerances": dict(sorted(config.tolerances.items())),
        "checks": None if config.checks is None else list(config.checks),
    }
