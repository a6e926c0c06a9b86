"""Command-line entry points.

Exit codes: 0 all checks passed, 1 at least one check failed,
2 configuration error, 3 numerical abort (non-finite values).
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from .charforms import euler_form_at, generating_form_at
from .checks import (
    CHECK_NAMES,
    MAX_EULER_DIM,
    build_report,
    check_rng,
    report_bytes,
    run_checks,
)
from .config import load_config, sample_points
from .curvature import curvature_pack
from .dynamics import MAX_STEP, integrate_geodesic
from .errors import ConfigError, NumericalAbort
from .metrics import RoterMetric, fd_jet_oracle
from .olszak import check_structure, olszak_distribution, phi_and_recover_A
from .oracles import jet_comparison

DEFAULT_REPORT = "ecsw_report.json"


def _fmt(x) -> str:
    return repr(float(x))


def _parse_vector(text: str, n: int, what: str) -> np.ndarray:
    try:
        vals = [float(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"could not parse {what} {text!r}: {exc}") from None
    if len(vals) != n:
        raise ConfigError(f"{what} needs {n} comma-separated numbers, got {len(vals)}")
    return np.asarray(vals, dtype=float)


def _parse_span(text: str) -> tuple:
    vals = _parse_vector(text, 2, "span")
    if vals[1] <= vals[0]:
        raise ConfigError("span must be increasing: a,b with a < b")
    return float(vals[0]), float(vals[1])


def _load(path: str):
    config = load_config(path, known_checks=CHECK_NAMES)
    env_seed = os.environ.get("ECSW_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            raise ConfigError(f"ECSW_SEED must be an integer, got {env_seed!r}") from None
        if seed < 0:
            raise ConfigError("ECSW_SEED must be non-negative")
        config = dataclasses.replace(config, seed=seed)
    return config


# --- subcommands -------------------------------------------------------------


def cmd_verify(args) -> int:
    config = _load(args.config)
    results = run_checks(config, jobs=args.jobs)
    report = build_report(config, results, include_timings=args.timings)
    with open(args.report, "wb") as fh:
        fh.write(report_bytes(report))
    width = max(len(r.name) for r in results)
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        rel = "<" if r.direction == "below" else ">"
        print(
            f"{mark}  {r.name:<{width}}  residual {r.residual:.3e} "
            f"{rel} tol {r.tolerance:.1e}  [{r.anchor}]"
        )
    summary = report["summary"]
    print(
        f"{summary['passed']}/{summary['total']} checks passed; "
        f"report written to {args.report}"
    )
    return 0 if summary["overall_pass"] else 1


def cmd_curvature(args) -> int:
    config = _load(args.config)
    metric = RoterMetric(config.spec)
    point = _parse_vector(args.point, config.n, "point")
    pack = curvature_pack(metric.jet(point, order=3))
    print(f"point = ({', '.join(_fmt(c) for c in point)})")
    print(f"scalar = {_fmt(pack.scalar)}")
    names = ["t", "s"] + [f"v{i + 1}" for i in range(config.n - 2)]
    for i in range(config.n):
        for j in range(i, config.n):
            if abs(pack.ricci[i, j]) > 1e-14:
                print(f"rho_{names[i]}{names[j]} = {_fmt(pack.ricci[i, j])}")
    print(f"sup|W| = {_fmt(np.max(np.abs(pack.weyl)))}")
    print(f"sup|nabla W| = {_fmt(np.max(np.abs(pack.nabla_weyl)))}")
    print(f"sup|nabla R| = {_fmt(np.max(np.abs(pack.nabla_riemann)))}")
    return 0


def cmd_olszak(args) -> int:
    config = _load(args.config)
    metric = RoterMetric(config.spec)
    point = _parse_vector(args.point, config.n, "point")
    pack = curvature_pack(metric.jet(point, order=2))
    db = olszak_distribution(pack)
    if db.degenerate:
        print("distribution degenerate: every image 2-form vanished")
        return 1
    print(f"dim D = {db.dim_D}")
    for k in range(db.dim_D):
        vec = db.basis_D[:, k]
        print(f"D basis {k}: ({', '.join(_fmt(c) for c in vec)})")
    st = check_structure(db, pack)
    for key in sorted(st):
        print(f"{key} residual = {_fmt(st[key])}")
    if db.dim_D == 1:
        pv = phi_and_recover_A(pack, db)
        print(f"norm factor = {_fmt(pv.norm_factor)}")
        print("recovered A =")
        for row in pv.recovered_A:
            print("  " + "  ".join(_fmt(c) for c in row))
    return 0


def cmd_charforms(args) -> int:
    config = _load(args.config)
    metric = RoterMetric(config.spec)
    point = _parse_vector(args.point, config.n, "point")
    pack = curvature_pack(metric.jet(point, order=2))
    n = config.n
    if n % 2 == 0 and n <= MAX_EULER_DIM:
        print(f"euler form (identity basis) = {_fmt(euler_form_at(pack, np.eye(n)))}")
    else:
        print("euler form: not applicable at this dimension")
    gen = generating_form_at(pack, 1, np.eye(n)[:, :4])
    print(f"first generating form (first four basis vectors) = {_fmt(gen)}")
    return 0


def cmd_geodesic(args) -> int:
    config = _load(args.config)
    metric = RoterMetric(config.spec)
    x0 = _parse_vector(args.x0, config.n, "x0")
    v0 = _parse_vector(args.v0, config.n, "v0")
    span = _parse_span(args.span)
    if not 0.0 < args.step <= MAX_STEP:
        raise ConfigError(f"step must lie in (0, {MAX_STEP}]")
    traj = integrate_geodesic(metric, x0, v0, span, step=args.step)
    traj.to_csv(args.out)
    drift = float(np.max(np.abs(traj.speed_sq - traj.speed_sq[0])))
    print(f"wrote {len(traj.taus)} rows to {args.out}")
    print(f"speed-squared drift = {_fmt(drift)}")
    return 0


def cmd_oracle(args) -> int:
    config = _load(args.config)
    metric = RoterMetric(config.spec)
    rng = check_rng(config.seed, "cmd_oracle")
    points = sample_points(config, rng, 5)
    print("block   worst relative |analytic - finite difference|")
    worst = {"g": 0.0, "dg": 0.0, "d2g": 0.0, "d3g": 0.0}
    for point in points:
        exact = metric.jet(point, order=3)
        approx = fd_jet_oracle(metric, point, step=1e-3)
        scales = {
            "g": exact.g, "dg": exact.dg, "d2g": exact.d2g, "d3g": exact.d3g,
        }
        for key, val in jet_comparison(exact, approx).items():
            scale = max(1.0, float(np.max(np.abs(scales[key]))))
            worst[key] = max(worst[key], val / scale)
    ok = True
    for key in ("g", "dg", "d2g", "d3g"):
        print(f"{key:<6}  {worst[key]:.3e}")
        ok = ok and worst[key] < 1e-6
    print("all blocks < 1e-06" if ok else "finite-difference disagreement above 1e-06")
    return 0 if ok else 1


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecsw",
        description="Verification toolkit for the null-parallel-Weyl metric family.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the configured check suite")
    p.add_argument("--config", required=True)
    p.add_argument("--report", default=DEFAULT_REPORT)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument(
        "--timings",
        action="store_true",
        help="include wall-clock seconds per check (report bytes then vary)",
    )
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("curvature", help="print curvature data at a point")
    p.add_argument("--config", required=True)
    p.add_argument("--point", required=True, help="comma-separated coordinates")
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("olszak", help="print the null distribution at a point")
    p.add_argument("--config", required=True)
    p.add_argument("--point", required=True, help="comma-separated coordinates")
    p.set_defaults(func=cmd_olszak)

    p = sub.add_parser("charforms", help="print characteristic forms at a point")
    p.add_argument("--config", required=True)
    p.add_argument("--point", required=True, help="comma-separated coordinates")
    p.set_defaults(func=cmd_charforms)

    p = sub.add_parser("geodesic", help="integrate a geodesic and export CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--x0", required=True, help="comma-separated start point")
    p.add_argument("--v0", required=True, help="comma-separated start velocity")
    p.add_argument("--span", required=True, help="parameter range a,b")
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("oracle", help="finite-difference jet comparison table")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 2
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
