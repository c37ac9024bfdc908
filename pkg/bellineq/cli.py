"""Command-line front end.

Exit codes: 0 success, 1 unreadable or malformed input, 2 constraint or range
error, 3 no violation at perfect efficiency, 4 non-monotonic efficiency scan,
5 numerical drift.
"""
import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from bellineq import LOG_FORMAT, models
from bellineq.database import SessionLocal, engine
from bellineq.enums import Preset, Scenario, SearchSpace, SettingsMode, SweepFamily
from bellineq.exceptions import (
    InvalidArgument,
    NonMonotonicError,
    NoViolationError,
    NumericalDriftError,
)
from bellineq.repository import catalog, detection, lhv, optimize
from bellineq.repository import runs as runs_repo
from bellineq.repository.polynomial import BellPolynomial, FamilyParams, three_qubit_family
from bellineq.schemas.lhv import ConstraintReportOut, LhvBoundOut
from bellineq.schemas.optimize import OptimizerConfig, ViolationOut
from bellineq.schemas.polynomial import PolynomialIO
from bellineq.schemas.run import RunManifest

load_dotenv()

logger = logging.getLogger("bellineq.cli")

EXIT_OK = 0
EXIT_MALFORMED = 1
EXIT_RANGE = 2
EXIT_NO_VIOLATION = 3
EXIT_NON_MONOTONIC = 4
EXIT_DRIFT = 5


class MalformedInput(Exception):
    pass


def _default_seed() -> int:
    return int(os.getenv("BELLINEQ_SEED", "0"))


def _dump(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def _emit(text: str, out: Optional[str], manifest: RunManifest, stopwatch: runs_repo.Stopwatch, record: bool) -> None:
    outputs: List[str] = []
    if out:
        Path(out).write_text(text)
        outputs.append(out)
    else:
        sys.stdout.write(text)
    finished = runs_repo.finish_manifest(manifest, outputs, stopwatch.elapsed())
    if out:
        runs_repo.write_sidecar(finished, out)
    if record:
        _record(finished)


def _record(manifest: RunManifest) -> None:
    models.Base.metadata.create_all(bind=engine)
    db = SessionLocal()
    try:
        runs_repo.record_run(db, manifest)
    finally:
        db.close()


def load_polynomial(source: str) -> BellPolynomial:
    # preset name or path to polynomial JSON
    if source in {p.value for p in Preset}:
        return catalog.preset_polynomial(Preset(source))
    try:
        raw = json.loads(Path(source).read_text())
        return PolynomialIO.model_validate(raw).to_polynomial()
    except (OSError, json.JSONDecodeError, ValidationError, InvalidArgument) as exc:
        raise MalformedInput(f"{source}: {exc}") from exc


# ---------------------------------------------------------------- commands
def cmd_construct(args) -> int:
    stopwatch = runs_repo.Stopwatch()
    if args.preset:
        poly = catalog.preset_polynomial(Preset(args.preset))
        name = args.preset
        parameters = {"preset": args.preset}
    else:
        params = FamilyParams(u=args.u, r=args.r, s=args.s, t=args.t)
        report = lhv.check_constraints(params)
        if not report.passed:
            sys.stderr.write(_dump(ConstraintReportOut.from_report(report).model_dump()))
            if not args.force:
                logger.error("constraints violated: %s", ", ".join(report.violated))
                return EXIT_RANGE
            logger.warning("constructing despite violated constraints: %s", ", ".join(report.violated))
        poly = three_qubit_family(params)
        if not args.raw:
            poly = poly.primitive()
        name = None
        parameters = {"u": args.u, "r": args.r, "s": args.s, "t": args.t, "raw": args.raw, "force": args.force}
    manifest = runs_repo.build_manifest("construct", parameters, None)
    matches, result = lhv.verify_declared_bound(poly)
    logger.info(
        "declared bound %s, vertex maximum %s over %d vertices%s",
        poly.bound, result.maximum, result.vertices, "" if matches else " (EXCEEDED)",
    )
    io = PolynomialIO.from_polynomial(poly, name=name, run_id=manifest.run_id)
    _emit(_dump(io.model_dump(exclude_none=True)), args.out, manifest, stopwatch, args.ledger)
    return EXIT_OK


def cmd_lhv(args) -> int:
    stopwatch = runs_repo.Stopwatch()
    poly = load_polynomial(args.source)
    manifest = runs_repo.build_manifest("lhv", {"source": args.source}, None)
    result = lhv.vertex_max(poly)
    report = LhvBoundOut.from_result(result, poly.bound, run_id=manifest.run_id)
    _emit(_dump(report.model_dump(exclude_none=True)), args.out, manifest, stopwatch, args.ledger)
    return EXIT_OK


def cmd_qmax(args) -> int:
    stopwatch = runs_repo.Stopwatch()
    poly = load_polynomial(args.source)
    mode = SettingsMode(args.settings)
    cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed, search_space=SearchSpace(args.search_space))
    parameters = {"source": args.source, "settings": mode.value, "config": cfg.model_dump(mode="json")}
    manifest = runs_repo.build_manifest("qmax", parameters, args.seed)
    if mode == SettingsMode.fixed:
        result = optimize.fixed_violation(poly)
    else:
        result = optimize.max_violation(poly, cfg)
    report = ViolationOut.from_result(result, mode, run_id=manifest.run_id)
    _emit(_dump(report.model_dump(mode="json", exclude_none=True)), args.out, manifest, stopwatch, args.ledger)
    return EXIT_OK


def cmd_sweep(args) -> int:
    stopwatch = runs_repo.Stopwatch()
    family = SweepFamily(args.family)
    if family == SweepFamily.eprime:
        grid = optimize.r_grid(args.r_min, args.r_max, args.steps)
        parameters = {"family": family.value, "r_min": args.r_min, "r_max": args.r_max, "steps": args.steps}
        manifest = runs_repo.build_manifest("sweep", parameters, None)
        frame = optimize.sweep_r(grid)
        sys.stderr.write(f"asymptote (1+sqrt(17))/2 = {optimize.eprime_asymptote():.6f}; "
                         f"last value {frame['lambda_max'].iloc[-1]:.6f}\n")
    else:
        grid = optimize.u_grid(args.u_min, args.u_max, args.steps)
        cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed)
        parameters = {
            "family": family.value, "u_min": args.u_min, "u_max": args.u_max, "steps": args.steps,
            "free_angles": args.free_angles, "config": cfg.model_dump(mode="json"),
        }
        manifest = runs_repo.build_manifest("sweep", parameters, args.seed)
        frame = optimize.sweep_u(grid, cfg, free_angles=args.free_angles)
        sys.stderr.write(f"last factor {frame['factor'].iloc[-1]:.6f} (asymptote about 1.27)\n")
    text = frame.to_csv(index=False, float_format=optimize.CSV_FLOAT_FORMAT)
    _emit(text, args.out, manifest, stopwatch, args.ledger)
    return EXIT_OK


def cmd_threshold(args) -> int:
    stopwatch = runs_repo.Stopwatch()
    try:
        name, form = catalog.resolve_inequality(args.ineq)
    except InvalidArgument as exc:
        raise MalformedInput(str(exc)) from exc
    cfg = OptimizerConfig(restarts=args.restarts, seed=args.seed, search_space=SearchSpace(args.search_space))
    parameters = {"ineq": args.ineq, "scenario": args.scenario, "tol": args.tol, "config": cfg.model_dump(mode="json")}
    manifest = runs_repo.build_manifest("threshold", parameters, args.seed)
    report = detection.threshold(form, Scenario(args.scenario), args.tol, cfg, name=name)
    report = report.model_copy(update={"run_id": manifest.run_id})
    sys.stderr.write(detection.render_table([report]) + "\n")
    _emit(_dump(report.model_dump(mode="json", exclude_none=True)), args.out, manifest, stopwatch, args.ledger)
    return EXIT_OK


# ------------------------------------------------------------------ parser
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellineq", description="Bell inequalities: bounds, violations, thresholds.")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--no-ledger", dest="ledger", action="store_false", help="do not record the run")
    sub = parser.add_subparsers(dest="command", required=True)

    construct = sub.add_parser("construct", help="build a three-qubit inequality")
    construct.add_argument("--preset", choices=[p.value for p in Preset])
    for name in ("u", "r", "s", "t"):
        construct.add_argument(f"--{name}", default="0", help="non-negative rational")
    construct.add_argument("--force", action="store_true", help="construct even if constraints fail")
    construct.add_argument("--raw", action="store_true", help="keep the unscaled form with bound 2+u")
    construct.add_argument("--out")
    construct.set_defaults(handler=cmd_construct)

    bound = sub.add_parser("lhv", help="exact LHV bound by vertex enumeration")
    bound.add_argument("source", help="polynomial JSON path or preset name")
    bound.add_argument("--out")
    bound.set_defaults(handler=cmd_lhv)

    qmax = sub.add_parser("qmax", help="maximal quantum value and violation factor")
    qmax.add_argument("source", help="polynomial JSON path or preset name")
    qmax.add_argument("--settings", choices=[m.value for m in SettingsMode], default=SettingsMode.optimize.value)
    qmax.add_argument("--seed", type=int, default=_default_seed())
    qmax.add_argument("--restarts", type=int, default=64)
    qmax.add_argument("--search-space", choices=[s.value for s in SearchSpace], default=SearchSpace.sphere.value)
    qmax.add_argument("--out")
    qmax.set_defaults(handler=cmd_qmax)

    sweep = sub.add_parser("sweep", help="CSV sweeps over r or u")
    sweep.add_argument("--family", choices=[f.value for f in SweepFamily], required=True)
    sweep.add_argument("--r-min", type=float, default=0.0)
    sweep.add_argument("--r-max", type=float, default=100.0)
    sweep.add_argument("--u-min", type=float, default=0.0)
    sweep.add_argument("--u-max", type=float, default=20.0)
    sweep.add_argument("--steps", type=int, default=200)
    sweep.add_argument("--seed", type=int, default=_default_seed())
    sweep.add_argument("--restarts", type=int, default=64)
    sweep.add_argument("--free-angles", action="store_true", help="add the optimum over all settings")
    sweep.add_argument("--out")
    sweep.set_defaults(handler=cmd_sweep)

    thr = sub.add_parser("threshold", help="detection-efficiency threshold")
    thr.add_argument("--ineq", default=Preset.pi5.value, help="pi5, ci6, mabk or catalog:<path>[#name]")
    thr.add_argument("--scenario", choices=[s.value for s in Scenario], default=Scenario.symmetric.value)
    thr.add_argument("--tol", type=float, default=1e-3)
    thr.add_argument("--seed", type=int, default=_default_seed())
    thr.add_argument("--restarts", type=int, default=64)
    thr.add_argument("--search-space", choices=[s.value for s in SearchSpace], default=SearchSpace.xy_plane.value)
    thr.add_argument("--out")
    thr.set_defaults(handler=cmd_threshold)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    # stdout carries the artifacts
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )
    try:
        return args.handler(args)
    except MalformedInput as exc:
        logger.error("malformed input: %s", exc)
        return EXIT_MALFORMED
    except NoViolationError as exc:
        logger.error("%s", exc)
        return EXIT_NO_VIOLATION
    except NonMonotonicError as exc:
        logger.error("%s", exc)
        return EXIT_NON_MONOTONIC
    except NumericalDriftError as exc:
        logger.error("%s", exc)
        return EXIT_DRIFT
    except (InvalidArgument, ValidationError) as exc:
        logger.error("%s", exc)
        return EXIT_RANGE


if __name__ == "__main__":
    sys.exit(main())
