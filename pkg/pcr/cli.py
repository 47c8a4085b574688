"""
Command-line entry point.

Exit codes: 0 on completion (a non-rejection is a completed test), 2 on a
usage error, 1 on a data, I/O or numerical failure.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional

from pydantic import ValidationError

from pcr.config import get_settings
from pcr.crt import run_crt
from pcr.data import read_dataset_csv
from pcr.errors import DomainError, PcrError
from pcr.parameter_free import DEFAULT_GRID, run_parameter_free
from pcr.pcr_core import run_pcr
from pcr.power_oracle import build_power_report, optimal_num_labels
from pcr.reporting import dumps, to_jsonable, write_json
from pcr.robust import pinsker_delta_gaussian, run_robust_pcr
from pcr.samplers import parse_sampler_spec
from pcr.schemas import GroupedPcrConfig, ModelId, ModelSpec, PcrConfig, RobustConfig, ThresholdKind, TieBreak
from pcr.scores import SumDatasetScore, score_builtin
from pcr.simlab import build_model, draw_coefficients, load_experiments, run_experiments

logger = logging.getLogger("pcr")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _str_list(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _common(parser: argparse.ArgumentParser, default_seed: Optional[int]) -> None:
    parser.add_argument("--seed", type=int, default=default_seed, help="Root seed of every random stream")
    parser.add_argument("--threads", type=int, default=None, help="Worker cap (default: PCR_THREADS)")
    parser.add_argument("--output", default=None, help="Write the report here instead of stdout")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR (default: PCR_LOG_LEVEL)")


def _data_args(parser: argparse.ArgumentParser, default_score: str) -> None:
    parser.add_argument("--input", required=True, help="Dataset CSV with columns x,y,z1..zq")
    parser.add_argument("--sampler", default="standard-normal",
                        help="standard-normal[:sd], gaussian-linear:<v.csv>[:sd] or kernel:<model.json>")
    parser.add_argument("--score", default=default_score,
                        help="residual_linear_z1, sq_loss_xy or ols_residual (with --b0/--b1)")
    parser.add_argument("--b0", type=float, default=None, help="Intercept for the ols_residual score")
    parser.add_argument("--b1", type=float, default=None, help="Slope for the ols_residual score")


def _label_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--L", type=int, default=5, help="Number of labels")
    parser.add_argument("--K", type=int, default=4, help="Counterfeit ratio; each sample gets K*L-1 counterfeits")
    parser.add_argument("--alpha", type=float, default=0.1, help="Significance level")
    parser.add_argument("--threshold", choices=[t.value for t in ThresholdKind], default=ThresholdKind.ASYM.value,
                        help="Rejection threshold")
    parser.add_argument("--tie-break", choices=[t.value for t in TieBreak], default=TieBreak.LITERAL.value,
                        help="literal >= rank rule, or uniform random placement among ties")


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="pcr", description="Conditional independence testing with PCR")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="Run the PCR test on a dataset")
    _common(p, settings.seed)
    _data_args(p, "residual_linear_z1")
    _label_args(p)
    p.add_argument("--details", action="store_true", help="Include per-sample ranks and labels")

    p = sub.add_parser("crt", help="Run the conditional randomization test on a dataset")
    _common(p, settings.seed)
    _data_args(p, "sq_loss_xy")
    p.add_argument("--M", type=int, default=1000, help="Number of counterfeit datasets")
    p.add_argument("--alpha", type=float, default=0.1, help="Significance level")

    p = sub.add_parser("pf", help="Run parameter-free PCR over a grid of L")
    _common(p, settings.seed)
    _data_args(p, "residual_linear_z1")
    p.add_argument("--K", type=int, default=4, help="Counterfeit ratio")
    p.add_argument("--grid", type=_int_list, default=list(DEFAULT_GRID), help="Comma-separated L values")
    p.add_argument("--alpha", type=float, default=0.1, help="Significance level")
    p.add_argument("--p-kind", choices=[t.value for t in ThresholdKind], default=ThresholdKind.FINITE.value,
                   help="p-value used per L")
    p.add_argument("--shared", action="store_true", help="Relabel one counterfeit draw for every L")

    p = sub.add_parser("robust", help="Run robust PCR with an approximate sampler")
    _common(p, settings.seed)
    _data_args(p, "residual_linear_z1")
    _label_args(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--delta", type=float, help="Bound on the sampler's expected total variation")
    group.add_argument("--eta", type=float, help="Use the Pinsker bound for a Gaussian scale mismatch of 1+eta")
    p.add_argument("--details", action="store_true", help="Include per-sample ranks and labels")

    p = sub.add_parser("oracle", help="Theoretical power summary of a synthetic model")
    _common(p, settings.seed)
    p.add_argument("--model", required=True, choices=[m.value for m in ModelId if m != ModelId.ROBUST_MISMATCH])
    p.add_argument("--n", type=int, required=True, help="Sample size")
    p.add_argument("--L", type=int, default=5, help="Number of labels")
    p.add_argument("--K", type=int, default=4, help="Counterfeit ratio")
    p.add_argument("--alpha", type=float, default=0.1, help="Significance level")
    p.add_argument("--beta", type=float, default=0.1, help="Target type-II error")
    p.add_argument("--theta", type=float, default=1e-3, help="Spike width for the regression models")
    p.add_argument("--a", type=float, default=0.0, help="Coefficient of X for quadratic_a")
    p.add_argument("--zy-samples", type=int, default=2000, help="Monte Carlo draws of (Z, Y) for the ODC")
    p.add_argument("--scan-L", type=_int_list, default=None,
                   help="Also report the L minimizing the power-condition bound over these candidates")

    p = sub.add_parser("simulate", help="Run replicated experiments from a TOML/JSON file")
    _common(p, None)
    p.add_argument("--config", required=True, help="Experiment file")
    p.add_argument("--full", action="store_true", help="Use 10,000 replicates per experiment")
    p.add_argument("--record-timing", action="store_true", help="Fill the seconds column")
    p.add_argument("--details", action="store_true", help="Also write per-replicate JSON next to the CSV")

    p = sub.add_parser("pipeline", help="Grouped PCR on trip CSVs")
    _common(p, settings.seed)
    p.add_argument("--test", required=True, help="Test trips CSV")
    p.add_argument("--train", required=True, help="Training trips CSV")
    p.add_argument("--responses", type=_str_list, default=["user_type", "date", "weekday"],
                   help="Comma-separated responses")
    p.add_argument("--L", type=int, default=10, help="Number of labels")
    p.add_argument("--K", type=int, default=200, help="Counterfeit ratio")
    p.add_argument("--alpha", type=float, default=0.05, help="Significance level")
    p.add_argument("--threshold", choices=[t.value for t in ThresholdKind], default=ThresholdKind.FINITE.value)
    p.add_argument("--group-size", type=int, default=4, help="Samples per group")
    p.add_argument("--min-count", type=int, default=20, help="Minimum training rides per route")
    p.add_argument("--bandwidth", type=float, default=20.0, help="Kernel bandwidth in minutes")
    p.add_argument("--save-kernel", default=None, help="Also save the fitted kernel model as JSON")

    p = sub.add_parser("fixture", help="Write a synthetic trip test/train pair")
    _common(p, settings.seed)
    p.add_argument("--out-dir", required=True, help="Directory for test.csv and train.csv")
    p.add_argument("--effect", type=float, default=0.0, help="Extra minutes for casual riders (0 = null)")
    return parser


def _score(args):
    return score_builtin(args.score, args.b0, args.b1)


def _with_details(result, details: bool) -> Any:
    payload = result.to_json_dict()
    if details:
        payload["ranks"] = result.ranks
        payload["labels"] = result.labels
    return payload


def cmd_test(args) -> Any:
    cfg = PcrConfig(num_labels=args.L, counterfeit_ratio=args.K, alpha=args.alpha, threshold_kind=args.threshold,
                    tie_break=args.tie_break)
    data = read_dataset_csv(args.input)
    result = run_pcr(data, parse_sampler_spec(args.sampler), _score(args), cfg, args.seed, n_jobs=args.threads)
    return _with_details(result, args.details)


def cmd_crt(args) -> Any:
    data = read_dataset_csv(args.input)
    result = run_crt(data, parse_sampler_spec(args.sampler), SumDatasetScore(_score(args)), args.M, args.seed,
                     args.alpha, n_jobs=args.threads)
    return {**result.to_json_dict(), "p": float(result.p)}


def cmd_pf(args) -> Any:
    data = read_dataset_csv(args.input)
    return run_parameter_free(data, parse_sampler_spec(args.sampler), _score(args), args.K, args.grid, args.alpha,
                              args.p_kind, args.seed, shared=args.shared, n_jobs=args.threads)


def cmd_robust(args) -> Any:
    delta = args.delta if args.delta is not None else pinsker_delta_gaussian(args.eta)
    cfg = RobustConfig(num_labels=args.L, counterfeit_ratio=args.K, alpha=args.alpha, threshold_kind=args.threshold,
                       tie_break=args.tie_break, delta=delta)
    data = read_dataset_csv(args.input)
    result = run_robust_pcr(data, parse_sampler_spec(args.sampler), _score(args), cfg, args.seed,
                            n_jobs=args.threads)
    return _with_details(result, args.details)


def cmd_oracle(args) -> Any:
    spec = ModelSpec(model_id=args.model, n=args.n, theta=args.theta, a=args.a)
    coefficients = None
    if spec.model_id not in (ModelId.CRT_FAILURE_EXAMPLE.value, ModelId.THETA_FAMILY.value):
        coefficients = draw_coefficients(spec, args.seed)
    report = build_power_report(build_model(spec, coefficients), args.n, args.K, args.L, args.alpha, args.beta,
                                zy_samples=args.zy_samples, seed=args.seed, n_jobs=args.threads)
    if not args.scan_L:
        return report
    best_finite, finite = optimal_num_labels(args.n, args.K, args.alpha, args.beta, report.B, report.C,
                                             ThresholdKind.FINITE.value, args.scan_L)
    best_asym, asym = optimal_num_labels(args.n, args.K, args.alpha, args.beta, report.B, report.C,
                                         ThresholdKind.ASYM.value, args.scan_L)
    return {
        "report": report,
        "optimal_L": {
            "finite": {"best": best_finite, "rhs": {str(L): v for L, v in finite.items()}},
            "asym": {"best": best_asym, "rhs": {str(L): v for L, v in asym.items()}},
        },
    }


def cmd_simulate(args) -> None:
    specs = load_experiments(args.config, full=args.full)
    if args.details:
        specs = [spec.model_copy(update={"per_replicate": True}) for spec in specs]
    if args.seed is not None:
        # an explicit --seed overrides the seeds in the file
        specs = [spec.model_copy(update={"seed": args.seed}) for spec in specs]
    csv_path = Path(args.output) if args.output else get_settings().reports_dir / f"{Path(args.config).stem}.csv"
    if csv_path.exists():
        csv_path.unlink()
    reports = run_experiments(specs, csv_path, n_jobs=args.threads, record_timing=args.record_timing)
    if args.details:
        write_json(reports, csv_path.with_suffix(".json"))
    logger.info("%d experiments written to %s", len(reports), csv_path)


def cmd_pipeline(args) -> Any:
    from pcr.pipeline.graph import run_pipeline
    from pcr.pipeline.kernel import kernel_fit
    from pcr.pipeline.loader import load_trips

    cfg = GroupedPcrConfig(num_labels=args.L, counterfeit_ratio=args.K, alpha=args.alpha,
                           threshold_kind=args.threshold, group_size=args.group_size)
    results = run_pipeline(args.test, args.train, args.responses, cfg, args.seed, args.min_count, args.bandwidth,
                           output=args.output, n_jobs=args.threads)
    if args.save_kernel:
        kernel_fit(load_trips(args.train), args.bandwidth, min_count=args.min_count).save(args.save_kernel)
    # the reporter already wrote --output
    return None if args.output else results


def cmd_fixture(args) -> Any:
    from pcr.pipeline.fixtures import generate_trip_fixture

    fixture = generate_trip_fixture(args.out_dir, planted_effect=args.effect, seed=args.seed)
    return {"test": str(fixture.test_path), "train": str(fixture.train_path),
            "surviving_test_rides": fixture.surviving_test_rides()}


COMMANDS = {
    "test": cmd_test,
    "crt": cmd_crt,
    "pf": cmd_pf,
    "robust": cmd_robust,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "pipeline": cmd_pipeline,
    "fixture": cmd_fixture,
}


def _configure_logging(level: Optional[str]) -> None:
    level = (level or get_settings().log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        parser = build_parser()
    except ValueError as e:
        print(f"pcr: configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    _configure_logging(args.log_level)
    try:
        payload = COMMANDS[args.command](args)
        if payload is not None:
            if args.output and args.command not in ("simulate", "pipeline"):
                write_json(payload, args.output)
            else:
                sys.stdout.write(dumps(to_jsonable(payload)))
    except (ValidationError, DomainError) as e:
        print(f"pcr {args.command}: invalid arguments: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (PcrError, OSError) as e:
        print(f"pcr {args.command}: {e}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
