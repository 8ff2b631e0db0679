"""Command-line entry point, configuration parsing, and report emission."""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from . import __version__
from .analytic import (
    analytic_target_risk,
    estimator_skewness,
    estimator_variance,
    expected_moment,
)
from .experiments import (
    ExperimentConfig,
    ModelSelectionResult,
    RiskDistributionResult,
    WeightHistogramResult,
    run_model_selection,
    run_risk_distribution,
    run_weight_histogram,
)
from .risk import THETA_BASE
from .sampling import BIT_GENERATOR_NAME, NORMAL_METHOD
from .selection import DEFAULT_GRID, LambdaGrid
from .stats import HistogramData

_STREAM_SCHEME = (
    "Philox keyed with (substream master, repetition index); substream master "
    "is the first state word of SeedSequence(master_seed, "
    "spawn_key=(experiment tag, sample size))"
)


@dataclass(frozen=True)
class RunMetadata:
    """Everything needed to reproduce a run with this implementation."""

    tool: str
    version: str
    timestamp_utc: str
    master_seed: int
    prng: dict
    config: dict
    outputs: dict

    @classmethod
    def for_run(cls, config: ExperimentConfig,
                outputs: dict[str, list[str]]) -> "RunMetadata":
        return cls(
            tool="iwrisk",
            version=__version__,
            timestamp_utc=datetime.datetime.now(datetime.timezone.utc).isoformat(),
            master_seed=config.master_seed,
            prng={
                "bit_generator": BIT_GENERATOR_NAME,
                "normal_method": NORMAL_METHOD,
                "stream_scheme": _STREAM_SCHEME,
            },
            config=asdict(config),
            outputs=outputs,
        )


def _fmt(value: float) -> str:
    """17 significant digits: lossless float round-trip for the CSV contract."""
    return format(float(value), ".17g")


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a value >= 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"expected a value > 0, got {value}")
    return value


def _sizes(text: str) -> tuple[int, ...]:
    try:
        parts = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        )
    if not parts or any(n < 1 for n in parts):
        raise argparse.ArgumentTypeError(f"sample sizes must be >= 1, got {text!r}")
    return parts


def _grid(text: str) -> LambdaGrid:
    pieces = text.split(":")
    if len(pieces) != 3:
        raise argparse.ArgumentTypeError(f"expected MIN:MAX:STEP, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in pieces)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers in MIN:MAX:STEP, got {text!r}")
    try:
        return LambdaGrid(min=lo, max=hi, step=step)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    common.add_argument("--reps", type=_positive_int, default=10_000,
                        help="repetitions per sample size (default 10000)")
    common.add_argument("--sizes", type=_sizes, default=(2, 4, 8, 16, 32, 64),
                        metavar="N1,N2,...", help="sample sizes (default 2,4,8,16,32,64)")
    common.add_argument("--sigma-source", type=_positive_float, default=0.75,
                        help="source marginal std (default 0.75)")
    common.add_argument("--sigma-target", type=_positive_float, default=1.0,
                        help="target marginal std (default 1.0)")
    common.add_argument("--theta", type=float, default=THETA_BASE,
                        help="fixed classifier parameter (default 1/(2*sqrt(pi)))")
    common.add_argument("--lambda-grid", type=_grid, default=DEFAULT_GRID,
                        metavar="MIN:MAX:STEP", help="search grid (default -5:5:0.01)")
    common.add_argument("--selection", choices=("closed-form", "grid"), default="grid",
                        help="offset selection method (default grid)")
    common.add_argument("--body-tail-risk", choices=("fixed", "minimized"),
                        default="fixed",
                        help="risk the body/tail threshold averages (default fixed)")
    common.add_argument("--bins", type=_positive_int, default=50,
                        help="histogram bins (default 50)")
    common.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory (default ./out)")
    common.add_argument("--svg", action="store_true", help="also emit SVG plots")
    common.add_argument("--threads", type=_positive_int, default=1,
                        help="worker threads for repetitions (default 1)")

    parser = argparse.ArgumentParser(
        prog="iwrisk",
        description="Simulate importance-weighted risk estimation under covariate "
                    "shift: weight histograms, risk sampling distributions, and "
                    "regularization-offset selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("weights", parents=[common],
                   help="histogram of the exact importance weights")
    sub.add_parser("risk-dist", parents=[common],
                   help="sampling distribution of the weighted risk estimate")
    sub.add_parser("model-select", parents=[common],
                   help="offset selection with body/tail analysis")
    sub.add_parser("oracle", parents=[common],
                   help="print analytic oracle values for a configuration")
    sub.add_parser("all", parents=[common], help="run the three experiments")
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        master_seed=args.seed,
        repetitions=args.reps,
        sample_sizes=args.sizes,
        sigma_source=args.sigma_source,
        sigma_target=args.sigma_target,
        theta_fixed=args.theta,
        lambda_grid=args.lambda_grid,
        selection_method=args.selection.replace("-", "_"),
        bins=args.bins,
        body_tail_risk=args.body_tail_risk,
        threads=args.threads,
    )


# --------------------------------------------------------------------------
# report emission
# --------------------------------------------------------------------------

def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _weights_rows(result: WeightHistogramResult):
    for index, (x, w) in enumerate(zip(result.xs, result.weights)):
        yield [index, _fmt(x), _fmt(w)]


def _riskdist_rows(results: list[RiskDistributionResult]):
    for res in results:
        for rec in res.records():
            yield [rec.n, rec.rep, _fmt(rec.risk)]


def _riskdist_summary_rows(results: list[RiskDistributionResult]):
    for res in results:
        m = res.moments
        skew = res.oracle_skewness
        yield [
            res.n, m.count, _fmt(m.mean), _fmt(m.variance),
            _fmt(m.skewness_g1), _fmt(m.skewness_G1),
            _fmt(res.oracle_mean), _fmt(res.oracle_variance),
            _fmt(skew.value) if skew.converged else "NA",
        ]


def _modelsel_rows(results: list[ModelSelectionResult]):
    for res in results:
        for rec in res.records():
            yield [rec.n, rec.rep, _fmt(rec.risk), _fmt(rec.lambda_hat), rec.part]


def _modelsel_summary_rows(results: list[ModelSelectionResult]):
    for res in results:
        body, tail = res.body_summary, res.tail_summary
        yield [
            res.n, body.count, tail.count, res.degenerate_count,
            _fmt(res.split.body_fraction),
            _fmt(body.mean_lambda), _fmt(tail.mean_lambda),
            _fmt(body.median_lambda), _fmt(tail.median_lambda),
        ]


def _save_histogram_svg(path: Path, hist: HistogramData, title: str, xlabel: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.stairs(hist.counts, hist.edges, fill=True)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _save_box_svg(path: Path, res: ModelSelectionResult) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    body = res.lambda_hats[res.split.body_indices]
    tail = res.lambda_hats[res.split.tail_indices]
    fig, ax = plt.subplots(figsize=(4, 3.5))
    ax.boxplot([body, tail], positions=[1, 2], showmeans=True)
    ax.set_xticks([1, 2], labels=["body", "tail"])
    ax.axhline(THETA_BASE, linestyle=":", color="black")
    ax.set_ylabel("selected lambda")
    ax.set_title(f"n = {res.n}")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def write_outputs(
    out_dir: Path,
    config: ExperimentConfig,
    weight_result: Optional[WeightHistogramResult] = None,
    riskdist_results: Optional[list[RiskDistributionResult]] = None,
    modelsel_results: Optional[list[ModelSelectionResult]] = None,
    svg: bool = False,
) -> dict[str, list[str]]:
    """Write CSV reports (plus optional SVGs) and run_meta.json; return the manifest."""
    manifest: dict[str, list[str]] = {}

    def emit(experiment: str, name: str, writer, *args) -> None:
        path = out_dir / name
        writer(path, *args)
        manifest.setdefault(experiment, []).append(name)

    if weight_result is not None:
        emit("weight_histogram", "weights.csv", _write_csv,
             ["index", "x", "weight"], _weights_rows(weight_result))
        if svg:
            emit("weight_histogram", "weights_hist.svg",
                 _save_histogram_svg, weight_result.histogram,
                 "importance weights", "weight")
    if riskdist_results is not None:
        emit("risk_distribution", "riskdist.csv", _write_csv,
             ["n", "rep", "risk"], _riskdist_rows(riskdist_results))
        emit("risk_distribution", "riskdist_summary.csv", _write_csv,
             ["n", "count", "mean", "variance", "skew_g1", "skew_G1",
              "oracle_mean", "oracle_variance", "oracle_skewness_or_NA"],
             _riskdist_summary_rows(riskdist_results))
        if svg:
            for res in riskdist_results:
                emit("risk_distribution", f"riskdist_hist_n{res.n}.svg",
                     _save_histogram_svg, res.histogram,
                     f"weighted risk estimates, n = {res.n}", "risk estimate")
    if modelsel_results is not None:
        emit("model_selection", "modelsel.csv", _write_csv,
             ["n", "rep", "risk_min", "lambda_hat", "part"],
             _modelsel_rows(modelsel_results))
        emit("model_selection", "modelsel_summary.csv", _write_csv,
             ["n", "body_count", "tail_count", "degenerate_count", "body_fraction",
              "body_mean_lambda", "tail_mean_lambda",
              "body_median_lambda", "tail_median_lambda"],
             _modelsel_summary_rows(modelsel_results))
        if svg:
            for res in modelsel_results:
                emit("model_selection", f"modelsel_box_n{res.n}.svg",
                     _save_box_svg, res)

    meta = RunMetadata.for_run(config, manifest)
    with (out_dir / "run_meta.json").open("w", encoding="utf-8") as fh:
        json.dump(asdict(meta), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _print_oracle(config: ExperimentConfig) -> None:
    problem = config.problem()
    clf = config.fixed_classifier()
    theta = clf.theta
    target_risk = expected_moment(1, clf, problem)
    print(f"theta = {theta:.7f}")
    print(f"target risk R_T = {target_risk.value:.7f}")
    if config.sigma_target == 1.0:
        print(f"closed form    = {analytic_target_risk(theta):.7f}")
    m2 = expected_moment(2, clf, problem)
    if m2.converged:
        print(f"second weighted moment E[loss^2 w] = {m2.value:.7f}")
    else:
        print("second weighted moment E[loss^2 w] = divergent")
    for n in config.sample_sizes:
        var = estimator_variance(clf, n, True, problem)
        skew = estimator_skewness(clf, n, True, problem)
        var_text = f"{var.value:.7f}" if var.converged else "divergent"
        skew_text = f"{skew.value:.7f}" if skew.converged else "divergent"
        print(f"n={n}: variance={var_text} skewness={skew_text}")


def _prepare_out_dir(path: Path) -> Optional[str]:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        return f"--out: cannot create directory {path}: {exc}"
    if not os.access(path, os.W_OK):
        return f"--out: directory {path} is not writable"
    return None


def run_cli(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0

    try:
        config = _config_from_args(args)
    except ValueError as exc:
        print(f"iwrisk: error: {exc}", file=sys.stderr)
        return 2

    if args.command == "oracle":
        try:
            _print_oracle(config)
        except Exception as exc:  # noqa: BLE001 - one-line diagnostic contract
            print(f"iwrisk: error: {exc}", file=sys.stderr)
            return 1
        return 0

    problem_with_dir = _prepare_out_dir(args.out)
    if problem_with_dir is not None:
        print(f"iwrisk: error: {problem_with_dir}", file=sys.stderr)
        return 2

    try:
        weight_result = None
        riskdist_results = None
        modelsel_results = None
        if args.command in ("weights", "all"):
            weight_result = run_weight_histogram(config)
        if args.command in ("risk-dist", "all"):
            riskdist_results = run_risk_distribution(config)
        if args.command in ("model-select", "all"):
            modelsel_results = run_model_selection(config)
        manifest = write_outputs(
            args.out, config,
            weight_result=weight_result,
            riskdist_results=riskdist_results,
            modelsel_results=modelsel_results,
            svg=args.svg,
        )
    except OSError as exc:
        target = getattr(exc, "filename", None) or args.out
        print(f"iwrisk: error: I/O failure on {target}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - one-line diagnostic contract
        print(f"iwrisk: error: {exc}", file=sys.stderr)
        return 1

    for experiment, files in manifest.items():
        print(f"{experiment}: wrote {', '.join(files)} to {args.out}")
    print(f"metadata: {args.out / 'run_meta.json'}")
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
