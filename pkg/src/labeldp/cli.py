"""Command line interface.

    labeldp optimal-interval --prior prior.json --zeta 0.1 --epsilon 1
    labeldp estimate-prior --input data.csv --label-col y --label-bounds 0 1 --epsilon 0.5 --output prior.json
    labeldp privatize --input data.csv --output private.csv --label-col y --label-bounds 0 1 --epsilon 1 --preset crime
    labeldp audit --spec spec.json --output audit.json --empirical
    labeldp bench --synthetic 20000 50 --epsilon 0.1 --epsilon 0.5 --zeta 1 --output bench.csv
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import typing as t
from dataclasses import dataclass
from pathlib import Path

from .__about__ import __version__
from .audit import analytic_audit, empirical_audit
from .bench import BenchSettings, run_bench, write_bench_table
from .baselines import NoiseKind, make_noise_spec
from .datasets import feature_matrix, read_labeled_csv, synthetic_task, write_labeled_csv
from .density import StepDensity
from .errors import (
    ConfigError,
    DataError,
    DegenerateSpread,
    LabelDPError,
    LengthMismatch,
)
from .func import as_result
from .mechanism import PolicyKind, RandomizerSpec
from .optimizer import optimal_interval
from .pipeline import privatize_dataset, split_budget
from .presets import PRESETS, resolve_preset
from .prior import estimate_prior
from .results import NOTHING, Err, Option, Some, option
from .streams import RandomStream

logger = logging.getLogger(__name__)

SEED_VARIABLE = "LABELDP_SEED"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_AUDIT = 4

COMMANDS = ("optimal-interval", "estimate-prior", "privatize", "audit", "bench")


@dataclass(frozen=True)
class RunConfig:
    """Validated options of one command line invocation."""

    command: str
    seed: int = 0
    epsilon_total: Option[float] = NOTHING
    epsilons: tuple[float, ...] = ()
    eps1: Option[float] = NOTHING
    zeta: Option[float] = NOTHING
    sigma: Option[float] = NOTHING
    policy: PolicyKind = PolicyKind.PROJECTION
    input: Option[Path] = NOTHING
    output: Option[Path] = NOTHING
    report: Option[Path] = NOTHING
    prior: Option[Path] = NOTHING
    spec: Option[Path] = NOTHING
    label_col: Option[str] = NOTHING
    label_bounds: Option[tuple[float, float]] = NOTHING
    keep_original: bool = False
    preset: Option[str] = NOTHING
    restrict_prior: bool = True
    trials: int = 10
    synthetic: Option[tuple[int, int]] = NOTHING
    empirical: bool = False
    n_samples: int = 1_000_000
    bins: int = 20
    pairs: tuple[tuple[float, float], ...] = ()
    workers: int | None = None
    log_level: str = "WARNING"

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for epsilon in self.epsilon_total:
            if self.command == "optimal-interval":
                if not epsilon >= 0:
                    raise ConfigError(f"epsilon must be non-negative, got {epsilon}")
            elif not epsilon > 0:
                raise ConfigError(f"epsilon must be positive, got {epsilon}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"need at least one worker, got {self.workers}")
        for zeta in self.zeta:
            if not (zeta > 0 and math.isfinite(zeta)):
                raise ConfigError(f"zeta must be positive, got {zeta}")
        for name in self.preset:
            if name not in PRESETS:
                raise ConfigError(
                    f"unknown preset {name!r}, choose one of {', '.join(sorted(PRESETS))}"
                )
        for lo, hi in self.label_bounds:
            if not lo < hi:
                raise ConfigError(f"label bounds are reversed: {lo} {hi}")
        required = {
            "optimal-interval": ("prior", "zeta", "epsilon_total"),
            "estimate-prior": ("input", "output", "label_col", "label_bounds", "epsilon_total"),
            "privatize": ("input", "output", "label_col", "label_bounds", "epsilon_total"),
            "audit": ("spec",),
            "bench": (),
        }[self.command]
        for name in required:
            if not getattr(self, name):
                flag = "--epsilon" if name == "epsilon_total" else "--" + name.replace("_", "-")
                raise ConfigError(f"{self.command} requires {flag}")
        if self.command == "privatize" and math.isinf(self.epsilon_total.unwrap()):
            raise ConfigError("privatize needs a finite --epsilon")
        if self.command in ("privatize", "bench") and not (self.zeta or self.preset):
            raise ConfigError(f"{self.command} requires --zeta or --preset")
        if self.command == "bench":
            if not self.epsilons:
                raise ConfigError("bench requires at least one --epsilon")
            if bool(self.input) == bool(self.synthetic):
                raise ConfigError("bench requires exactly one of --input and --synthetic")
            if self.input and not (self.label_col and self.label_bounds):
                raise ConfigError("bench --input requires --label-col and --label-bounds")

    def resolve_zeta(self, epsilon: float) -> float:
        for zeta in self.zeta:
            return zeta
        return resolve_preset(self.preset.unwrap(), epsilon).zeta

    def resolve_eps1(self, epsilon: float) -> Option[float]:
        if self.eps1 or not self.preset:
            return self.eps1
        return Some(resolve_preset(self.preset.unwrap(), epsilon).epsilon1())


def resolve_seed(seed: int | None, environ: t.Mapping[str, str] = os.environ) -> int:
    """`--seed`, then the `LABELDP_SEED` environment variable, then 0."""
    if seed is not None:
        return seed
    value = environ.get(SEED_VARIABLE)
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{SEED_VARIABLE}={value!r} is not an integer") from None


def _pair(text: str) -> tuple[float, float]:
    try:
        first, second = text.split(",")
        return float(first), float(second)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected Y,Y_PRIME, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labeldp", description="Label differential privacy for regression labels."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"defaults to ${SEED_VARIABLE}, then 0")
    common.add_argument(
        "--log-level",
        default="WARNING",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    interval = commands.add_parser(
        "optimal-interval", parents=[common], help="optimal interval of a prior"
    )
    interval.add_argument("--prior", type=Path, required=True)
    interval.add_argument("--zeta", type=float, required=True)
    interval.add_argument("--epsilon", type=float, required=True)
    interval.add_argument("--output", type=Path, help="defaults to standard output")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", type=Path)
    data.add_argument("--label-col")
    data.add_argument("--label-bounds", type=float, nargs=2, metavar=("LO", "HI"))
    data.add_argument("--sigma", type=float, help="histogram bin width")

    prior = commands.add_parser(
        "estimate-prior", parents=[common, data], help="histogram prior of noisy labels"
    )
    prior.add_argument("--epsilon", type=float, required=True)
    prior.add_argument("--output", type=Path, required=True)
    prior.add_argument("--plan", type=Path, help="defaults to OUTPUT with a .plan.json suffix")

    mechanism = argparse.ArgumentParser(add_help=False)
    mechanism.add_argument("--eps1", type=float, help="budget spent on the prior")
    mechanism.add_argument("--zeta", type=float)
    mechanism.add_argument("--preset", choices=sorted(PRESETS))
    mechanism.add_argument(
        "--policy", choices=[p.value for p in PolicyKind], default=PolicyKind.PROJECTION.value
    )

    privatize = commands.add_parser(
        "privatize", parents=[common, data, mechanism], help="privatize the labels of a CSV file"
    )
    privatize.add_argument("--epsilon", type=float, required=True)
    privatize.add_argument("--output", type=Path, required=True)
    privatize.add_argument("--report", type=Path, help="defaults to OUTPUT with a .report.json suffix")
    privatize.add_argument("--workers", type=int, help="threads randomizing label blocks")
    privatize.add_argument(
        "--keep-original",
        action="store_true",
        help="also write the raw labels, which defeats privacy (testing only)",
    )
    privatize.add_argument(
        "--no-restrict-prior",
        dest="restrict_prior",
        action="store_false",
        help="do not restrict the estimated prior to the label bounds",
    )

    audit = commands.add_parser("audit", parents=[common], help="audit a randomizer spec")
    audit.add_argument("--spec", type=Path, required=True)
    audit.add_argument("--output", type=Path)
    audit.add_argument("--empirical", action="store_true", help="also sample the mechanism")
    audit.add_argument("--n-samples", type=int, default=1_000_000)
    audit.add_argument("--bins", type=int, default=20)
    audit.add_argument("--pair", dest="pairs", type=_pair, action="append", default=[])
    audit.add_argument("--workers", type=int)

    bench = commands.add_parser(
        "bench", parents=[common, data, mechanism], help="compare mechanisms on a regression task"
    )
    bench.add_argument(
        "--epsilon", dest="epsilons", type=float, action="append", default=[],
        help="repeat for a sweep, 'inf' for no noise",
    )
    bench.add_argument("--synthetic", type=int, nargs=2, metavar=("N", "D"))
    bench.add_argument("--trials", type=int, default=10)
    bench.add_argument("--output", type=Path)
    bench.add_argument("--workers", type=int)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = vars(args)
    epsilon = values.get("epsilon")
    bounds = values.get("label_bounds")
    synthetic = values.get("synthetic")
    return RunConfig(
        command=args.command,
        seed=resolve_seed(values.get("seed")),
        epsilon_total=option(epsilon),
        epsilons=tuple(values.get("epsilons") or ()),
        eps1=option(values.get("eps1")),
        zeta=option(values.get("zeta")),
        sigma=option(values.get("sigma")),
        policy=PolicyKind(values.get("policy") or PolicyKind.PROJECTION.value),
        input=option(values.get("input")),
        output=option(values.get("output")),
        report=option(values.get("report") or values.get("plan")),
        prior=option(values.get("prior")),
        spec=option(values.get("spec")),
        label_col=option(values.get("label_col")),
        label_bounds=Some((bounds[0], bounds[1])) if bounds else NOTHING,
        keep_original=bool(values.get("keep_original")),
        preset=option(values.get("preset")),
        restrict_prior=values.get("restrict_prior", True),
        trials=values.get("trials", 10),
        synthetic=Some((synthetic[0], synthetic[1])) if synthetic else NOTHING,
        empirical=bool(values.get("empirical")),
        n_samples=values.get("n_samples", 1_000_000),
        bins=values.get("bins", 20),
        pairs=tuple(values.get("pairs") or ()),
        workers=values.get("workers"),
        log_level=values.get("log_level", "WARNING"),
    )


def _sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(path.name + suffix)


def _write_json(data: t.Any, output: Option[Path]) -> None:
    text = json.dumps(data, indent=2)
    for path in output:
        path.write_text(text + "\n", encoding="utf-8")
        return
    sys.stdout.write(text + "\n")


def _optimal_interval(config: RunConfig) -> int:
    prior = StepDensity.from_json(config.prior.unwrap().read_text(encoding="utf-8"))
    result = optimal_interval(prior, config.zeta.unwrap(), config.epsilon_total.unwrap())
    _write_json(
        {
            "a1": result.interval.a1,
            "a2": result.interval.a2,
            "objective": result.objective,
            "evaluations": result.evaluations,
            "zeta": config.zeta.unwrap(),
            "epsilon": config.epsilon_total.unwrap(),
        },
        config.output,
    )
    return EXIT_OK


def _estimate_prior(config: RunConfig) -> int:
    dataset, _ = read_labeled_csv(
        config.input.unwrap(), config.label_col.unwrap(), config.label_bounds
    )
    epsilon = config.epsilon_total.unwrap()
    noise = make_noise_spec(NoiseKind.LAPLACE, epsilon, clip_bounds=config.label_bounds.unwrap())
    density, plan = estimate_prior(
        dataset.labels, epsilon, noise, config.sigma, stream=RandomStream(config.seed)
    )
    output = config.output.unwrap()
    output.write_text(density.to_json() + "\n", encoding="utf-8")
    plan_path = config.report.unwrap_or(_sidecar(output, ".plan.json"))
    plan_data = dict(plan.to_dict(), seed=config.seed, epsilon=epsilon)
    plan_path.write_text(json.dumps(plan_data, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def _privatize(config: RunConfig) -> int:
    dataset, layout = read_labeled_csv(
        config.input.unwrap(), config.label_col.unwrap(), config.label_bounds
    )
    epsilon = config.epsilon_total.unwrap()
    split = split_budget(epsilon, config.resolve_eps1(epsilon))
    released, report = privatize_dataset(
        dataset,
        split,
        config.resolve_zeta(epsilon),
        config.policy,
        config.sigma,
        stream=RandomStream(config.seed),
        restrict_prior=config.restrict_prior,
        workers=config.workers,
    )
    output = config.output.unwrap()
    if config.keep_original:
        logger.warning("writing original labels next to privatized ones, the output is not private")
    write_labeled_csv(
        output, released, layout, original=dataset if config.keep_original else None
    )
    report_path = config.report.unwrap_or(_sidecar(output, ".report.json"))
    report_data = dict(report.to_dict(), preset=config.preset.unwrap_or(None))
    report_path.write_text(json.dumps(report_data, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def _audit(config: RunConfig) -> int:
    spec = RandomizerSpec.from_json(config.spec.unwrap().read_text(encoding="utf-8"))
    if config.empirical:
        report = empirical_audit(
            spec,
            config.pairs,
            config.n_samples,
            config.bins,
            stream=RandomStream(config.seed),
            workers=config.workers,
        )
    else:
        report = analytic_audit(spec)
    _write_json(dict(report.to_dict(), seed=config.seed), config.output)
    sys.stderr.write(report.render() + "\n")
    return EXIT_OK if report.passed else EXIT_AUDIT


def _bench(config: RunConfig) -> int:
    stream = RandomStream(config.seed)
    if config.synthetic:
        n, d = config.synthetic.unwrap()
        features, dataset = synthetic_task(n, d, stream.spawn(0))
        bounds = config.label_bounds.unwrap_or(dataset.label_bounds.unwrap())
    else:
        dataset, _ = read_labeled_csv(
            config.input.unwrap(), config.label_col.unwrap(), config.label_bounds
        )
        features = feature_matrix(dataset)
        bounds = config.label_bounds.unwrap()
    settings = BenchSettings(
        epsilons=config.epsilons,
        label_bounds=bounds,
        zeta=config.resolve_zeta,
        eps1=config.resolve_eps1,
        trials=config.trials,
        policy=config.policy,
        sigma=config.sigma,
    )
    rows = run_bench(features, dataset.labels, settings, seed=config.seed, workers=config.workers)
    if config.output:
        with open(config.output.unwrap(), "w", newline="", encoding="utf-8") as table:
            write_bench_table(rows, table)
    else:
        write_bench_table(rows, sys.stdout)
    return EXIT_OK


HANDLERS: dict[str, t.Callable[[RunConfig], int]] = {
    "optimal-interval": _optimal_interval,
    "estimate-prior": _estimate_prior,
    "privatize": _privatize,
    "audit": _audit,
    "bench": _bench,
}


def exit_status(error: Exception) -> int:
    """Exit status of a command that failed with `error`.

    Data errors raised while reading input are I/O errors, those raised while
    processing valid input are validation errors.
    """
    if isinstance(error, (DegenerateSpread, LengthMismatch)):
        return EXIT_CONFIG
    if isinstance(error, (OSError, csv.Error, json.JSONDecodeError, UnicodeDecodeError, DataError)):
        return EXIT_IO
    return EXIT_CONFIG


def run(config: RunConfig) -> int:
    """Run one command and return its exit status."""
    handler = as_result(
        HANDLERS[config.command],
        catch=(LabelDPError, OSError, csv.Error, ValueError),
    )
    result = handler(config)
    if isinstance(result, Err):
        error = result.unwrap_err()
        sys.stderr.write(f"labeldp: error: {error}\n")
        return exit_status(error)
    return result.unwrap()


def main(argv: t.Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        sys.stderr.write(f"labeldp: error: {exc}\n")
        return EXIT_CONFIG
    return run(config)
