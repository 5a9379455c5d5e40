import argparse
import asyncio
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from pydantic import ValidationError
from rich.logging import RichHandler

from eiolib.config import (
    EstimateConfig,
    RateStudyConfig,
    SimulateConfig,
    VerifyConfig,
    describe_validation_error,
    load_config,
)
from eiolib.errors import EXIT_INPUT_VALIDATION, EXIT_RUNTIME_FAILURE, EioError, SingularBlockError
from eiolib.estimator import maximize, plugin_lse
from eiolib.harness import (
    STUDY_CLASSES,
    ExperimentSpec,
    RateSpec,
    RateStudy,
    run_study,
)
from eiolib.instancefiles import read_instance, write_instance, write_json
from eiolib.parameter import LocalRegion
from eiolib.penalty import RidgePenalty
from eiolib.plotting import plot_rate_study
from load_eio_env import load_eio_env

logger = logging.getLogger("eio")

FIT_FILE = "fit.json"
VERIFY_FILE = "verify.json"
RATE_FILE = "rate.json"
RATE_PLOT_FILE = "rate.svg"


async def cmd_simulate(config: SimulateConfig) -> list[Path]:
    generator = config.generator.build()
    instance = generator.generate(config.seed)
    return write_instance(config.out, instance, config.model_dump(mode="json"))


async def cmd_estimate(config: EstimateConfig) -> Path:
    instance = read_instance(config.instance, config.mu2)
    obs, truth = instance.observation, instance.truth
    pen = config.penalty.build()
    region = LocalRegion.from_truth(truth, obs.mu2) if truth is not None and obs.mu2 > 0.0 else None
    fit = maximize(obs, pen, config.solver.build(), truth=truth, region=region)
    try:
        plugin = plugin_lse(obs.z_obs, obs.a_hat).tolist()
    except SingularBlockError as e:
        logger.info("No plug-in estimate: %s", e)
        plugin = None
    report = {"theta": fit.theta.tolist(), "fit": fit.to_dict(), "plugin_theta": plugin, "penalty": pen.describe()}
    if truth is not None:
        error = fit.theta - truth.theta_star
        report["error_norm"] = float(error @ error) ** 0.5
    report["config"] = config.model_dump(mode="json")
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / FIT_FILE, report)
    logger.info("Wrote %s (converged: %s)", out / FIT_FILE, fit.converged)
    return out / FIT_FILE


async def cmd_verify(config: VerifyConfig) -> Path:
    echoed = config.model_dump(mode="json")
    spec = ExperimentSpec(
        generator=config.generator.build(),
        pen=config.penalty.build(),
        opts=config.solver.build(),
        replicates=config.replicates,
        x=config.x,
        seed=config.seed,
        jobs=config.jobs,
        c4=config.c4,
        at=config.at,
        benchmark=RidgePenalty(config.ridge_g2) if config.ridge_g2 is not None else None,
        dimension_mu2=tuple(config.dimension_mu2),
        critical_threshold=config.critical_threshold,
        min_slack=config.min_slack,
        config=echoed,
    )
    out = Path(config.out)
    studies = {}
    for name in dict.fromkeys(config.studies):
        report = await run_study(STUDY_CLASSES[name](spec))
        report.write(out)
        studies[name] = report.to_dict()
    write_json(out / VERIFY_FILE, {"x": config.x, "studies": studies, "config": echoed})
    logger.info("Wrote %s", out / VERIFY_FILE)
    return out / VERIFY_FILE


async def cmd_rate_study(config: RateStudyConfig) -> Path:
    spec = RateSpec(
        p=config.p,
        q=config.q,
        n1_grid=tuple(config.n1_grid),
        s=config.profile.s,
        beta=config.profile.beta,
        c_w=config.profile.c_w,
        mu2_scale=config.mu2_scale,
        noise=config.noise.build(),
        opts=config.solver.build(),
        rho=config.rho,
        replicates=config.replicates,
        seed=config.seed,
        jobs=config.jobs,
        config=config.model_dump(mode="json"),
    )
    report = await run_study(RateStudy(spec))
    out = Path(config.out)
    report.write(out)
    write_json(out / RATE_FILE, report.to_dict())
    if config.plot:
        summary = report.summary
        plot_rate_study(summary["table"], summary["fit"], summary["predicted_slope"], out / RATE_PLOT_FILE)
    return out / RATE_FILE


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "verify": cmd_verify,
    "rate-study": cmd_rate_study,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Estimate a signal observed through a noisy operator and check the finite-sample bounds.",
        epilog="Example: eio.py verify --config verify.json --replicates 200 --jobs 4",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Verbose output")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_command(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", help="JSON run configuration; flags override its values")
        sub.add_argument("--out", help="Output directory")
        sub.add_argument("--verbose", "-v", action="store_true", default=argparse.SUPPRESS, help="Verbose output")
        return sub

    simulate = add_command("simulate", "Generate a synthetic instance")
    simulate.add_argument("--seed", type=int, help="Replicate seed of the instance")

    estimate = add_command("estimate", "Fit the penalized estimator to an instance directory")
    estimate.add_argument("--instance", help="Directory holding Z.csv, A_hat.csv and meta.json")

    for name, help_text in (("verify", "Monte-Carlo check of the expansion bounds"), ("rate-study", "Rate study")):
        sub = add_command(name, help_text)
        sub.add_argument("--seed", type=int, help="Root seed of the replicates")
        sub.add_argument("--jobs", type=int, help="Worker processes")
        sub.add_argument("--replicates", type=int, help="Replicates per setting")
        if name == "verify":
            sub.add_argument("--x", type=float, help="Confidence parameter x of the bounds")
    return parser


def configure_logging(verbose: bool):
    if verbose:
        logger.setLevel(logging.DEBUG)
        return
    level = os.getenv("EIO_LOG", "WARNING").upper()
    try:
        logger.setLevel(level)
    except ValueError:
        logger.setLevel(logging.WARNING)
        logger.warning("Unknown EIO_LOG level %r, using WARNING", level)


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="%(message)s", datefmt="[%X]", handlers=[RichHandler(rich_tracebacks=True)])
    overrides = {key: value for key, value in vars(args).items() if key not in ("command", "config", "verbose")}
    try:
        load_eio_env()
        configure_logging(args.verbose)
        config = load_config(args.command, args.config, overrides)
        logger.debug("Effective %s configuration: %s", args.command, config.model_dump(mode="json"))
        loop = asyncio.new_event_loop()
        asyncio.set_event_loop(loop)
        try:
            loop.run_until_complete(COMMANDS[args.command](config))
        finally:
            loop.close()
    except EioError as e:
        logger.error("%s", e)
        return e.exit_code
    except ValidationError as e:
        logger.error("Invalid configuration: %s", describe_validation_error(e))
        return EXIT_INPUT_VALIDATION
    except Exception:
        logger.exception("Run failed")
        return EXIT_RUNTIME_FAILURE
    return 0


if __name__ == "__main__":
    sys.exit(main())
