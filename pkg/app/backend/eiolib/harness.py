"""
Monte-Carlo studies of the expansion bounds.

Each study follows the same two-step protocol: `setup()` computes everything shared by the
replicates (the population fit, the theorem constants) and `run()` dispatches the replicates,
inline or on a process pool, and reduces them in replicate order.
"""

import asyncio
import dataclasses
import logging
import math
import time
from abc import ABC
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Union

import numpy as np
import pandas as pd
from scipy import stats
from tqdm import tqdm

from .datagen import DirectModelGenerator, DirectModelSpec, Instance
from .errors import InputValidationError
from .estimator import FitResult, SolveOptions, benchmark_ridge, maximize
from .instancefiles import write_json
from .model import score
from .parameter import NoiseModel
from .penalty import PenaltyConfig, SignalPenalty, reduce_truncation
from .rates import (
    DEFAULT_CRITICAL_THRESHOLD,
    DEFAULT_RHO,
    SpectralProfile,
    critical_dimension_check,
    rate_prediction,
)
from .theory import (
    DEFAULT_C4,
    DEFAULT_X,
    MIN_APPLICABILITY_SLACK,
    PASS_ATOL,
    TheoremSetup,
    expansion_bounds,
    prepare_theorem,
)

logger = logging.getLogger("eio")

STUDIES = ("fisher", "wilks", "risk", "dimension", "rate")
ORACLE_RATIO_LIMIT = 2.0
RATE_SLOPE_TOL = 0.1
CONFIDENCE_LEVEL = 0.95
SUMMARY_QUANTILES = (0.05, 0.5, 0.95)


def coverage_target(x: float) -> float:
    """1 − 3e^{−x}, the probability of the set on which the expansion holds."""
    return max(0.0, 1.0 - 3.0 * math.exp(-x))


def replicate_seeds(seed: Union[int, np.random.SeedSequence], replicates: int) -> list[int]:
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in root.spawn(replicates)]


@dataclass(frozen=True)
class ExperimentSpec:
    """
    Attributes:
        generator (DirectModelGenerator): Source of the truth and of one instance per replicate
        pen (PenaltyConfig): Penalty of the fitted estimator
        opts (SolveOptions): Solver options for every fit
        replicates (int): Number of replicates
        x (float): Confidence parameter of the bounds
        seed (int): Root seed; replicate r uses the r-th spawned child
        jobs (int): Worker processes, 1 runs inline
        c4 (float): Fourth-moment constant of the squared-risk interval
        at (str): Point where the information matrix is evaluated
        q_map (np.ndarray): Weighting map Q, identity when omitted
        benchmark (SignalPenalty): Penalty of the known-operator benchmark, the fitted one when omitted
        dimension_mu2 (list[float]): μ² family of the dimension study
        critical_threshold (float): Ratio below which the dimension check reports consistency
        min_slack (float): Smallest radius and curvature slack accepted before a theorem study runs; 0 disables the check
        config (dict): Effective configuration echoed into the report
    """

    generator: DirectModelGenerator
    pen: PenaltyConfig = field(default_factory=PenaltyConfig.none)
    opts: SolveOptions = field(default_factory=SolveOptions)
    replicates: int = 100
    x: float = DEFAULT_X
    seed: int = 0
    jobs: int = 1
    c4: float = DEFAULT_C4
    at: str = "population"
    q_map: Optional[np.ndarray] = None
    benchmark: Optional[SignalPenalty] = None
    dimension_mu2: tuple = (1e2, 1e3, 1e4, 1e5)
    critical_threshold: float = DEFAULT_CRITICAL_THRESHOLD
    min_slack: float = MIN_APPLICABILITY_SLACK
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.replicates < 1:
            raise InputValidationError(f"replicate count must be at least 1, got {self.replicates}")
        if self.jobs < 1:
            raise InputValidationError(f"jobs must be at least 1, got {self.jobs}")
        if self.x <= 0.0:
            raise InputValidationError(f"x must be positive, got {self.x}")
        if self.min_slack < 0.0:
            raise InputValidationError(f"min_slack must be non-negative, got {self.min_slack}")


@dataclass(frozen=True)
class RateSpec:
    p: int
    n1_grid: tuple
    q: Optional[int] = None
    s: float = 1.0
    beta: float = 1.0
    c_w: float = 1.0
    mu2_scale: float = 1.0
    noise: NoiseModel = field(default_factory=NoiseModel)
    opts: SolveOptions = field(default_factory=SolveOptions)
    rho: float = DEFAULT_RHO
    replicates: int = 100
    seed: int = 0
    jobs: int = 1
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.replicates < 1:
            raise InputValidationError(f"replicate count must be at least 1, got {self.replicates}")
        if self.jobs < 1:
            raise InputValidationError(f"jobs must be at least 1, got {self.jobs}")
        if not self.n1_grid:
            raise InputValidationError("the N1 grid is empty")
        if self.q is not None and self.q < self.p:
            raise InputValidationError(f"rate study needs q >= p, got p={self.p}, q={self.q}")


@dataclass
class ExperimentReport:
    """
    Attributes:
        study (str): Study name
        records (pd.DataFrame): One row per replicate, in replicate order
        summary (dict): Aggregate statistics and bound values
        status (str): "pass", "fail", "inapplicable", "undefined", or "ok" for descriptive studies
        coverage (float): Fraction of converged replicates whose remainder stays under the bound
        target (float): The coverage the bound promises
        used (int): Converged replicates, the coverage denominator
        excluded (int): Non-converged replicates left out of every aggregate
        runtime (float): Wall-clock seconds, logged but not written to the report files
    """

    study: str
    records: pd.DataFrame
    summary: dict
    status: str
    coverage: Optional[float] = None
    target: Optional[float] = None
    used: int = 0
    excluded: int = 0
    x: Optional[float] = None
    runtime: float = 0.0
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.coverage is not None and not 0.0 <= self.coverage <= 1.0:
            raise ValueError(f"coverage {self.coverage} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "study": self.study,
            "status": self.status,
            "x": self.x,
            "coverage": self.coverage,
            "target": self.target,
            "replicates": len(self.records),
            "used": self.used,
            "excluded": self.excluded,
            "summary": self.summary,
            "config": self.config,
        }

    def write(self, out_dir: Union[str, Path]) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        records_path = out / f"{self.study}_replicates.csv"
        self.records.to_csv(records_path, index=False, lineterminator="\n")
        report_path = out / f"{self.study}.json"
        write_json(report_path, self.to_dict())
        return [report_path, records_path]


@dataclass(frozen=True)
class ReplicateTask:
    """Everything a worker process needs for one replicate; pickled once per submission."""

    study: str
    generator: DirectModelGenerator
    pen: PenaltyConfig
    opts: SolveOptions
    theorem: Optional[TheoremSetup] = None
    benchmark: Optional[SignalPenalty] = None
    q_map: Optional[np.ndarray] = None
    j: Optional[int] = None
    m: Optional[int] = None


def _weighted_sq(task: ReplicateTask, error: np.ndarray) -> float:
    weighted = error if task.q_map is None else task.q_map @ error
    return float(weighted @ weighted)


def _fisher_measures(task: ReplicateTask, instance: Instance, fit: FitResult) -> dict:
    report = expansion_bounds(task.theorem, "fisher", score(instance.observation, instance.truth), fit.theta)
    lead_norm = float(np.linalg.norm(task.theorem.q_map @ report.leading_term))
    return {
        "remainder": report.observed_remainder,
        "bound": report.remainder_bound,
        "passed": report.passed,
        "lead_norm": lead_norm,
        "relative_remainder": report.observed_remainder / lead_norm if lead_norm > 0.0 else 0.0,
    }


def _wilks_measures(task: ReplicateTask, instance: Instance, fit: FitResult) -> dict:
    obs = instance.observation
    report = expansion_bounds(task.theorem, "wilks", score(obs, instance.truth), fit.theta, obs)
    return {
        "remainder": report.observed_remainder,
        "bound": report.remainder_bound,
        "passed": report.passed,
        "efficient_score_sq": float(report.leading_term @ report.leading_term),
    }


def _risk_measures(task: ReplicateTask, instance: Instance, fit: FitResult) -> dict:
    truth = instance.truth
    benchmark = benchmark_ridge(instance.observation.z_obs, truth.a_star, task.benchmark or task.pen.signal)
    return {
        "sq_error": _weighted_sq(task, fit.theta - truth.theta_star),
        "benchmark_sq_error": _weighted_sq(task, benchmark - truth.theta_star),
    }


def _error_measures(task: ReplicateTask, instance: Instance, fit: FitResult) -> dict:
    return {"sq_error": _weighted_sq(task, fit.theta - instance.truth.theta_star)}


MEASURES: dict[str, Callable[[ReplicateTask, Instance, FitResult], dict]] = {
    "fisher": _fisher_measures,
    "wilks": _wilks_measures,
    "risk": _risk_measures,
    "dimension": _error_measures,
    "rate": _error_measures,
}


def run_replicate(task: ReplicateTask, index: int, seed: int) -> dict:
    """One replicate: draw the instance, fit it and measure. Module level so that it pickles."""
    instance = task.generator.generate(seed)
    if task.study == "rate":
        reduction = reduce_truncation(instance.observation, task.j, task.m)
        reduced = maximize(reduction.observation, None, task.opts)
        fit = dataclasses.replace(reduced, param=reduction.embed(reduced.param))
    else:
        fit = maximize(instance.observation, task.pen, task.opts, truth=instance.truth, region=instance.region)
    record = {
        "replicate": index,
        "seed": seed,
        "converged": fit.converged,
        "iters": fit.iters,
        "grad_norm": fit.grad_norm,
    }
    if fit.region_diagnostic is not None:
        record["inside_region"] = fit.region_diagnostic.inside
    record.update(MEASURES[task.study](task, instance, fit))
    return record


async def run_replicates(task: ReplicateTask, seeds: list[int], jobs: int = 1, label: str = "") -> list[dict]:
    """Run every replicate and return the records in submission order."""
    disable = logger.getEffectiveLevel() > logging.INFO
    with tqdm(total=len(seeds), desc=label or task.study, disable=disable) as progress:
        if jobs == 1:
            records = []
            for index, seed in enumerate(seeds):
                records.append(run_replicate(task, index, seed))
                progress.update()
            return records
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = [
                loop.run_in_executor(executor, run_replicate, task, index, seed) for index, seed in enumerate(seeds)
            ]
            for future in futures:
                future.add_done_callback(lambda _: progress.update())
            return list(await asyncio.gather(*futures))


def _frame(records: list[dict]) -> pd.DataFrame:
    return pd.DataFrame.from_records(records).sort_values("replicate", kind="stable").reset_index(drop=True)


def describe_columns(frame: pd.DataFrame, columns: list[str]) -> dict[str, dict[str, Optional[float]]]:
    """Mean, standard deviation and quantiles of each column."""
    summary = {}
    for column in columns:
        values = frame[column].astype(float)
        if values.empty:
            summary[column] = {"mean": None, "std": None, **{f"q{int(q * 100):02d}": None for q in SUMMARY_QUANTILES}}
            continue
        summary[column] = {
            "mean": float(values.mean()),
            "std": float(values.std(ddof=1)) if len(values) > 1 else 0.0,
            **{f"q{int(q * 100):02d}": float(values.quantile(q)) for q in SUMMARY_QUANTILES},
        }
    return summary


def _split_converged(frame: pd.DataFrame) -> tuple[pd.DataFrame, int]:
    used = frame[frame["converged"].astype(bool)]
    excluded = len(frame) - len(used)
    if excluded:
        logger.warning("%d of %d replicates did not converge and are excluded", excluded, len(frame))
    return used, excluded


class Study(ABC):
    """
    Abstract Monte-Carlo study: `setup` prepares the shared state and `run` returns the report.
    """

    name = ""

    async def setup(self):
        raise NotImplementedError

    async def run(self) -> ExperimentReport:
        raise NotImplementedError


class TheoremStudy(Study):
    """Studies that check the expansion theorem on one generator."""

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self.theorem: Optional[TheoremSetup] = None

    async def setup(self):
        generator = self.spec.generator
        self.theorem = prepare_theorem(
            generator.truth(),
            generator.spec.mu2,
            self.spec.pen,
            generator.noise_model(),
            generator.region(),
            x=self.spec.x,
            q_map=self.spec.q_map,
            opts=self.spec.opts,
            at=self.spec.at,
        )
        check = self.theorem.check
        if check.slack < self.spec.min_slack:
            raise InputValidationError(
                f"{self.name} study: applicability slack {check.slack:.3g} is below {self.spec.min_slack:g} "
                f"(radius {check.radius_slack:.3g}, curvature {check.curvature_slack:.3g}); "
                "choose a larger mu2 or N, or set min_slack to 0 to report the study as inapplicable"
            )
        if not check.applicable:
            logger.warning("%s study: bounds are inapplicable (%s)", self.name, check.reason())

    def _task(self) -> ReplicateTask:
        return ReplicateTask(
            study=self.name,
            generator=self.spec.generator,
            pen=self.spec.pen,
            opts=self.spec.opts,
            theorem=self.theorem,
            benchmark=self.spec.benchmark,
            q_map=self.theorem.q_map,
        )

    async def run(self) -> ExperimentReport:
        if self.theorem is None:
            await self.setup()
        started = time.perf_counter()
        seeds = replicate_seeds(self.spec.seed, self.spec.replicates)
        frame = _frame(await run_replicates(self._task(), seeds, self.spec.jobs, self.name))
        report = self.summarize(frame)
        report = dataclasses.replace(report, runtime=time.perf_counter() - started)
        logger.info("%s study: %s in %.1fs", self.name, report.status, report.runtime)
        return report

    def summarize(self, frame: pd.DataFrame) -> ExperimentReport:
        raise NotImplementedError

    def _status(self, ok: Optional[bool]) -> str:
        if not self.theorem.check.applicable:
            return "inapplicable"
        if ok is None:
            return "undefined"
        return "pass" if ok else "fail"

    def _base_summary(self) -> dict:
        return {"theorem": self.theorem.to_dict()}


class CoverageStudy(TheoremStudy):
    """Fraction of replicates on which the observed remainder stays under its bound."""

    columns: list[str] = []

    def summarize(self, frame: pd.DataFrame) -> ExperimentReport:
        used, excluded = _split_converged(frame)
        target = coverage_target(self.spec.x)
        coverage = float(used["passed"].astype(bool).mean()) if len(used) else None
        summary = {**self._base_summary(), **describe_columns(used, self.columns)}
        return ExperimentReport(
            study=self.name,
            records=frame,
            summary=summary,
            status=self._status(None if coverage is None else coverage >= target),
            coverage=coverage,
            target=target,
            used=len(used),
            excluded=excluded,
            x=self.spec.x,
            config=self.spec.config,
        )


class FisherStudy(CoverageStudy):
    name = "fisher"
    columns = ["remainder", "bound", "lead_norm", "relative_remainder"]


class WilksStudy(CoverageStudy):
    name = "wilks"
    columns = ["remainder", "bound", "efficient_score_sq"]


class RiskStudy(TheoremStudy):
    """Monte-Carlo squared risk against the (1 ± α_Q)²ℛ_Q interval and against the known-operator benchmark."""

    name = "risk"

    def summarize(self, frame: pd.DataFrame) -> ExperimentReport:
        used, excluded = _split_converged(frame)
        summary = self._base_summary()
        ok: Optional[bool] = None
        if len(used):
            risk = float(used["sq_error"].mean())
            benchmark_risk = float(used["benchmark_sq_error"].mean())
            squared = expansion_bounds(self.theorem, "squared", observed=risk, c4=self.spec.c4)
            l2 = expansion_bounds(self.theorem, "l2", observed=math.sqrt(risk))
            lower, upper = squared.details["lower"], squared.details["upper"]
            within = lower - PASS_ATOL <= risk <= upper + PASS_ATOL
            ratio = risk / benchmark_risk if benchmark_risk > 0.0 else None
            oracle_ok = True if ratio is None else ratio <= ORACLE_RATIO_LIMIT
            ok = oracle_ok and (within or not squared.applicable)
            summary.update(
                {
                    "mc_risk": risk,
                    "benchmark_risk": benchmark_risk,
                    "risk_ratio": ratio,
                    "ratio_limit": ORACLE_RATIO_LIMIT,
                    "oracle_pass": oracle_ok,
                    "squared": squared.to_dict(),
                    "within_interval": within,
                    "l2": l2.to_dict(),
                    **describe_columns(used, ["sq_error", "benchmark_sq_error"]),
                }
            )
        return ExperimentReport(
            study=self.name,
            records=frame,
            summary=summary,
            status=self._status(ok),
            used=len(used),
            excluded=excluded,
            x=self.spec.x,
            config=self.spec.config,
        )


class DimensionStudy(Study):
    """Estimation error along a μ² family crossing the critical ratio pM/(μ²N)."""

    name = "dimension"

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self.family: list[DirectModelGenerator] = []

    async def setup(self):
        base = self.spec.generator.spec
        self.family = [DirectModelGenerator(dataclasses.replace(base, mu2=float(mu2))) for mu2 in self.spec.dimension_mu2]

    async def run(self) -> ExperimentReport:
        if not self.family:
            await self.setup()
        started = time.perf_counter()
        seeds = replicate_seeds(self.spec.seed, self.spec.replicates)
        frames, table, excluded_total = [], [], 0
        for generator in self.family:
            mu2 = generator.spec.mu2
            region = generator.region()
            rows = int(np.count_nonzero(self.spec.pen.row_mask(generator.spec.q)))
            check = critical_dimension_check(
                generator.spec.p, rows, mu2, region.n_eff, threshold=self.spec.critical_threshold
            )
            task = ReplicateTask(study=self.name, generator=generator, pen=self.spec.pen, opts=self.spec.opts)
            frame = _frame(await run_replicates(task, seeds, self.spec.jobs, f"{self.name} mu2={mu2:g}"))
            frame.insert(0, "mu2", mu2)
            used, excluded = _split_converged(frame)
            excluded_total += excluded
            table.append(
                {
                    "mu2": mu2,
                    **check.to_dict(),
                    "used": len(used),
                    "excluded": excluded,
                    "mean_sq_error": float(used["sq_error"].mean()) if len(used) else None,
                }
            )
            frames.append(frame)
        records = pd.concat(frames, ignore_index=True)
        report = ExperimentReport(
            study=self.name,
            records=records,
            summary={"table": table},
            status="ok",
            used=len(records) - excluded_total,
            excluded=excluded_total,
            x=self.spec.x,
            config=self.spec.config,
        )
        report = dataclasses.replace(report, runtime=time.perf_counter() - started)
        return report


@dataclass(frozen=True)
class SlopeFit:
    slope: Optional[float]
    intercept: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]
    points: int

    @property
    def defined(self) -> bool:
        return self.slope is not None

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "ci": None if self.ci_low is None else [self.ci_low, self.ci_high],
            "points": self.points,
            "defined": self.defined,
        }


def fit_log_slope(n1, risk, level: float = CONFIDENCE_LEVEL) -> SlopeFit:
    """
    Least-squares slope of log risk on log N₁. One point leaves the slope undefined, two points give a
    slope without a confidence interval.
    """
    n1 = np.asarray(n1, dtype=float)
    risk = np.asarray(risk, dtype=float)
    if n1.size < 2 or np.any(risk <= 0.0) or not np.all(np.isfinite(risk)) or np.unique(n1).size < 2:
        return SlopeFit(None, None, None, None, int(n1.size))
    x, y = np.log(n1), np.log(risk)
    if n1.size == 2:
        slope = float((y[1] - y[0]) / (x[1] - x[0]))
        return SlopeFit(slope, float(y[0] - slope * x[0]), None, None, 2)
    result = stats.linregress(x, y)
    half = float(stats.t.ppf(0.5 + level / 2.0, n1.size - 2) * result.stderr)
    return SlopeFit(float(result.slope), float(result.intercept), result.slope - half, result.slope + half, n1.size)


class RateStudy(Study):
    """Risk of the (J, M) truncation estimator along an N₁ grid, with (J, M) from the rate prediction."""

    name = "rate"

    def __init__(self, spec: RateSpec):
        self.spec = spec
        self.points: list[tuple[float, Any, DirectModelGenerator]] = []

    async def setup(self):
        spec = self.spec
        q = spec.q or spec.p
        self.points = []
        for n1 in spec.n1_grid:
            profile = SpectralProfile.parametric(spec.p, q, s=spec.s, beta=spec.beta, c_w=spec.c_w, n1=n1)
            prediction = rate_prediction(spec.s, spec.beta, spec.c_w, n1, p=spec.p, rho=spec.rho, profile=profile)
            generator = DirectModelGenerator(
                DirectModelSpec(p=spec.p, q=q, profile=profile, mu2=spec.mu2_scale * n1, noise=spec.noise)
            )
            self.points.append((float(n1), prediction, generator))

    async def run(self) -> ExperimentReport:
        if not self.points:
            await self.setup()
        started = time.perf_counter()
        spec = self.spec
        grid_roots = np.random.SeedSequence(spec.seed).spawn(len(self.points))
        frames, table, excluded_total = [], [], 0
        for (n1, prediction, generator), root in zip(self.points, grid_roots):
            j, m = prediction.j_opt, min(prediction.m_opt, generator.spec.q)
            task = ReplicateTask(study=self.name, generator=generator, pen=PenaltyConfig.none(), opts=spec.opts, j=j, m=m)
            seeds = replicate_seeds(root, spec.replicates)
            frame = _frame(await run_replicates(task, seeds, spec.jobs, f"{self.name} N1={n1:g}"))
            frame.insert(0, "n1", n1)
            used, excluded = _split_converged(frame)
            excluded_total += excluded
            table.append(
                {
                    "n1": n1,
                    "J": j,
                    "M": m,
                    "mu2": generator.spec.mu2,
                    "predicted_order": prediction.risk_order,
                    "mc_risk": float(used["sq_error"].mean()) if len(used) else None,
                    "used": len(used),
                    "excluded": excluded,
                }
            )
            frames.append(frame)

        usable = [row for row in table if row["mc_risk"] is not None]
        slope = fit_log_slope([row["n1"] for row in usable], [row["mc_risk"] for row in usable])
        predicted = self.points[0][1].risk_exponent
        if slope.defined:
            status = "pass" if abs(slope.slope - predicted) <= RATE_SLOPE_TOL else "fail"
        else:
            status = "undefined"
        report = ExperimentReport(
            study=self.name,
            records=pd.concat(frames, ignore_index=True),
            summary={
                "table": table,
                "fit": slope.to_dict(),
                "predicted_slope": predicted,
                "slope_tolerance": RATE_SLOPE_TOL,
            },
            status=status,
            used=sum(row["used"] for row in table),
            excluded=excluded_total,
            config=spec.config,
        )
        report = dataclasses.replace(report, runtime=time.perf_counter() - started)
        logger.info("rate study: slope %s (predicted %.3f) in %.1fs", slope.slope, predicted, report.runtime)
        return report


STUDY_CLASSES: dict[str, type] = {
    "fisher": FisherStudy,
    "wilks": WilksStudy,
    "risk": RiskStudy,
    "dimension": DimensionStudy,
}


async def run_study(study: Study) -> ExperimentReport:
    await study.setup()
    return await study.run()


def run_fisher_study(spec: ExperimentSpec) -> ExperimentReport:
    return asyncio.run(run_study(FisherStudy(spec)))


def run_wilks_study(spec: ExperimentSpec) -> ExperimentReport:
    return asyncio.run(run_study(WilksStudy(spec)))


def run_risk_study(spec: ExperimentSpec) -> ExperimentReport:
    return asyncio.run(run_study(RiskStudy(spec)))


def run_dimension_study(spec: ExperimentSpec) -> ExperimentReport:
    return asyncio.run(run_study(DimensionStudy(spec)))


def run_rate_study(spec: RateSpec) -> ExperimentReport:
    return asyncio.run(run_study(RateStudy(spec)))
