"""
Declarative run configuration, one pydantic model per subcommand. Unknown keys are rejected.
"""

from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .bases import DEFAULT_QUADRATURE_NODES, DesignDensity, make_basis
from .datagen import (
    DirectModelGenerator,
    DirectModelSpec,
    InstanceGenerator,
    InstrumentGenerator,
    InstrumentSpec,
    RandomDesignGenerator,
    RegressionSpec,
)
from .errors import InputValidationError
from .estimator import DEFAULT_MAX_ITERS, SolveOptions
from .instancefiles import read_json
from .parameter import DEFAULT_DELTA0, NoiseModel
from .penalty import (
    DiagonalPenalty,
    ElementwisePenalty,
    NoOperatorPenalty,
    NoSignalPenalty,
    OperatorPenalty,
    PenaltyConfig,
    RidgePenalty,
    RoughnessPenalty,
    RowScalarPenalty,
    RowTruncationPenalty,
    SignalPenalty,
    TruncationPenalty,
)
from .rates import DEFAULT_CRITICAL_THRESHOLD, DEFAULT_RHO, SpectralProfile
from .schur import DEFAULT_KAPPA
from .theory import DEFAULT_C4, DEFAULT_X, MIN_APPLICABILITY_SLACK


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class NoSignalSpec(StrictModel):
    kind: Literal["none"] = "none"

    def build(self) -> SignalPenalty:
        return NoSignalPenalty()


class RidgeSpec(StrictModel):
    kind: Literal["ridge"] = "ridge"
    g2: float = Field(ge=0.0)

    def build(self) -> SignalPenalty:
        return RidgePenalty(self.g2)


class DiagonalSpec(StrictModel):
    kind: Literal["diagonal"] = "diagonal"
    g2: list[float]

    def build(self) -> SignalPenalty:
        return DiagonalPenalty(np.array(self.g2))


class RoughnessSpec(StrictModel):
    kind: Literal["roughness"] = "roughness"
    w2: float = Field(ge=0.0)
    beta: float = Field(ge=0.0)

    def build(self) -> SignalPenalty:
        return RoughnessPenalty(self.w2, self.beta)


class TruncationSpec(StrictModel):
    kind: Literal["truncation"] = "truncation"
    j: int = Field(ge=1)

    def build(self) -> SignalPenalty:
        return TruncationPenalty(self.j)


class NoOperatorSpec(StrictModel):
    kind: Literal["none"] = "none"

    def build(self) -> OperatorPenalty:
        return NoOperatorPenalty()


class ElementwiseSpec(StrictModel):
    kind: Literal["elementwise"] = "elementwise"
    k2: list[list[float]]

    def build(self) -> OperatorPenalty:
        return ElementwisePenalty(np.array(self.k2))


class RowScalarSpec(StrictModel):
    kind: Literal["row_scalar"] = "row_scalar"
    k2: list[float]

    def build(self) -> OperatorPenalty:
        return RowScalarPenalty(np.array(self.k2))


class RowTruncationSpec(StrictModel):
    kind: Literal["row_truncation"] = "row_truncation"
    m: int = Field(ge=1)

    def build(self) -> OperatorPenalty:
        return RowTruncationPenalty(self.m)


SignalSpec = Annotated[
    Union[NoSignalSpec, RidgeSpec, DiagonalSpec, RoughnessSpec, TruncationSpec], Field(discriminator="kind")
]
OperatorSpec = Annotated[
    Union[NoOperatorSpec, ElementwiseSpec, RowScalarSpec, RowTruncationSpec], Field(discriminator="kind")
]


class PenaltySpec(StrictModel):
    signal: SignalSpec = Field(default_factory=NoSignalSpec)
    operator: OperatorSpec = Field(default_factory=NoOperatorSpec)

    def build(self) -> PenaltyConfig:
        return PenaltyConfig(self.signal.build(), self.operator.build())


class NoiseSpec(StrictModel):
    sigma_omega: float = Field(default=1.0, ge=0.0)
    sigma_u: float = Field(default=1.0, ge=0.0)
    family: Literal["gaussian", "laplace", "rademacher"] = "gaussian"

    def build(self) -> NoiseModel:
        return NoiseModel(self.sigma_omega, self.sigma_u, self.family)


class ProfileSpec(StrictModel):
    s: float = Field(default=1.0, gt=0.5)
    beta: float = Field(default=1.0, gt=0.0)
    c_w: float = Field(default=1.0, gt=0.0)
    n1: float = Field(default=1e4, gt=0.0)


class DirectGeneratorSpec(StrictModel):
    kind: Literal["direct"] = "direct"
    p: int = Field(default=8, ge=1)
    q: int = Field(default=12, ge=1)
    profile: ProfileSpec = Field(default_factory=ProfileSpec)
    mu2: float = Field(default=1e4, gt=0.0)
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    basis: Literal["identity", "random"] = "identity"
    truth_seed: int = Field(default=0, ge=0)
    random_signs: bool = False
    normalize: bool = False
    delta0: float = Field(default=DEFAULT_DELTA0, gt=0.0, le=0.1)
    kappa: float = Field(default=DEFAULT_KAPPA, gt=0.0)

    @model_validator(mode="after")
    def check_dimensions(self) -> "DirectGeneratorSpec":
        if self.q < self.p:
            raise ValueError(f"direct generator needs q >= p, got p={self.p}, q={self.q}")
        return self

    def to_spec(self) -> DirectModelSpec:
        profile = SpectralProfile.parametric(
            self.p, self.q, s=self.profile.s, beta=self.profile.beta, c_w=self.profile.c_w, n1=self.profile.n1
        )
        return DirectModelSpec(
            p=self.p,
            q=self.q,
            profile=profile,
            mu2=self.mu2,
            noise=self.noise.build(),
            basis=self.basis,
            truth_seed=self.truth_seed,
            random_signs=self.random_signs,
            normalize=self.normalize,
            delta0=self.delta0,
            kappa=self.kappa,
        )

    def build(self) -> DirectModelGenerator:
        return DirectModelGenerator(self.to_spec())


class RegressionGeneratorSpec(StrictModel):
    kind: Literal["random_design", "iv"] = "random_design"
    n: int = Field(default=1000, ge=1)
    signal_basis: Literal["legendre", "cosine"] = "legendre"
    image_basis: Literal["legendre", "cosine"] = "legendre"
    q: int = Field(default=8, ge=1)
    theta: list[float] = Field(min_length=1)
    noise_sd: float = Field(default=1.0, ge=0.0)
    family: Literal["gaussian", "laplace", "rademacher"] = "gaussian"
    design_a: float = Field(default=1.0, gt=0.0)
    design_b: float = Field(default=1.0, gt=0.0)
    mu2_scale: float = Field(default=1.0, gt=0.0)
    normalize: bool = True
    nodes: int = Field(default=DEFAULT_QUADRATURE_NODES, ge=2)
    strength: float = Field(default=0.7, gt=0.0, le=1.0)
    endogeneity: float = 1.0

    def to_spec(self) -> RegressionSpec:
        return RegressionSpec(
            n=self.n,
            signal_basis=make_basis(self.signal_basis, len(self.theta)),
            image_basis=make_basis(self.image_basis, self.q),
            theta=np.array(self.theta),
            noise_sd=self.noise_sd,
            design=DesignDensity(self.design_a, self.design_b),
            mu2_scale=self.mu2_scale,
            normalize=self.normalize,
            family=self.family,
            nodes=self.nodes,
        )

    def build(self) -> InstanceGenerator:
        if self.kind == "iv":
            return InstrumentGenerator(InstrumentSpec(self.to_spec(), self.strength, self.endogeneity))
        return RandomDesignGenerator(self.to_spec())


GeneratorSpec = Annotated[Union[DirectGeneratorSpec, RegressionGeneratorSpec], Field(discriminator="kind")]


class SolverSpec(StrictModel):
    max_iters: int = Field(default=DEFAULT_MAX_ITERS, ge=1)
    obj_tol: Optional[float] = Field(default=None, gt=0.0)
    grad_tol: Optional[float] = Field(default=None, gt=0.0)
    newton_refine: bool = True
    init: Literal["plugin", "zeros"] = "plugin"
    clamp_region: bool = False

    def build(self) -> SolveOptions:
        return SolveOptions(
            max_iters=self.max_iters,
            obj_tol=self.obj_tol,
            grad_tol=self.grad_tol,
            newton_refine=self.newton_refine,
            init=self.init,
            clamp_region=self.clamp_region,
        )


class SimulateConfig(StrictModel):
    generator: GeneratorSpec = Field(default_factory=DirectGeneratorSpec)
    seed: int = Field(default=0, ge=0)
    out: str = "out"


class EstimateConfig(StrictModel):
    instance: str = "."
    mu2: Optional[float] = Field(default=None, ge=0.0)
    penalty: PenaltySpec = Field(default_factory=PenaltySpec)
    solver: SolverSpec = Field(default_factory=SolverSpec)
    out: str = "out"


StudyName = Literal["fisher", "wilks", "risk", "dimension"]


class VerifyConfig(StrictModel):
    generator: DirectGeneratorSpec = Field(default_factory=DirectGeneratorSpec)
    penalty: PenaltySpec = Field(default_factory=PenaltySpec)
    solver: SolverSpec = Field(default_factory=SolverSpec)
    studies: list[StudyName] = Field(default_factory=lambda: ["fisher", "wilks", "risk"], min_length=1)
    replicates: int = Field(default=100, ge=1)
    x: float = Field(default=DEFAULT_X, gt=0.0)
    c4: float = Field(default=DEFAULT_C4, gt=0.0)
    at: Literal["population", "truth"] = "population"
    ridge_g2: Optional[float] = Field(default=None, ge=0.0)
    dimension_mu2: list[float] = Field(default_factory=lambda: [1e2, 1e3, 1e4, 1e5])
    critical_threshold: float = Field(default=DEFAULT_CRITICAL_THRESHOLD, gt=0.0)
    min_slack: float = Field(default=MIN_APPLICABILITY_SLACK, ge=0.0)
    seed: int = Field(default=0, ge=0)
    jobs: int = Field(default=1, ge=1)
    out: str = "out"


class RateStudyConfig(StrictModel):
    p: int = Field(default=50, ge=1)
    q: Optional[int] = Field(default=None, ge=1)
    profile: ProfileSpec = Field(default_factory=ProfileSpec)
    n1_grid: list[float] = Field(default_factory=lambda: [1e3, 1e4, 1e5, 1e6], min_length=1)
    mu2_scale: float = Field(default=1.0, gt=0.0)
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    solver: SolverSpec = Field(default_factory=SolverSpec)
    rho: float = Field(default=DEFAULT_RHO, gt=0.0, le=0.5)
    replicates: int = Field(default=100, ge=1)
    seed: int = Field(default=0, ge=0)
    jobs: int = Field(default=1, ge=1)
    plot: bool = True
    out: str = "out"

    @model_validator(mode="after")
    def check_grid(self) -> "RateStudyConfig":
        if any(n1 <= 0.0 for n1 in self.n1_grid):
            raise ValueError("n1_grid values must be positive")
        return self


RunConfig = Union[SimulateConfig, EstimateConfig, VerifyConfig, RateStudyConfig]

COMMAND_MODELS: dict[str, type[StrictModel]] = {
    "simulate": SimulateConfig,
    "estimate": EstimateConfig,
    "verify": VerifyConfig,
    "rate-study": RateStudyConfig,
}


def describe_validation_error(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def load_config(command: str, path: Optional[Union[str, Path]] = None, overrides: Optional[dict[str, Any]] = None):
    """Validate the JSON file at `path` (or the defaults) for `command`, then apply non-None flag overrides."""
    if command not in COMMAND_MODELS:
        raise InputValidationError(f"unknown command {command!r}")
    model = COMMAND_MODELS[command]
    data = read_json(path) if path is not None else {}
    if not isinstance(data, dict):
        raise InputValidationError(f"{path}: configuration must be a JSON object")
    updates = {key: value for key, value in (overrides or {}).items() if value is not None}
    unknown = set(updates) - set(model.model_fields)
    if unknown:
        raise InputValidationError(f"flag(s) {sorted(unknown)} do not apply to '{command}'")
    try:
        config = model.model_validate(data)
        return model.model_validate({**config.model_dump(), **updates})
    except ValidationError as e:
        raise InputValidationError(f"invalid {command} configuration: {describe_validation_error(e)}")
