"""
Pydantic schemas for scenario files.

A scenario names one model and carries the blocks every command may read.
Unknown keys are rejected at every level, so a typo in a preset or an
`--override` fails validation instead of being ignored.
"""

from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.registry import ModelSpec


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class IntegratorBlock(_Block):
    """Horizon and optional tolerance overrides of the application config."""

    t_start: float = Field(default=0.0, description="Initial time")
    t_end: float = Field(default=100.0, description="Final time")
    rel_tol: Optional[float] = Field(default=None, gt=0, lt=1)
    abs_tol: Optional[float] = Field(default=None, gt=0, lt=1)
    max_step: Optional[float] = Field(default=None, gt=0)
    sample_dt: Optional[float] = Field(default=None, gt=0, description="Output sampling step")

    @model_validator(mode="after")
    def check_span(self):
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        return self

    @property
    def t_span(self) -> Tuple[float, float]:
        return (self.t_start, self.t_end)


class InitialBlock(_Block):
    state: List[float] = Field(..., min_length=1, description="Initial population state")

    @field_validator("state")
    @classmethod
    def non_negative(cls, v):
        if any(value < 0 for value in v):
            raise ValueError("initial populations must be non-negative")
        return v


class ClassifyBlock(_Block):
    point: List[float] = Field(..., min_length=1, description="Candidate equilibrium")
    label: str = ""
    accept_tol: float = Field(default=1e-4, gt=0)


class SensitivityBlock(_Block):
    entries: List[Tuple[int, int]] = Field(default_factory=list, description="1-based (i, j); empty means all")
    delta: float = Field(default=1e-5, gt=0, description="Finite-difference step")


class ThirdConsumerBlock(_Block):
    c3: float = Field(..., gt=0)
    m13: float = Field(..., ge=0)
    m31: float = Field(..., ge=0)
    m23: float = Field(..., ge=0)
    m32: float = Field(..., ge=0)
    m33: float = Field(..., gt=0)


class StabilityBlock(_Block):
    third_consumer: Optional[ThirdConsumerBlock] = None


class InvadeBlock(_Block):
    resident_t_end: float = Field(default=2000.0, gt=0, description="Horizon of the resident run")
    burn_in_fraction: float = Field(default=0.5, ge=0, lt=1)


class SweepBlock(_Block):
    """Either an invasion (K2, a2) grid or a grid over two competition coefficients."""

    kind: Literal["invasion", "competition"] = "invasion"
    K2_range: Tuple[float, float] = (0.05, 2.0)
    a2_range: Tuple[float, float] = (0.0, 2.0)
    grid: Tuple[int, int] = (40, 40)
    T: float = Field(default=100.0, gt=0)
    entries: Optional[Tuple[Tuple[int, int], Tuple[int, int]]] = None
    values: Optional[Tuple[List[float], List[float]]] = None

    @model_validator(mode="after")
    def check_competition(self):
        if self.kind == "competition" and (self.entries is None or self.values is None):
            raise ValueError("a competition sweep needs entries and values")
        return self


class HopfBlock(_Block):
    """Optional curve tracing and post-threshold trials around the Hopf point."""

    sweep: Optional[str] = Field(default=None, description="Parameter traced along the curve")
    values: List[float] = Field(default_factory=list)
    with_l1: bool = False
    trial_values: List[float] = Field(default_factory=list, description="Bifurcation parameter values tried for a cycle")
    trial_state: Optional[List[float]] = None


class CoefficientTableBlock(_Block):
    c1: float = Field(..., gt=0)
    r1_values: List[float] = Field(..., min_length=1)
    r2_values: List[float] = Field(..., min_length=1)
    K2_values: List[float] = Field(..., min_length=1)


class L1Block(_Block):
    table: Optional[CoefficientTableBlock] = None


class AverageBlock(_Block):
    require_near: bool = True


class PoincareBlock(_Block):
    center: Optional[List[float]] = None
    horizon: Optional[float] = Field(default=None, gt=0)
    n_iterates: Optional[int] = Field(default=None, ge=3)
    start_offset: Optional[float] = Field(default=None, gt=0)


class ChaosBlock(_Block):
    window: Tuple[float, float] = (9000.0, 10000.0)
    sample_dt: float = Field(default=0.25, gt=0)
    h: float = Field(default=1e-4, gt=0, description="Lyapunov perturbation size")
    lyapunov_T: float = Field(default=2000.0, gt=0)
    lyapunov_dt: float = Field(default=0.1, gt=0)
    window_fraction: Optional[float] = Field(default=0.6, gt=0, le=1)
    correlation_coordinate: str = "x"
    m_max: int = Field(default=15, ge=3)
    entropy_m_max: int = Field(default=11, ge=3)
    heteroclinic_c: List[float] = Field(default_factory=lambda: [0.5, 0.9])
    check_structure: bool = True

    @model_validator(mode="after")
    def check_window(self):
        start, end = self.window
        if not end > start >= 0:
            raise ValueError("chaos window must satisfy 0 <= start < end")
        return self


class BoundBlock(_Block):
    phi: float = Field(..., gt=0, description="Decay rate of the weighted total")
    tolerance: float = Field(default=1e-6, ge=0)


class CenterManifoldBlock(_Block):
    point: List[float] = Field(..., min_length=1, description="Non-hyperbolic equilibrium")


class Scenario(_Block):
    """Validated scenario; `model` holds the built model record."""

    name: str = "scenario"
    description: str = ""
    model: ModelSpec = Field(..., description="Model block with a `family` tag")
    initial: Optional[InitialBlock] = None
    integrator: IntegratorBlock = Field(default_factory=IntegratorBlock)
    classify: Optional[ClassifyBlock] = None
    sensitivity: SensitivityBlock = Field(default_factory=SensitivityBlock)
    stability: StabilityBlock = Field(default_factory=StabilityBlock)
    invade: InvadeBlock = Field(default_factory=InvadeBlock)
    sweep: SweepBlock = Field(default_factory=SweepBlock)
    hopf: HopfBlock = Field(default_factory=HopfBlock)
    l1: L1Block = Field(default_factory=L1Block)
    average: AverageBlock = Field(default_factory=AverageBlock)
    poincare: PoincareBlock = Field(default_factory=PoincareBlock)
    chaos: ChaosBlock = Field(default_factory=ChaosBlock)
    bound: Optional[BoundBlock] = None
    center_manifold: Optional[CenterManifoldBlock] = None

    @model_validator(mode="after")
    def check_dimensions(self):
        dimension = len(self.model.coordinate_names)
        vectors = {
            "initial.state": self.initial.state if self.initial else None,
            "classify.point": self.classify.point if self.classify else None,
            "poincare.center": self.poincare.center,
            "hopf.trial_state": self.hopf.trial_state,
            "center_manifold.point": self.center_manifold.point if self.center_manifold else None,
        }
        for name, vector in vectors.items():
            if vector is not None and len(vector) != dimension:
                raise ValueError(f"{name} has {len(vector)} entries, model has {dimension} coordinates")
        return self

    @property
    def state(self) -> Optional[List[float]]:
        return list(self.initial.state) if self.initial else None
