"""
Validated run configuration for the command-line tools
"""
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

COMMANDS = ('period-table', 'expansion-check', 'check', 'generate', 'simulate')


class RunConfig(BaseModel):
    """Options of one CLI invocation: config-file ``run`` section overlaid by flags"""
    model_config = ConfigDict(extra='forbid')

    command: Literal['period-table', 'expansion-check', 'check', 'generate', 'simulate']
    dim: int = Field(3, ge=2, description="Spatial dimension d")
    mass: float = Field(1.0, gt=0, description="Enclosed mass of the effective potential")
    tol: float = Field(1e-10, gt=0, lt=1e-2, description="Relative tolerance of quadrature and ODE solves")
    samples: int = Field(200, ge=2, description="Energy samples per period table")
    emin_offset_min: float = Field(1e-4, gt=0, description="Smallest E - e_min of a period table")
    emin_offset_max: float = Field(1e2, gt=0, description="Largest E - e_min of a period table")
    emin_offset: float = Field(0.5, gt=0, description="E - e_min of a single orbit")
    expansion_offset: float = Field(1e-3, gt=0, description="E - e_min used by expansion-check")
    all_dims: Optional[Tuple[int, int]] = Field(None, description="Inclusive dimension range A..B")
    normalized: bool = Field(False, description="Tabulate the normalized potential V_d")
    out: str = Field('output', description="Output directory")
    input: Optional[str] = Field(None, description="Profile CSV with header r,P0,u0")
    mode: Literal['orbit', 'pw', 'bulk'] = 'orbit'
    t_end: Optional[float] = Field(None, gt=0, description="Final time of a simulation")
    t_max: Optional[float] = Field(None, gt=0, description="Horizon of the crossing search")
    crossing_demo: bool = False
    family: Literal['stationary', 'compliant', 'perturbed', 'blowup'] = 'compliant'
    c0_offset: float = Field(0.5, gt=0, description="C0 - C_min of generated data")
    shape: Optional[float] = Field(None, description="Mass shape parameter B of generated data")
    alpha: float = Field(1.0, description="Velocity perturbation strength of the perturbed family")
    radius: float = Field(1.0, gt=0, description="Support radius R0 of generated data")
    nodes: int = Field(512, ge=2, description="Grid nodes of generated data")
    label_count: Optional[int] = Field(None, ge=2, description="Labels of a bulk run")
    label_radius: Optional[float] = Field(None, gt=0, description="Starting radius of a pw run")

    @field_validator('all_dims', mode='before')
    @classmethod
    def _parse_range(cls, value):
        if isinstance(value, str):
            parts = value.split('..')
            if len(parts) != 2:
                raise ValueError(f"expected a range A..B, got {value!r}")
            return int(parts[0]), int(parts[1])
        return value

    @field_validator('all_dims')
    @classmethod
    def _check_range(cls, value):
        if value is not None and not 2 <= value[0] <= value[1]:
            raise ValueError(f"dimension range must satisfy 2 <= A <= B, got {value[0]}..{value[1]}")
        return value

    @model_validator(mode='after')
    def _check_offsets(self):
        if self.emin_offset_min >= self.emin_offset_max:
            raise ValueError(
                f"emin_offset_min ({self.emin_offset_min}) must be below emin_offset_max ({self.emin_offset_max})"
            )
        return self

    def dimensions(self):
        if self.all_dims is None:
            return [self.dim]
        return list(range(self.all_dims[0], self.all_dims[1] + 1))


class RunSummary(BaseModel):
    """Machine-readable summary written next to simulation output"""
    mode: str
    d: int
    status: str = 'completed'
    measured_period: Optional[float] = None
    quadrature_period: Optional[float] = None
    energy_drift: Optional[float] = None
    blowup_time: Optional[float] = None
    breakdown_time: Optional[float] = None
    crossing_time: Optional[float] = None
    boundary_final: Optional[float] = None
    closed_form_min_f: Optional[float] = None
    files: List[str] = Field(default_factory=list)
