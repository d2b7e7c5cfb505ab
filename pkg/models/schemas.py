"""
Config-file, run and report schemas
Uses Pydantic for type checking and validation
"""

import json
import re
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator

from config import Engine
from core_engine.profiles import StepProfile

Probability = Annotated[float, Field(gt=0, le=0.5)]


# Profile config files

class UniformProfileSpec(BaseModel):
    """p_j = p on every line"""
    kind: Literal["uniform"] = "uniform"
    p: Probability = Field(..., description="Vertical step probability")
    omega: Optional[Probability] = Field(None, description="Lower bound on p_j")

    model_config = ConfigDict(json_schema_extra={"example": {"kind": "uniform", "p": 0.25}})

    def to_profile(self) -> StepProfile:
        return StepProfile.uniform(self.p, omega=self.omega)


class PeriodicProfileSpec(BaseModel):
    """p_j = p[j mod L]"""
    kind: Literal["periodic"] = "periodic"
    p: List[Probability] = Field(..., min_length=1, description="One period, starting at j = 0")
    omega: Optional[Probability] = None

    model_config = ConfigDict(json_schema_extra={"example": {"kind": "periodic", "p": [0.25, 0.5]}})

    def to_profile(self) -> StepProfile:
        return StepProfile.periodic(self.p, omega=self.omega)


class TableProfileSpec(BaseModel):
    """Explicit values on a window of lines, constant tails outside it"""
    kind: Literal["table"] = "table"
    window_min: int = Field(0, description="Line of the first listed value")
    values: List[Probability] = Field(..., min_length=1)
    tail_pos: Probability = Field(..., description="p_j above the window")
    tail_neg: Probability = Field(..., description="p_j below the window")
    omega: Optional[Probability] = None

    model_config = ConfigDict(json_schema_extra={
        "example": {"kind": "table", "window_min": 0, "values": [0.25], "tail_pos": 0.5, "tail_neg": 0.5}
    })

    def to_profile(self) -> StepProfile:
        return StepProfile.table(self.window_min, self.values, self.tail_pos, self.tail_neg, omega=self.omega)


ProfileSpec = Annotated[
    Union[UniformProfileSpec, PeriodicProfileSpec, TableProfileSpec],
    Field(discriminator="kind"),
]
_profile_adapter = TypeAdapter(ProfileSpec)


def parse_profile_spec(data: Union[str, Dict[str, Any]]) -> Union[UniformProfileSpec, PeriodicProfileSpec, TableProfileSpec]:
    """Validate a profile given as JSON text or a mapping"""
    if isinstance(data, str):
        return _profile_adapter.validate_json(data)
    return _profile_adapter.validate_python(data)


def load_profile_spec(path: Union[str, Path]):
    """Read and validate a profile JSON file"""
    text = Path(path).read_text(encoding="utf-8")
    return parse_profile_spec(text)


# Run configuration

_RANGE = re.compile(r"^\s*(\d+)\s*\.\.\s*(\d+)\s*$")
_SITE = re.compile(r"^\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*$")


def parse_grid(text: str) -> List[int]:
    """Parse "a,b,c", "a..b" or a mix such as "1..5,10" into a list of integers"""
    grid: List[int] = []
    for part in text.split(","):
        if not part.strip():
            continue
        match = _RANGE.match(part)
        if match:
            lo, hi = int(match.group(1)), int(match.group(2))
            if hi < lo:
                raise ValueError(f"empty range {part.strip()}")
            grid.extend(range(lo, hi + 1))
        else:
            grid.append(int(part))
    return grid


def parse_sites(text: str) -> List[Tuple[int, int]]:
    """Parse "(0,0);(0,1)" into a list of lattice sites"""
    sites: List[Tuple[int, int]] = []
    for part in text.split(";"):
        if not part.strip():
            continue
        match = _SITE.match(part)
        if not match:
            raise ValueError(f"malformed site {part.strip()!r}, expected (k,j)")
        sites.append((int(match.group(1)), int(match.group(2))))
    return sites


class RunConfig(BaseModel):
    """Every setting of one CLI invocation; serialised into each manifest"""
    command: Literal["profile-info", "exact", "simulate", "verify"]
    profile_path: str
    n_grid: List[int] = Field(default_factory=list, description="Step counts (exact) or N (verify)")
    sim_grid: List[int] = Field(default_factory=list, description="Walk lengths for Monte Carlo claims")
    replicas: int = Field(0, ge=0)
    seed: int = Field(0, ge=0)
    level_cap: Union[int, Literal["AUTO"]] = "AUTO"
    sites: Optional[List[Tuple[int, int]]] = None
    engine: Engine = Engine.DIRECT
    out_dir: str = "results"
    format: Literal["csv", "json"] = "json"
    retry_cap: int = Field(0, ge=0, description="Cap doublings allowed on truncation failure")

    @field_validator("n_grid", "sim_grid", mode="before")
    @classmethod
    def validate_grid(cls, v):
        if v is None:
            return []
        if isinstance(v, str):
            v = parse_grid(v)
        if any(int(x) < 0 for x in v):
            raise ValueError("grid values must be non-negative")
        return v

    @field_validator("sites", mode="before")
    @classmethod
    def validate_sites(cls, v):
        if isinstance(v, str):
            return parse_sites(v)
        return v

    @field_validator("level_cap", mode="before")
    @classmethod
    def validate_level_cap(cls, v):
        if v is None:
            return "AUTO"
        if isinstance(v, str):
            if v.strip().upper() == "AUTO":
                return "AUTO"
            v = int(v)
        if v < 1:
            raise ValueError("level cap must be at least 1")
        return v


# Reports and manifests

class Verdict(str, Enum):
    PASS = "pass"
    TREND = "trend"
    FAIL = "fail"
    SKIPPED = "skipped"


class Provenance(str, Enum):
    EXACT = "exact"
    MONTE_CARLO = "monte-carlo"


class VerificationReport(BaseModel):
    """Numeric outcome of one checked claim"""
    claim: str
    constant: Optional[float] = Field(None, description="Theoretical constant the ratios are built from")
    grid: List[int] = Field(default_factory=list)
    values: List[Optional[float]] = Field(default_factory=list)
    ratios: List[Optional[float]] = Field(default_factory=list)
    tolerance: Optional[float] = None
    verdict: Verdict
    provenance: Provenance = Provenance.EXACT
    ci: Optional[List[Tuple[float, float]]] = None
    notes: List[str] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(ser_json_inf_nan="null")

    @property
    def failed(self) -> bool:
        return self.verdict == Verdict.FAIL


class BatchManifest(BaseModel):
    """Everything needed to reproduce a simulate run"""
    command: str
    profile: Dict[str, Any]
    n_steps: int
    replicas: int
    base_seed: int
    engine: Engine
    sites: Optional[List[Tuple[int, int]]] = None
    run_config: Dict[str, Any]
    code_version: str
    settings: Dict[str, Any] = Field(default_factory=dict)
    created_at: str


class RunManifest(BaseModel):
    """Settings and provenance of an exact or verify run"""
    command: str
    profile: Dict[str, Any]
    run_config: Dict[str, Any]
    code_version: str
    settings: Dict[str, Any] = Field(default_factory=dict)
    created_at: str


def report_list_json(reports: List[VerificationReport]) -> str:
    """JSON array of reports with NaN written as null"""
    return json.dumps([json.loads(r.model_dump_json()) for r in reports], indent=2)
