from typing import Literal, Optional, Union
from datetime import datetime, timezone
import sqlmodel
import enum


class Spacing(str, enum.Enum):
    UNIFORM = "uniform"
    LOGARITHMIC = "logarithmic"


class CollisionMode(str, enum.Enum):
    NEAR_RESONANCE = "near_resonance"
    EXACT_RESONANCE = "exact_resonance"


class PresetName(str, enum.Enum):
    GAUSSIAN_BUMP = "gaussian_bump"
    POWER_LAW = "power_law"


class Provenance(str, enum.Enum):
    TRIVIAL = "trivial"
    DERIVED = "derived"


class PhysicalParams(sqlmodel.SQLModel):
    """Dispersion, damping, kernel and broadening constants."""

    lambda1: float = sqlmodel.Field(default=1.0, ge=0)
    lambda2: float = sqlmodel.Field(default=1.0, gt=0)
    nu: float = sqlmodel.Field(default=0.0, ge=0)
    c_v: float = sqlmodel.Field(default=1.0, gt=0)
    c_gamma: float = sqlmodel.Field(default=1.0, gt=0)


class GridSpec(sqlmodel.SQLModel):
    r_min: float = sqlmodel.Field(default=0.0, ge=0)
    r_max: float = sqlmodel.Field(default=8.0, gt=0)
    n: int = sqlmodel.Field(default=128, ge=8)
    spacing: Spacing = Spacing.UNIFORM


class InitialCondition(sqlmodel.SQLModel):
    """Either a named preset with its parameters or a spectrum CSV path."""

    preset: Optional[PresetName] = PresetName.GAUSSIAN_BUMP
    params: dict[str, float] = {}
    spectrum_file: Optional[str] = None


class RunSettings(sqlmodel.SQLModel):
    T: float = sqlmodel.Field(default=1.0, ge=0)
    dt: Optional[float] = sqlmodel.Field(default=None, gt=0)
    cfl_safety: float = sqlmodel.Field(default=0.9, gt=0, le=1)
    mode: CollisionMode = CollisionMode.NEAR_RESONANCE
    record_every: int = sqlmodel.Field(default=1, ge=1)
    N: float = sqlmodel.Field(default=1.0, ge=0)


class RunConfig(RunSettings):
    """Run block bound to the physical constants it integrates with."""

    params: PhysicalParams = PhysicalParams()


class EnvelopeSettings(sqlmodel.SQLModel):
    """Invariant-set radii; "auto" derives them from the initial spectrum."""

    R0: Union[float, Literal["auto"]] = "auto"
    R_lower: Union[float, Literal["auto"]] = "auto"
    R_upper: Union[float, Literal["auto"]] = "auto"
    r0_mass_fraction: float = sqlmodel.Field(default=0.99, gt=0, le=1)


class VerifySettings(sqlmodel.SQLModel):
    suite: list[str] = ["all"]
    samples: int = sqlmodel.Field(default=50, ge=1)
    pairs: int = sqlmodel.Field(default=100, ge=1)
    seed: int = sqlmodel.Field(default=7, ge=0)
    mass_floor: float = sqlmodel.Field(default=0.1, gt=0)
    moment_ceiling: float = sqlmodel.Field(default=1.0e4, gt=0)
    amplitude_min: float = sqlmodel.Field(default=0.05, gt=0)
    amplitude_max: float = sqlmodel.Field(default=2.0, gt=0)
    bump_fraction: float = sqlmodel.Field(default=0.7, ge=0, le=1)
    gamma_scales: list[float] = [1.0e-5, 1.0e-6, 1.0e-7]


class ConfigFile(sqlmodel.SQLModel):
    physical: PhysicalParams = PhysicalParams()
    grid: GridSpec = GridSpec()
    initial: InitialCondition = InitialCondition()
    run: RunSettings = RunSettings()
    envelope: EnvelopeSettings = EnvelopeSettings()
    verify: VerifySettings = VerifySettings()


class RunRecord(sqlmodel.SQLModel, table=True):
    """One archived invocation of the batch tool."""

    id: Optional[int] = sqlmodel.Field(default=None, primary_key=True)
    command: str
    config_hash: str
    seed: Optional[int] = None
    started_at: datetime = sqlmodel.Field(default_factory=lambda: datetime.now(timezone.utc))
    exit_code: int = 0
    entries: list["LedgerEntry"] = sqlmodel.Relationship(back_populates="run")
    checks: list["CheckRecord"] = sqlmodel.Relationship(back_populates="run")


class LedgerEntry(sqlmodel.SQLModel, table=True):
    """Moments, envelopes and invariant-set flags at one recorded time."""

    id: Optional[int] = sqlmodel.Field(default=None, primary_key=True)
    t: float
    m0: float
    m1: float
    mN: float
    mN1: float
    mN2: float
    l1N3: float
    c0: float
    c1: float
    envelope_slack: float
    restricted_mass: float
    restricted_bound: float
    s1: bool = True
    s2: bool = True
    s3: bool = True
    trunc_warn: bool = False
    run_id: Optional[int] = sqlmodel.Field(default=None, foreign_key="runrecord.id")
    run: Optional[RunRecord] = sqlmodel.Relationship(back_populates="entries")


class CheckRecord(sqlmodel.SQLModel, table=True):
    """Outcome of one verification check."""

    id: Optional[int] = sqlmodel.Field(default=None, primary_key=True)
    name: str
    reference: str
    samples: int = 0
    worst_ratio: float = 0.0
    bound: float = 0.0
    provenance: Provenance = sqlmodel.Field(default=Provenance.DERIVED)
    passed: bool = True
    tolerance: float = 0.0
    seed: Optional[int] = None
    note: Optional[str] = None
    run_id: Optional[int] = sqlmodel.Field(default=None, foreign_key="runrecord.id")
    run: Optional[RunRecord] = sqlmodel.Relationship(back_populates="checks")
