"""
Pydantic schemas for run configuration and structured reports.

Structured reports carry full precision; text reports round for display.
"""

from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, validator

from scalecheck.core.scalecheck_config import scalecheck_config

OUTPUT_FORMATS = ("text", "json")


class RunConfig(BaseModel):
    """
    Settings of one CLI run.

    Attributes:
        covariance_path: Covariance matrix file
        n: Sample size
        model_path: Model description file
        constraints_path: Optional constraints file
        scaling: Scaling selector for ``fit``; all standard scalings otherwise
        alpha: Significance level
        output_format: ``text`` or ``json``
        output_path: Write the report here instead of stdout
    """

    covariance_path: Path
    n: int
    model_path: Path
    constraints_path: Optional[Path] = None
    scaling: Optional[str] = None
    alpha: float = Field(default_factory=lambda: scalecheck_config.default_alpha)
    output_format: str = "text"
    output_path: Optional[Path] = None

    @validator("n")
    def sample_size_at_least_two(cls, value: int) -> int:
        if value < 2:
            raise ValueError(f"sample size must be at least 2, got {value}")
        return value

    @validator("alpha")
    def alpha_in_unit_interval(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {value}")
        return value

    @validator("output_format")
    def known_format(cls, value: str) -> str:
        if value not in OUTPUT_FORMATS:
            raise ValueError(f"format must be one of {', '.join(OUTPUT_FORMATS)}, got '{value}'")
        return value


class FitStatisticsModel(BaseModel):
    chi_square: float
    df: int
    p_value: float
    cfi: float
    rmsea: float
    srmr: float
    rmsea_defined: bool = True


class DifferenceModel(BaseModel):
    delta_chi_square: float
    delta_df: int
    p_value: float
    delta_cfi: float
    delta_rmsea: float
    delta_srmr: float


class ParameterRow(BaseModel):
    """
    One estimated parameter.

    Attributes:
        parameter: Address such as ``A->X2`` or ``A~~B``
        value: Estimate
        fixed: Whether constraints fix the value
        transformation: Population quantity the estimate measures
        formula: Symbolic form of that quantity
        interpretation: Sentence describing the estimate
    """

    parameter: str
    value: float
    fixed: bool
    transformation: str
    formula: str
    interpretation: str


class CombinationRow(BaseModel):
    label: str
    values: List[Optional[float]]
    flagged: bool = False


class FitReport(BaseModel):
    scaling: str
    converged: bool
    iterations: int
    discrepancy: float
    statistics: FitStatisticsModel
    parameters: List[ParameterRow]


class HypothesisModel(BaseModel):
    text: str
    cross_multiplied: str


class AuditRecordModel(BaseModel):
    scaling: str
    unrestricted: FitStatisticsModel
    restricted: FitStatisticsModel
    difference: DifferenceModel
    decision: str
    hypothesis: HypothesisModel


class DiagnosticModel(BaseModel):
    label: str
    formula: str
    value: float


class EquivalenceModel(BaseModel):
    first: str
    second: str
    reason: str


class AuditReportModel(BaseModel):
    tested: str
    alpha: float
    interaction_detected: bool
    max_delta_chi_square: float
    min_delta_chi_square: float
    records: List[AuditRecordModel]
    diagnostics: List[DiagnosticModel]
    equivalences: List[EquivalenceModel]


class InterpretationSection(BaseModel):
    scaling: str
    free_parameters: List[ParameterRow]
    fixed_parameters: List[ParameterRow]


class InterpretReport(BaseModel):
    scalings: List[str]
    sections: List[InterpretationSection]
    combinations: List[CombinationRow]
