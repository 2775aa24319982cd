"""Input loading and report output shared by the CLI commands."""

import logging
import sys
from dataclasses import dataclass
from typing import List

from scalecheck.core.constraints import Constraint, parse_constraints
from scalecheck.core.covariance_reader import read_covariance_file, read_text_file
from scalecheck.core.estimator import ParameterEstimate, SampleMoments
from scalecheck.core.fitstats import DifferenceStatistics, FitStatistics
from scalecheck.core.interpretation import InterpretationEntry, describe_estimate
from scalecheck.core.model_spec import ModelSpec, parse_model_spec
from scalecheck.core.scalecheck_config import scalecheck_config
from scalecheck.core.scalecheck_exceptions import CovarianceInputError, ModelSpecError
from scalecheck.schemas.report_schemas import (
    DifferenceModel,
    FitStatisticsModel,
    ParameterRow,
    RunConfig,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LoadedInputs:
    spec: ModelSpec
    moments: SampleMoments
    constraints: List[Constraint]


def load_inputs(config: RunConfig) -> LoadedInputs:
    """Read model, constraints and covariance files named by ``config``.

    Raises:
        ModelSpecError: On an invalid model or constraints file, naming the file
        CovarianceInputError: On an unusable covariance matrix, naming the file
    """
    try:
        spec = parse_model_spec(read_text_file(config.model_path), sample_size=config.n)
    except ModelSpecError as e:
        raise ModelSpecError(e.message, e.line_number, path=str(config.model_path)) from e

    constraints: List[Constraint] = []
    if config.constraints_path is not None:
        try:
            constraints = parse_constraints(read_text_file(config.constraints_path), spec)
        except ModelSpecError as e:
            raise ModelSpecError(e.message, e.line_number, path=str(config.constraints_path)) from e

    matrix, _ = read_covariance_file(config.covariance_path, spec.indicators)
    try:
        moments = SampleMoments.from_matrix(matrix, config.n)
    except CovarianceInputError as e:
        raise CovarianceInputError(e.message, str(config.covariance_path)) from e
    logger.info(f"Loaded {spec.n_indicators} indicators, {len(constraints)} constraint(s), N = {config.n}")
    return LoadedInputs(spec=spec, moments=moments, constraints=constraints)


def write_report(text: str, config: RunConfig) -> None:
    """Write to ``config.output_path`` or stdout."""
    if config.output_path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    config.output_path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    logger.info(f"Report written to {config.output_path}")


def statistics_model(statistics: FitStatistics) -> FitStatisticsModel:
    return FitStatisticsModel(
        chi_square=statistics.chi_square,
        df=statistics.df,
        p_value=statistics.p_value,
        cfi=statistics.cfi,
        rmsea=statistics.rmsea,
        srmr=statistics.srmr,
        rmsea_defined=statistics.rmsea_defined,
    )


def difference_model(difference: DifferenceStatistics) -> DifferenceModel:
    return DifferenceModel(
        delta_chi_square=difference.delta_chi_square,
        delta_df=difference.delta_df,
        p_value=difference.p_value,
        delta_cfi=difference.delta_cfi,
        delta_rmsea=difference.delta_rmsea,
        delta_srmr=difference.delta_srmr,
    )


def parameter_rows(
    entries: List[InterpretationEntry], estimate: ParameterEstimate, fixed: List[bool]
) -> List[ParameterRow]:
    return [
        ParameterRow(
            parameter=str(entry.parameter),
            value=estimate.value(entry.parameter),
            fixed=is_fixed,
            transformation=entry.transformation.value,
            formula=entry.formula,
            interpretation=describe_estimate(
                entry, estimate.value(entry.parameter), scalecheck_config.display_decimals
            ),
        )
        for entry, is_fixed in zip(entries, fixed)
    ]
