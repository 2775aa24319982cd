import logging
from typing import List

from scalecheck.commands.common import load_inputs, parameter_rows, write_report
from scalecheck.core.constraints import compile_constraints
from scalecheck.core.estimator import fit
from scalecheck.core.interpretation import interpretation_report, invariant_combinations
from scalecheck.core.scaling import ScalingMethod, parse_scaling, scaling_constraints, standard_scalings
from scalecheck.schemas.report_schemas import CombinationRow, InterpretationSection, InterpretReport, RunConfig
from scalecheck.utils.logging_decorators import log_function_call
from scalecheck.utils.text_tables import format_number, render_table, section

logger = logging.getLogger(__name__)


def build_interpret_report(config: RunConfig) -> InterpretReport:
    """Interpretation map per scaling plus the invariant-combinations table.

    Uses ``config.scaling`` alone when given, otherwise every standard scaling.
    """
    inputs = load_inputs(config)
    spec, moments = inputs.spec, inputs.moments
    scalings: List[ScalingMethod] = (
        [parse_scaling(config.scaling, spec)] if config.scaling else standard_scalings(spec)
    )

    sections: List[InterpretationSection] = []
    columns = []
    for scaling in scalings:
        index = compile_constraints(spec, scaling_constraints(spec, scaling) + inputs.constraints)
        estimate = fit(moments, spec, index)
        entries = interpretation_report(spec, scaling)
        rows = parameter_rows(entries, estimate, [index.is_fixed(entry.parameter) for entry in entries])
        sections.append(
            InterpretationSection(
                scaling=scaling.label(spec),
                free_parameters=[row for row in rows if not row.fixed],
                fixed_parameters=[row for row in rows if row.fixed],
            )
        )
        columns.append(invariant_combinations(estimate, spec))

    combinations = [
        CombinationRow(
            label=column_items[0].label,
            values=[None if item.flagged else item.value for item in column_items],
            flagged=any(item.flagged for item in column_items),
        )
        for column_items in zip(*columns)
    ]
    return InterpretReport(
        scalings=[part.scaling for part in sections],
        sections=sections,
        combinations=combinations,
    )


def _parameter_rows(rows) -> list[list[str]]:
    return [[row.parameter, format_number(row.value), row.formula, row.interpretation] for row in rows]


def render_interpret_report(report: InterpretReport) -> str:
    parts = []
    for part in report.sections:
        free_rows = _parameter_rows(part.free_parameters)
        fixed_rows = _parameter_rows(part.fixed_parameters)
        headers = ["Parameter", "Estimate", "Measures", "Interpretation"]
        parts.append(section(f"{part.scaling}: free parameters", render_table(headers, free_rows)))
        parts.append(section(f"{part.scaling}: fixed parameters", render_table(headers, fixed_rows)))
    combination_rows = [[row.label] + [format_number(value) for value in row.values] for row in report.combinations]
    combination_table = render_table(["Combination"] + report.scalings, combination_rows)
    parts.append(section("Scaling-invariant combinations", combination_table))
    return "\n".join(parts)


@log_function_call
def interpret_command(config: RunConfig) -> InterpretReport:
    """Run ``interpret`` and write the report."""
    report = build_interpret_report(config)
    text = report.json(indent=2) if config.output_format == "json" else render_interpret_report(report)
    write_report(text, config)
    return report
