import logging

from scalecheck.commands.common import load_inputs, parameter_rows, statistics_model, write_report
from scalecheck.core.constraints import compile_constraints, degrees_of_freedom
from scalecheck.core.estimator import fit, model_implied_covariance
from scalecheck.core.fitstats import chi_square_statistic, compute_fit_statistics, fit_baseline
from scalecheck.core.interpretation import interpretation_report
from scalecheck.core.scaling import parse_scaling, scaling_constraints
from scalecheck.schemas.report_schemas import FitReport, RunConfig
from scalecheck.utils.logging_decorators import log_function_call
from scalecheck.utils.text_tables import format_number, render_table, section

logger = logging.getLogger(__name__)


def build_fit_report(config: RunConfig) -> FitReport:
    """Fit the model under the selected scaling (fixed marker at position 1 by default)."""
    inputs = load_inputs(config)
    spec, moments = inputs.spec, inputs.moments
    scaling = parse_scaling(config.scaling or "fixed-marker", spec)

    index = compile_constraints(spec, scaling_constraints(spec, scaling) + inputs.constraints)
    df = degrees_of_freedom(spec, index)
    estimate = fit(moments, spec, index)
    statistics = compute_fit_statistics(
        chi_square_statistic(estimate.discrepancy, moments.n),
        df,
        moments.n,
        fit_baseline(moments),
        moments.s,
        model_implied_covariance(estimate),
    )
    entries = interpretation_report(spec, scaling)
    return FitReport(
        scaling=scaling.label(spec),
        converged=estimate.converged,
        iterations=estimate.iterations,
        discrepancy=estimate.discrepancy,
        statistics=statistics_model(statistics),
        parameters=parameter_rows(entries, estimate, [index.is_fixed(entry.parameter) for entry in entries]),
    )


def render_fit_report(report: FitReport) -> str:
    rows = [
        [
            row.parameter + (" (fixed)" if row.fixed else ""),
            format_number(row.value),
            row.formula,
            row.interpretation,
        ]
        for row in report.parameters
    ]
    statistics = report.statistics
    fit_rows = [
        ["chi-square", format_number(statistics.chi_square)],
        ["df", str(statistics.df)],
        ["p", format_number(statistics.p_value)],
        ["CFI", format_number(statistics.cfi)],
        ["RMSEA", format_number(statistics.rmsea) + ("" if statistics.rmsea_defined else " (df = 0)")],
        ["SRMR", format_number(statistics.srmr)],
    ]
    return "\n".join(
        [
            section(
                f"Estimated model parameters ({report.scaling})",
                render_table(["Parameter", "Estimate", "Measures", "Interpretation"], rows),
            ),
            section("Fit", render_table(["Measure", "Value"], fit_rows)),
            f"Converged after {report.iterations} iterations (F = {format_number(report.discrepancy)})",
        ]
    )


@log_function_call
def fit_command(config: RunConfig) -> FitReport:
    """Run ``fit`` and write the report."""
    report = build_fit_report(config)
    text = report.json(indent=2) if config.output_format == "json" else render_fit_report(report)
    write_report(text, config)
    return report
