import logging

from scalecheck.commands.common import difference_model, load_inputs, statistics_model, write_report
from scalecheck.core.auditor import AuditReport, audit
from scalecheck.core.constraints import tested_equality
from scalecheck.core.scalecheck_exceptions import ConstraintError
from scalecheck.schemas.report_schemas import (
    AuditRecordModel,
    AuditReportModel,
    DiagnosticModel,
    EquivalenceModel,
    HypothesisModel,
    RunConfig,
)
from scalecheck.utils.logging_decorators import log_function_call
from scalecheck.utils.text_tables import format_number, render_table, section

logger = logging.getLogger(__name__)

INTERACTION_BANNER = "*** INTERACTION DETECTED: the test decision depends on the scaling method ***"


def audit_report_model(report: AuditReport) -> AuditReportModel:
    return AuditReportModel(
        tested=str(report.tested),
        alpha=report.alpha,
        interaction_detected=report.interaction_detected,
        max_delta_chi_square=report.divergence_summary.max_delta_chi_square,
        min_delta_chi_square=report.divergence_summary.min_delta_chi_square,
        records=[
            AuditRecordModel(
                scaling=record.label,
                unrestricted=statistics_model(record.unrestricted),
                restricted=statistics_model(record.restricted),
                difference=difference_model(record.difference),
                decision=record.decision.value,
                hypothesis=HypothesisModel(
                    text=record.hypothesis.text, cross_multiplied=record.hypothesis.cross_multiplied_text
                ),
            )
            for record in report.records
        ],
        diagnostics=[
            DiagnosticModel(label=term.label, formula=term.formula, value=term.value) for term in report.diagnostics
        ],
        equivalences=[
            EquivalenceModel(first=item.first_label, second=item.second_label, reason=item.reason)
            for item in report.equivalences
        ],
    )


def render_audit_report(model: AuditReportModel) -> str:
    headers = [""] + [record.scaling for record in model.records]

    def block(title: str, attribute: str) -> str:
        rows = [
            ["χ²"] + [format_number(getattr(r, attribute).chi_square) for r in model.records],
            ["df"] + [str(getattr(r, attribute).df) for r in model.records],
            ["p"] + [format_number(getattr(r, attribute).p_value) for r in model.records],
            ["CFI"] + [format_number(getattr(r, attribute).cfi) for r in model.records],
            ["RMSEA"] + [format_number(getattr(r, attribute).rmsea) for r in model.records],
            ["SRMR"] + [format_number(getattr(r, attribute).srmr) for r in model.records],
        ]
        return section(title, render_table(headers, rows))

    difference_rows = [
        ["Δχ²"] + [format_number(r.difference.delta_chi_square) for r in model.records],
        ["Δdf"] + [str(r.difference.delta_df) for r in model.records],
        ["p"] + [format_number(r.difference.p_value) for r in model.records],
        ["ΔCFI"] + [format_number(r.difference.delta_cfi) for r in model.records],
        ["ΔRMSEA"] + [format_number(r.difference.delta_rmsea) for r in model.records],
        ["ΔSRMR"] + [format_number(r.difference.delta_srmr) for r in model.records],
        [f"decision (α = {model.alpha:g})"] + [r.decision for r in model.records],
    ]
    hypothesis_lines = "\n".join(
        f"{r.scaling}: {r.hypothesis.text}\n{' ' * (len(r.scaling) + 2)}{r.hypothesis.cross_multiplied}"
        for r in model.records
    )
    diagnostic_rows = [[d.label, format_number(d.value), d.formula] for d in model.diagnostics]

    parts = [f"Tested constraint: {model.tested}\n"]
    if model.interaction_detected:
        parts.append(INTERACTION_BANNER + "\n")
    parts.extend(
        [
            block("Unrestricted", "unrestricted"),
            block("Restricted", "restricted"),
            section("Difference", render_table(headers, difference_rows)),
            section("Hypotheses actually tested", hypothesis_lines),
            section("Divergence diagnostics", render_table(["Term", "Value", "Formula"], diagnostic_rows)),
            f"Δχ² ranges from {format_number(model.min_delta_chi_square)}"
            f" to {format_number(model.max_delta_chi_square)}",
        ]
    )
    for item in model.equivalences:
        parts.append(f"Equivalent hypotheses: {item.first} ≡ {item.second} ({item.reason})")
    return "\n".join(parts)


@log_function_call
def audit_command(config: RunConfig) -> AuditReportModel:
    """Run ``audit``; the one ``equal`` line of the constraints file is the tested equality."""
    if config.constraints_path is None:
        raise ConstraintError("audit needs a --constraints file with one 'equal' line")
    inputs = load_inputs(config)
    try:
        tested = tested_equality(inputs.constraints)
    except ConstraintError as e:
        raise ConstraintError(f"{config.constraints_path}: {e}") from e
    extra = [constraint for constraint in inputs.constraints if constraint is not tested]

    report = audit(inputs.moments, inputs.spec, tested, alpha=config.alpha, extra_constraints=extra)
    model = audit_report_model(report)
    text = model.json(indent=2) if config.output_format == "json" else render_audit_report(model)
    write_report(text, config)
    return model
