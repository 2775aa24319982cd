"""Tests for parameter interpretation and invariant combinations."""

import math

import numpy as np
import pytest

from scalecheck.core.constraints import compile_constraints
from scalecheck.core.estimator import ParameterEstimate, fit
from scalecheck.core.interpretation import (
    Transformation,
    describe_estimate,
    find_combination,
    interpretation_report,
    invariant_combinations,
)
from scalecheck.core.model_spec import LatentCov, Loading, ResidualCov
from scalecheck.core.scaling import ScalingKind, ScalingMethod, scaling_constraints, standard_scalings


def _estimates(moments, spec):
    estimates = []
    for scaling in standard_scalings(spec):
        index = compile_constraints(spec, scaling_constraints(spec, scaling))
        estimates.append(fit(moments, spec, index))
    return estimates


class TestInvariantCombinations:
    """Combinations come out the same under every scaling."""

    def test_two_factor_invariance(self, two_factor_moments, two_factor_spec):
        """Test the invariant combinations of the two-factor example."""
        estimates = _estimates(two_factor_moments, two_factor_spec)
        columns = [invariant_combinations(estimate, two_factor_spec) for estimate in estimates]
        assert all(len(column) == len(columns[0]) for column in columns)
        for items in zip(*columns):
            values = [item.value for item in items]
            np.testing.assert_allclose(values, values[0], atol=1e-5)

        first = columns[0]
        assert find_combination(first, "A->X2 / A->X1").value == pytest.approx(0.625, abs=1e-5)
        assert find_combination(first, "A->X1 * sqrt(Var(A))").value == pytest.approx(3.39411, abs=1e-5)
        assert find_combination(first, "Corr(A,B)").value == pytest.approx(0.68041, abs=1e-5)
        assert find_combination(first, "Cov(A,B) * A->X1 * B->X3").value == pytest.approx(3.2, abs=1e-5)
        assert find_combination(first, "Var(A) * mean(A->{X1,X2})^2").value == pytest.approx(7.605, abs=1e-4)

    def test_longitudinal_invariance(self, longitudinal_moments, longitudinal_spec):
        """Test the invariant combinations of the longitudinal example."""
        columns = [
            invariant_combinations(estimate, longitudinal_spec)
            for estimate in _estimates(longitudinal_moments, longitudinal_spec)
        ]
        for items in zip(*columns):
            values = [item.value for item in items]
            np.testing.assert_allclose(values, values[0], atol=1e-5)

        first = columns[0]
        assert find_combination(first, "A1->X21 / A1->X11").value == pytest.approx(5.0, abs=1e-4)
        assert find_combination(first, "A2->X42 / A2->X32").value == pytest.approx(0.5, abs=1e-4)
        assert find_combination(first, "A1->X31 / mean(A1->{X11,X21,X31,X41})").value == pytest.approx(1.28, abs=1e-4)
        assert find_combination(first, "Var(A1) * (A1->X41)^2").value == pytest.approx(4.0, abs=1e-4)
        assert find_combination(first, "Cov(A1,A2) * A1->X31 * A2->X32").value == pytest.approx(3.072, abs=1e-4)
        assert find_combination(first, "Corr(A1,A2)").value == pytest.approx(0.24, abs=1e-4)
        assert find_combination(
            first, "Cov(A1,A2) * mean(A1->{X11,X21,X31,X41}) * mean(A2->{X12,X22,X32,X42})"
        ).value == pytest.approx(2.4, abs=1e-4)

    def test_zero_loading_is_flagged(self, two_factor_spec):
        """Test that a zero denominator is flagged."""
        lambda_ = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
        estimate = ParameterEstimate.from_matrices(two_factor_spec, lambda_, np.eye(2), np.eye(4))
        combination = find_combination(invariant_combinations(estimate, two_factor_spec), "A->X2 / A->X1")
        assert combination.flagged
        assert math.isnan(combination.value)

    def test_unknown_label(self, two_factor_spec):
        """Test looking up an unknown label."""
        with pytest.raises(KeyError):
            find_combination([], "Corr(A,B)")


def _factor_multipliers(estimate, spec, scaling):
    """Per-factor u with λ_scaled = λ·u and Φ_scaled[f, g] = Φ[f, g] / (u_f·u_g)."""
    multipliers = {}
    for factor in spec.factors:
        loadings = [estimate.loading(factor, name) for name in spec.indicators_of(factor)]
        if scaling.is_marker:
            marker = scaling.marker_of(factor)
            multipliers[factor] = 1.0 / estimate.loading(marker.factor, marker.indicator)
        elif scaling.kind is ScalingKind.FIXED_FACTOR:
            multipliers[factor] = math.sqrt(estimate.latent(factor))
        else:
            multipliers[factor] = 1.0 / float(np.mean(loadings))
    return multipliers


class TestScalingConsistency:
    """Each scaling's fit is a rescaling of every other scaling's fit."""

    @pytest.mark.parametrize("example", ["two_factor", "longitudinal"])
    def test_rescaled_estimates_agree(self, example, request):
        """Test that rescaling any fit to a scaling reproduces that scaling's own fit."""
        spec = request.getfixturevalue(f"{example}_spec")
        moments = request.getfixturevalue(f"{example}_moments")
        scalings = standard_scalings(spec)
        estimates = _estimates(moments, spec)

        for scaling, own in zip(scalings, estimates):
            for other in estimates:
                u = _factor_multipliers(other, spec, scaling)
                for factor in spec.factors:
                    for name in spec.indicators_of(factor):
                        assert own.loading(factor, name) == pytest.approx(
                            other.loading(factor, name) * u[factor], rel=1e-5, abs=1e-6
                        )
                for first in spec.factors:
                    for second in spec.factors:
                        assert own.latent(first, second) == pytest.approx(
                            other.latent(first, second) / (u[first] * u[second]), rel=1e-5, abs=1e-6
                        )
                np.testing.assert_allclose(own.theta, other.theta, rtol=1e-5, atol=1e-6)


class TestInterpretationReport:
    """Test suite for interpretation_report and describe_estimate."""

    def test_one_entry_per_parameter(self, longitudinal_spec):
        """Test one entry per parameter."""
        for scaling in standard_scalings(longitudinal_spec):
            entries = interpretation_report(longitudinal_spec, scaling)
            assert [entry.parameter for entry in entries] == list(longitudinal_spec.parameters())

    def test_fixed_marker_entries(self, two_factor_spec):
        """Test the entries under fixed markers."""
        entries = {
            entry.parameter: entry
            for entry in interpretation_report(two_factor_spec, ScalingMethod.marker_position(two_factor_spec, 1))
        }
        assert entries[Loading("A", "X1")].transformation is Transformation.FIXED_TO_ONE
        assert entries[Loading("A", "X2")].transformation is Transformation.LOADING_RATIO_TO_MARKER
        assert entries[Loading("A", "X2")].formula == "(A->X2)/(A->X1)"
        assert entries[LatentCov("A", "A")].transformation is Transformation.VARIANCE_TIMES_SQUARED_MARKER_LOADING
        assert entries[LatentCov("A", "B")].transformation is Transformation.COVARIANCE_TIMES_MARKER_LOADINGS
        assert entries[ResidualCov("X1", "X1")].transformation is Transformation.RESIDUAL_COVARIANCE

    def test_fixed_factor_entries(self, two_factor_spec):
        """Test the entries under fixed factor."""
        report = interpretation_report(two_factor_spec, ScalingMethod.fixed_factor())
        entries = {entry.parameter: entry for entry in report}
        assert entries[LatentCov("A", "A")].transformation is Transformation.FIXED_TO_ONE
        assert entries[LatentCov("A", "B")].transformation is Transformation.LATENT_CORRELATION
        assert entries[Loading("A", "X1")].formula == "(A->X1)*sqrt(Var(A))"

    def test_effects_coding_entries(self, two_factor_spec):
        """Test the entries under effects coding."""
        report = interpretation_report(two_factor_spec, ScalingMethod.effects_coding())
        entries = {entry.parameter: entry for entry in report}
        assert entries[Loading("B", "X4")].transformation is Transformation.LOADING_RATIO_TO_AVERAGE
        assert entries[Loading("B", "X4")].formula == "(B->X4)/mean(B->{X3,X4})"
        assert entries[LatentCov("A", "B")].transformation is Transformation.COVARIANCE_TIMES_AVERAGE_LOADINGS

    def test_describe_marker_ratio(self, two_factor_spec):
        """Test the sentence for a marker ratio."""
        entry = interpretation_report(two_factor_spec, ScalingMethod.marker_position(two_factor_spec, 1))[1]
        assert describe_estimate(entry, 0.625) == "X2 loads on A 0.62500 as much as does X1"

    def test_describe_effects_ratio(self, two_factor_spec):
        """Test the sentence for an effects ratio."""
        entry = interpretation_report(two_factor_spec, ScalingMethod.effects_coding())[0]
        assert describe_estimate(entry, 1.23077) == "X1 loads 23.077% stronger on A than A's average indicator does"
        weaker = interpretation_report(two_factor_spec, ScalingMethod.effects_coding())[1]
        assert "23.077% weaker" in describe_estimate(weaker, 0.76923)

    def test_describe_fixed_factor_loading(self, two_factor_spec):
        """Test the sentence for a fixed-factor loading."""
        entry = interpretation_report(two_factor_spec, ScalingMethod.fixed_factor())[0]
        assert describe_estimate(entry, 3.39411) == (
            "the product of X1's factor loading on A and A's standard deviation is 3.39411"
        )
