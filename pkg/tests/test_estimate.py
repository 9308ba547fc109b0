"""Unit tests for numerical fitting and the closed-form estimators."""
import numpy as np
import pytest

from src.chain import StateSpace, TupleCounts
from src.estimate import FitOptions, closed_form_fit, fit, has_closed_form
from src.likelihood import MethodSpec, Objective
from src.models import (
    Family,
    GeneralTwoState,
    Ising,
    Kimura4,
    ModelSpec,
    ReflectingWalk,
    Saturated,
    SymmetricTwoState,
    make_model,
)
from src.utils.errors import DataDegenerate, NoClosedForm

from .conftest import KIMURA_THETA, PUSHKIN, simulated_counts

CLOSED_FORM_CASES = [
    (ModelSpec(family=Family.SYMMETRIC_TWO_STATE), "ml", [0.3]),
    (ModelSpec(family=Family.SYMMETRIC_TWO_STATE), "ql2", [0.3]),
    (ModelSpec(family=Family.SYMMETRIC_TWO_STATE), "pl", [0.3]),
    (ModelSpec(family=Family.GENERAL_TWO_STATE), "ml", [0.3, 0.6]),
    (ModelSpec(family=Family.ISING), "ml", [0.8]),
    (ModelSpec(family=Family.ISING), "ql2", [0.8]),
    (ModelSpec(family=Family.ISING), "pl", [0.8]),
    (ModelSpec(family=Family.REFLECTING_WALK, k_states=5), "ml", [0.4]),
    (ModelSpec(family=Family.SATURATED, n_states=3), "ml", [0.5, 0.3, 0.2, 0.2, 0.3, 0.3]),
]


def fit_counts(model, method, counts, **options):
    objective = Objective.from_counts(model, MethodSpec.parse(method), counts)
    return fit(objective, FitOptions(**options))


class TestFit:
    """Test the multistart quasi-Newton fit."""

    def test_symmetric_ml(self):
        counts = simulated_counts(SymmetricTwoState(), [0.3], 500, 2, seed=1)
        N = counts.pairs()
        result = fit_counts(SymmetricTwoState(), "ml", counts)

        assert result.converged
        assert result.theta_hat[0] == pytest.approx((N[0, 1] + N[1, 0]) / N.sum(), abs=1e-8)
        assert result.theta_names == ("theta",)

    def test_symmetric_pl(self):
        counts = simulated_counts(SymmetricTwoState(), [0.3], 500, 3, seed=2)
        N = counts.leading(3)
        rho = (N[0, 1, 0] + N[1, 0, 1]) / (N[0, :, 0].sum() + N[1, :, 1].sum())
        expected = np.sqrt(rho) / (np.sqrt(rho) + np.sqrt(1 - rho))
        result = fit_counts(SymmetricTwoState(), "pl", counts)
        assert result.theta_hat[0] == pytest.approx(expected, abs=1e-8)

    def test_pushkin_counts(self):
        counts = TupleCounts.from_array(PUSHKIN, StateSpace(2, ("V", "C")))
        result = fit_counts(GeneralTwoState(), "ml", counts)
        alpha, beta = result.theta_hat

        assert 1 - alpha == pytest.approx(0.128, abs=5e-4)
        assert beta == pytest.approx(0.663, abs=5e-4)
        assert result.n_effective == 20000

    def test_kimura4_ml_and_ql_near_truth(self):
        counts = simulated_counts(Kimura4(), KIMURA_THETA, 20000, 2, seed=3)
        for method in ("ml", "ql2"):
            result = fit_counts(Kimura4(), method, counts)
            assert result.converged
            np.testing.assert_allclose(result.theta_hat, KIMURA_THETA, atol=0.02)

    def test_loglik_not_below_any_start(self):
        counts = simulated_counts(Kimura4(), KIMURA_THETA, 3000, 3, seed=4)
        result = fit_counts(Kimura4(), "pl", counts)
        assert all(result.loglik_at_max >= value - 1e-8 for value in result.start_values)

    def test_explicit_start_points(self):
        counts = simulated_counts(GeneralTwoState(), [0.3, 0.6], 800, 2, seed=5)
        default = fit_counts(GeneralTwoState(), "ml", counts)
        starts = [[0.5, 0.5], [0.1, 0.9]]
        explicit = fit_counts(GeneralTwoState(), "ml", counts, start_points=starts)

        assert explicit.n_starts_used == 2
        np.testing.assert_allclose(explicit.theta_hat, default.theta_hat, atol=1e-8)

    def test_deterministic(self):
        counts = simulated_counts(Kimura4(), KIMURA_THETA, 2000, 3, seed=6)
        first = fit_counts(Kimura4(), "pl", counts)
        second = fit_counts(Kimura4(), "pl", counts)
        np.testing.assert_array_equal(first.theta_hat, second.theta_hat)
        assert first.best_start_index == second.best_start_index

    def test_unvisited_state_is_degenerate(self):
        """beta is identified only by leaving the second state, which never happens."""
        counts = TupleCounts.from_array([[30.0, 0.0], [0.0, 0.0]])
        with pytest.raises(DataDegenerate):
            fit_counts(GeneralTwoState(), "ml", counts)

    def test_as_dict_is_flat(self):
        counts = simulated_counts(GeneralTwoState(), [0.3, 0.6], 400, 2, seed=7)
        doc = fit_counts(GeneralTwoState(), "ml", counts).as_dict()
        assert doc["method"] == "ml"
        assert set(doc) >= {"loglik", "gradient_norm", "converged", "theta.alpha", "theta.beta"}


class TestClosedForm:
    """Test closed-form estimators and their agreement with the numerical fit."""

    @pytest.mark.slow
    @pytest.mark.parametrize("spec, method, theta", CLOSED_FORM_CASES)
    def test_agree_with_fit(self, spec, method, theta):
        model = make_model(spec)
        method_spec = MethodSpec.parse(method)
        for rep in range(50):
            counts = simulated_counts(model, theta, 500, method_spec.required_order, seed=rep)
            closed = closed_form_fit(spec, method_spec, counts)
            numeric = fit(Objective.from_counts(model, method_spec, counts))
            np.testing.assert_allclose(numeric.theta_hat, closed.theta_hat, atol=1e-6)

    @pytest.mark.parametrize("spec, method, theta", CLOSED_FORM_CASES)
    def test_agree_with_fit_once(self, spec, method, theta):
        model = make_model(spec)
        method_spec = MethodSpec.parse(method)
        counts = simulated_counts(model, theta, 1000, method_spec.required_order, seed=99)
        closed = closed_form_fit(spec, method_spec, counts)
        numeric = fit(Objective.from_counts(model, method_spec, counts))
        np.testing.assert_allclose(numeric.theta_hat, closed.theta_hat, atol=1e-6)

    def test_ising_ml_formula(self):
        counts = simulated_counts(Ising(), [0.8], 600, 2, seed=10)
        N = counts.pairs()
        closed = closed_form_fit(ModelSpec(family=Family.ISING), MethodSpec.ml(), counts)
        expected = np.log((N[0, 0] + N[1, 1]) / (N[0, 1] + N[1, 0]))
        assert closed.theta_hat[0] == pytest.approx(expected)

    def test_reflecting_walk_formula(self):
        counts = simulated_counts(ReflectingWalk(6), [0.35], 600, 2, seed=11)
        N = counts.pairs()
        up = sum(N[i, i + 1] for i in range(1, 5))
        down = sum(N[i, i - 1] for i in range(1, 5))
        spec = ModelSpec(family=Family.REFLECTING_WALK, k_states=6)
        closed = closed_form_fit(spec, MethodSpec.ml(), counts)
        assert closed.theta_hat[0] == pytest.approx(up / (up + down))

    def test_saturated_is_row_normalised(self):
        model = Saturated(StateSpace.integers(3))
        counts = simulated_counts(model, [0.5, 0.3, 0.2, 0.2, 0.3, 0.3], 700, 2, seed=12)
        spec = ModelSpec(family=Family.SATURATED, n_states=3)
        closed = closed_form_fit(spec, MethodSpec.ml(), counts)
        P_hat = make_model(spec).transition(closed.theta_hat).p
        N = counts.pairs()
        np.testing.assert_allclose(P_hat, N / N.sum(axis=1, keepdims=True), atol=1e-12)

    def test_no_closed_form(self):
        spec = ModelSpec(family=Family.KIMURA4)
        assert not has_closed_form(spec, MethodSpec.ml())
        assert not has_closed_form(ModelSpec(family=Family.ISING), MethodSpec.pl(2))
        counts = TupleCounts.from_array(np.ones((4, 4)))
        with pytest.raises(NoClosedForm):
            closed_form_fit(spec, MethodSpec.ml(), counts)
