"""Unit tests for parametric models: construction, scores and equilibria."""
import numpy as np
import pytest

from src.chain import (
    StateSpace,
    TransitionMatrix,
    fundamental_matrix,
    stationary_distribution,
)
from src.models import (
    CallableModel,
    Domain,
    Family,
    GeneralTwoState,
    Kimura4,
    Kimura6,
    ModelSpec,
    ReflectingWalk,
    kimura_equilibrium,
    make_model,
    state_count,
    stationary_scores,
    transition_and_scores,
)
from src.models.transforms import Logit
from src.utils import numdiff
from src.utils.errors import InvalidSpec, OutOfDomain

from .conftest import KIMURA_THETA, random_thetas


def safe_log(P: np.ndarray) -> np.ndarray:
    return np.log(np.where(P > 0.0, P, 1.0))


class TestMakeModel:
    """Test the model factory and family parameterisations."""

    def test_kimura4_at_typical_values(self):
        model = make_model(ModelSpec(family=Family.KIMURA4))
        P = model.transition(KIMURA_THETA).p

        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-15)
        assert model.states.labels == ("A", "G", "C", "T")
        assert model.theta_names == ("alpha", "beta", "gamma", "delta")
        assert model.domain_violations(np.array(KIMURA_THETA)) == []

    def test_ising_uniform_at_zero(self):
        model = make_model(ModelSpec(family=Family.ISING))
        np.testing.assert_allclose(model.transition([0.0]).p, 0.5)

    def test_reflecting_walk_equilibrium_matches_linear_solve(self):
        model = make_model(ModelSpec(family=Family.REFLECTING_WALK, k_states=6))
        closed = model.stationary([0.5])
        solved = stationary_distribution(model.transition([0.5])).pi
        np.testing.assert_allclose(closed, solved, atol=1e-12)

    @pytest.mark.parametrize("p", [0.1, 0.3, 0.7, 0.9])
    def test_reflecting_walk_equilibrium_other_p(self, p):
        model = ReflectingWalk(7)
        solved = stationary_distribution(model.transition([p])).pi
        np.testing.assert_allclose(model.stationary([p]), solved, atol=1e-12)

    def test_equicorrelation_known_p(self):
        model = make_model(ModelSpec(family=Family.EQUICORRELATION, p_known=[0.3, 0.6, 0.1]))
        assert model.theta_names == ("rho",)
        np.testing.assert_allclose(model.stationary([0.5]), [0.3, 0.6, 0.1])

    def test_equicorrelation_unknown_p(self):
        model = make_model(ModelSpec(family=Family.EQUICORRELATION, n_states=3))
        assert model.theta_names == ("rho", "p_1", "p_2")
        np.testing.assert_allclose(model.stationary([0.5, 0.3, 0.6]), [0.3, 0.6, 0.1])

    def test_state_counts(self):
        assert state_count(ModelSpec(family=Family.KIMURA6)) == 4
        assert state_count(ModelSpec(family=Family.SATURATED, n_states=5)) == 5
        assert state_count(ModelSpec(family=Family.REFLECTING_WALK, k_states=10)) == 10

    def test_labels_are_applied(self):
        model = make_model(ModelSpec(family=Family.GENERAL_TWO_STATE, labels=["V", "C"]))
        assert model.states.labels == ("V", "C")

    @pytest.mark.parametrize(
        "spec",
        [
            ModelSpec(family=Family.REFLECTING_WALK),
            ModelSpec(family=Family.SATURATED),
            ModelSpec(family=Family.KIMURA4, p_known=[0.5, 0.5]),
            ModelSpec(family=Family.ISING, k_states=4),
            ModelSpec(family=Family.EQUICORRELATION, p_known=[0.5, 0.5, 0.0]),
        ],
    )
    def test_invalid_specs(self, spec):
        with pytest.raises(InvalidSpec):
            make_model(spec)

    def test_out_of_domain(self):
        model = Kimura4()
        with pytest.raises(OutOfDomain):
            model.check([0.3, 0.04, 0.5, 0.1])
        with pytest.raises(OutOfDomain):
            model.check([0.03, 0.04])

    def test_kimura6_nests_kimura4(self):
        a, b, g, d = KIMURA_THETA
        six = Kimura6().transition([a, b, g, d, g, d]).p
        np.testing.assert_array_equal(six, Kimura4().transition(KIMURA_THETA).p)

    def test_kimura_equilibrium_matches_linear_solve(self):
        model = Kimura4()
        for theta in random_thetas(model, 20, seed=3):
            solved = stationary_distribution(model.transition(theta)).pi
            np.testing.assert_allclose(kimura_equilibrium(*theta), solved, atol=1e-12)

    def test_transforms_land_in_domain(self, zoo_model):
        for theta in random_thetas(zoo_model, 10, seed=5):
            assert zoo_model.domain_violations(theta) == []

    def test_reflecting_walk_structural_zeros(self):
        model = ReflectingWalk(5)
        zeros = model.structural_zeros
        assert zeros[0, 2] and zeros[2, 2] and not zeros[2, 3]


class TestCellScores:
    """Test u = d log p / d theta and i = d2 log p / d theta2."""

    def test_symmetric_two_state_values(self, zoo):
        theta = 0.3
        cells = transition_and_scores(zoo["symmetric_two_state"], [theta])
        assert cells.u[0, 0, 0] == pytest.approx(-1 / (1 - theta))
        assert cells.u[0, 1, 0] == pytest.approx(1 / theta)

    def test_general_two_state_values(self):
        alpha, beta = 0.3, 0.6
        u = GeneralTwoState().log_derivatives([alpha, beta]).u
        np.testing.assert_allclose(u[0, 0], [-1 / (1 - alpha), 0.0])
        np.testing.assert_allclose(u[0, 1], [1 / alpha, 0.0])
        np.testing.assert_allclose(u[1, 0], [0.0, 1 / beta])
        np.testing.assert_allclose(u[1, 1], [0.0, -1 / (1 - beta)])

    def test_rows_of_weighted_scores_vanish(self, zoo_model):
        for theta in random_thetas(zoo_model, 20, seed=1):
            cells = zoo_model.log_derivatives(theta)
            weighted = np.einsum("ab,abj->aj", cells.P.p, cells.u)
            np.testing.assert_allclose(weighted, 0.0, atol=1e-8)

    def test_scores_match_finite_differences(self, zoo_model):
        for theta in random_thetas(zoo_model, 20, seed=2):
            cells = zoo_model.log_derivatives(theta)
            numeric = numdiff.jacobian(lambda t: safe_log(zoo_model.transition(t).p), theta)
            numeric[cells.P.p <= 0.0] = 0.0
            np.testing.assert_allclose(cells.u, numeric, rtol=1e-5, atol=1e-6)

    def test_second_derivatives_match_finite_differences(self, zoo_model):
        for theta in random_thetas(zoo_model, 5, seed=4):
            cells = zoo_model.log_derivatives(theta)
            numeric = numdiff.jacobian(lambda t: zoo_model.log_derivatives(t).u, theta)
            np.testing.assert_allclose(cells.i, numeric, rtol=1e-5, atol=1e-5)

    def test_row_information_identity(self, zoo_model):
        """J_a = sum_b p u u^T equals -sum_b p i."""
        for theta in random_thetas(zoo_model, 20, seed=6):
            cells = zoo_model.log_derivatives(theta)
            P = cells.P.p
            outer = np.einsum("ab,abj,abk->ajk", P, cells.u, cells.u)
            curvature = -np.einsum("ab,abjk->ajk", P, cells.i)
            np.testing.assert_allclose(outer, curvature, atol=1e-8 * max(1.0, np.abs(outer).max()))

    def test_callable_model_matches_analytic(self):
        analytic = GeneralTwoState()
        numeric = CallableModel(
            lambda t: np.array([[1 - t[0], t[0]], [t[1], 1 - t[1]]]),
            StateSpace.integers(2),
            ("alpha", "beta"),
            Domain.box([0.0, 0.0], [1.0, 1.0]),
            Logit([0.0, 0.0], [1.0, 1.0]),
        )
        assert not numeric.has_analytic_derivatives()
        theta = [0.25, 0.55]
        np.testing.assert_allclose(
            numeric.log_derivatives(theta).u, analytic.log_derivatives(theta).u, rtol=1e-7
        )
        np.testing.assert_allclose(
            numeric.stationary_scores(theta).v, analytic.stationary_scores(theta).v, rtol=1e-6
        )


class TestStationaryScores:
    """Test v_a = d log p_a / d theta."""

    def test_zero_when_equilibrium_is_fixed(self, zoo):
        for name, theta in [
            ("equicorrelation_known", [0.4]),
            ("symmetric_two_state", [0.2]),
            ("ising", [1.3]),
        ]:
            np.testing.assert_array_equal(stationary_scores(zoo[name], theta).v, 0.0)

    def test_general_two_state_display(self):
        alpha, beta = 0.3, 0.6
        v = GeneralTwoState().stationary_scores([alpha, beta]).v
        w = np.ones(2) / (alpha + beta)
        np.testing.assert_allclose(v[0], np.array([0.0, 1 / beta]) - w)
        np.testing.assert_allclose(v[1], np.array([1 / alpha, 0.0]) - w)

    def test_weighted_sum_vanishes(self, zoo_model):
        for theta in random_thetas(zoo_model, 20, seed=7):
            scores = zoo_model.stationary_scores(theta)
            assert scores.check(zoo_model.stationary(theta))

    @pytest.mark.parametrize(
        "model, theta",
        [
            (make_model(ModelSpec(family=Family.THREE_STATE)), [0.21, 0.55]),
            (ReflectingWalk(6), [0.3]),
            (Kimura4(), KIMURA_THETA),
        ],
        ids=["three_state", "reflecting_walk", "kimura4"],
    )
    def test_closed_form_stationary_solves_balance(self, model, theta):
        pi = model.closed_form_stationary(theta)
        P = model.transition(theta).p
        np.testing.assert_allclose(pi @ P, pi, atol=1e-12)
        assert pi.sum() == pytest.approx(1.0)

    def test_closed_form_stationary_absent(self):
        assert Kimura6().closed_form_stationary([0.03, 0.04, 0.13, 0.14, 0.1, 0.1]) is None

    def test_match_finite_differences(self, zoo_model):
        def log_pi(t):
            return np.log(stationary_distribution(zoo_model.transition(t)).pi)

        for theta in random_thetas(zoo_model, 20, seed=8):
            v = zoo_model.stationary_scores(theta).v
            np.testing.assert_allclose(v, numdiff.jacobian(log_pi, theta), rtol=1e-5, atol=1e-6)

    def test_perturbation_identity_matches_closed_form(self):
        """Kimura4 v from d pi = pi dP Z agrees with the differentiated equilibrium."""
        model = Kimura4()
        P = TransitionMatrix(model.states, model.transition(KIMURA_THETA).p)
        closed = model.stationary_scores(KIMURA_THETA).v

        pi = stationary_distribution(P).pi
        dpi = np.einsum(
            "a,abj,bc->cj", pi, model.transition_jacobian(KIMURA_THETA), fundamental_matrix(P)
        )
        np.testing.assert_allclose(dpi / pi[:, None], closed, rtol=1e-9, atol=1e-9)
