"""Unit tests for the ML, PL and QL objectives and their gradients."""
import numpy as np
import pytest

from src.chain import ChainPath, StateSpace, TupleCounts, count_tuples
from src.likelihood import (
    MethodKind,
    MethodSpec,
    Objective,
    gradient,
    loglik_ml,
    loglik_pl,
    loglik_ql,
    pl_penalty,
    ql_penalty,
)
from src.models import GeneralTwoState, Kimura4, ReflectingWalk, SymmetricTwoState
from src.utils import numdiff
from src.utils.errors import InvalidSpec, OrderMismatch, ZeroProbabilityWithPositiveCount

from .conftest import KIMURA_THETA, random_thetas, simulated_counts


@pytest.fixture
def two_state_counts():
    return simulated_counts(GeneralTwoState(), [0.3, 0.6], 400, 4, seed=21)


@pytest.fixture
def kimura_counts():
    return simulated_counts(Kimura4(), KIMURA_THETA, 2000, 3, seed=8)


class TestMethodSpec:
    """Test method labels and parsing."""

    @pytest.mark.parametrize(
        "text, kind, order, label",
        [
            ("ml", MethodKind.ML, 0, "ml"),
            ("pl", MethodKind.PL, 1, "pl"),
            ("PL2", MethodKind.PL, 2, "pl2"),
            ("ql", MethodKind.QL, 2, "ql2"),
            ("ql10", MethodKind.QL, 10, "ql10"),
        ],
    )
    def test_parse(self, text, kind, order, label):
        method = MethodSpec.parse(text)
        assert (method.kind, method.order, method.label) == (kind, order, label)

    @pytest.mark.parametrize("text", ["ml2", "ql1", "pl0", "xl", ""])
    def test_parse_rejects(self, text):
        with pytest.raises(InvalidSpec):
            MethodSpec.parse(text)

    def test_required_orders(self):
        assert MethodSpec.ml().required_order == 2
        assert MethodSpec.ql(5).required_order == 2
        assert MethodSpec.pl(1).required_order == 3
        assert MethodSpec.pl(3).required_order == 5


class TestValues:
    """Test objective values against their printed closed forms."""

    def test_symmetric_ml(self, two_state_counts):
        theta = 0.35
        N = two_state_counts.pairs()
        expected = (N[0, 1] + N[1, 0]) * np.log(theta) + (N[0, 0] + N[1, 1]) * np.log(1 - theta)
        value = loglik_ml(SymmetricTwoState(), [theta], two_state_counts)
        assert value == pytest.approx(expected, rel=1e-12)

    def test_zero_counts(self):
        counts = TupleCounts.from_array(np.zeros((2, 2)))
        assert loglik_ml(SymmetricTwoState(), [0.4], counts) == 0.0

    def test_symmetric_pl(self, two_state_counts):
        theta = 0.35
        N = two_state_counts.leading(3)
        norm = theta**2 + (1 - theta) ** 2
        expected = (N[0, 1, 0] + N[1, 0, 1]) * np.log(theta**2 / norm) + (
            N[0, 0, 0] + N[1, 1, 1]
        ) * np.log((1 - theta) ** 2 / norm)
        value = loglik_pl(SymmetricTwoState(), [theta], two_state_counts)
        assert value == pytest.approx(expected, rel=1e-10)

    def test_pl_on_iid_rows_is_middle_symbol_likelihood(self):
        """Equal rows make each middle symbol independent of its neighbours."""
        alpha = 0.3
        model = GeneralTwoState()
        path = ChainPath(StateSpace.integers(2), np.array([0, 1, 1, 0, 1, 0]))
        p = np.array([1 - alpha, alpha])
        expected = sum(np.log(p[s]) for s in path.x[1:-1])
        value = loglik_pl(model, [alpha, 1 - alpha], count_tuples(path, 3))
        assert value == pytest.approx(expected, rel=1e-12)

    def test_ql_two_state_display(self, two_state_counts):
        alpha, beta = 0.25, 0.5
        N = two_state_counts.pairs()
        n = N.sum()
        expected = (
            N[0].sum() * np.log(beta)
            + N[1].sum() * np.log(alpha)
            - n * np.log(alpha + beta)
            + loglik_ml(GeneralTwoState(), [alpha, beta], two_state_counts)
        )
        value = loglik_ql(GeneralTwoState(), [alpha, beta], two_state_counts)
        assert value == pytest.approx(expected, rel=1e-10)

    def test_kimura_grouped_ml(self, kimura_counts):
        a, b, g, d = KIMURA_THETA
        N = kimura_counts.pairs()
        A, G, C, T = range(4)
        transversions_from_purines = N[A, C] + N[A, T] + N[G, C] + N[G, T]
        transversions_from_pyrimidines = N[C, A] + N[C, G] + N[T, A] + N[T, G]
        expected = (
            transversions_from_purines * np.log(a)
            + transversions_from_pyrimidines * np.log(b)
            + (N[A, G] + N[C, T]) * np.log(g)
            + (N[G, A] + N[T, C]) * np.log(d)
            + N[A, A] * np.log(1 - 2 * a - g)
            + N[G, G] * np.log(1 - 2 * a - d)
            + N[C, C] * np.log(1 - 2 * b - g)
            + N[T, T] * np.log(1 - 2 * b - d)
        )
        assert loglik_ml(Kimura4(), KIMURA_THETA, kimura_counts) == pytest.approx(
            expected, abs=1e-10 * abs(expected)
        )

    def test_ql_penalised_identity(self, kimura_counts):
        for k in (2, 3, 7):
            value = loglik_ql(Kimura4(), KIMURA_THETA, kimura_counts, k)
            ml = loglik_ml(Kimura4(), KIMURA_THETA, kimura_counts)
            penalty = ql_penalty(Kimura4(), KIMURA_THETA, kimura_counts)
            assert value == pytest.approx((k - 1) * ml + penalty, rel=1e-12)

    def test_pl_penalised_identity(self, kimura_counts):
        model = Kimura4()
        P = model.transition(KIMURA_THETA).p
        N = kimura_counts.leading(3)
        logP = np.log(P)
        expected = np.sum((N.sum(axis=2) + N.sum(axis=0)) * logP) - np.sum(
            N.sum(axis=1) * np.log(P @ P)
        )
        assert loglik_pl(model, KIMURA_THETA, kimura_counts) == pytest.approx(expected, rel=1e-10)
        assert pl_penalty(model, KIMURA_THETA, kimura_counts) == pytest.approx(
            np.sum(N.sum(axis=1) * np.log(P @ P)), rel=1e-12
        )

    def test_relabelling_invariance(self, two_state_counts):
        """Swapping both the states and the roles of alpha and beta leaves every objective fixed."""
        swapped = TupleCounts.from_array(two_state_counts.counts[::-1, ::-1, ::-1, ::-1])
        model = GeneralTwoState()
        for method in ("ml", "ql2", "pl", "pl2"):
            spec = MethodSpec.parse(method)
            original = Objective.from_counts(model, spec, two_state_counts).value([0.2, 0.7])
            relabelled = Objective.from_counts(model, spec, swapped).value([0.7, 0.2])
            assert original == pytest.approx(relabelled, rel=1e-12)


class TestErrors:
    """Test order and support checks."""

    def test_pl_needs_triples(self):
        counts = TupleCounts.from_array(np.ones((2, 2)))
        with pytest.raises(OrderMismatch):
            loglik_pl(SymmetricTwoState(), [0.3], counts)

    def test_size_mismatch(self, two_state_counts):
        with pytest.raises(OrderMismatch):
            loglik_ml(Kimura4(), KIMURA_THETA, two_state_counts)

    def test_structural_zero_with_count(self):
        N = np.zeros((4, 4))
        N[0, 1] = N[1, 2] = N[2, 1] = N[1, 0] = 5
        N[0, 2] = 1
        counts = TupleCounts.from_array(N)
        model = ReflectingWalk(4)
        with pytest.raises(ZeroProbabilityWithPositiveCount):
            loglik_ml(model, [0.5], counts)
        assert loglik_ml(model, [0.5], counts, strict=False) == -np.inf

    @pytest.mark.parametrize(
        "loglik, extra",
        [(loglik_ml, ()), (loglik_ql, (2,)), (loglik_ql, (4,)), (loglik_pl, (1,))],
        ids=["ml", "ql2", "ql4", "pl"],
    )
    def test_forbidden_cells_give_minus_infinity(self, loglik, extra):
        """Every triple observed, so the walk's zero cells carry counts."""
        counts = TupleCounts.from_array(np.full((3, 3, 3), 5.0))
        model = ReflectingWalk(3)
        with pytest.raises(ZeroProbabilityWithPositiveCount):
            loglik(model, [0.5], counts, *extra)
        assert loglik(model, [0.5], counts, *extra, strict=False) == -np.inf


class TestGradients:
    """Test analytic gradients against central differences."""

    @pytest.mark.parametrize("method", ["ml", "ql2", "ql4", "pl", "pl2"])
    def test_match_finite_differences(self, zoo_model, method):
        spec = MethodSpec.parse(method)
        for i, theta in enumerate(random_thetas(zoo_model, 3, seed=11)):
            counts = simulated_counts(zoo_model, theta, 300, 4, seed=100 + i)
            objective = Objective.from_counts(zoo_model, spec, counts, strict=False)
            if not np.isfinite(objective.value(theta)):
                continue
            analytic = gradient(objective, theta)
            numeric = numdiff.gradient(objective.value, theta)
            scale = max(1.0, float(np.abs(numeric).max()))
            np.testing.assert_allclose(analytic, numeric, atol=1e-6 * scale)

    def test_symmetric_ml_stationary_point(self, two_state_counts):
        N = two_state_counts.pairs()
        theta_hat = (N[0, 1] + N[1, 0]) / N.sum()
        objective = Objective.from_counts(SymmetricTwoState(), MethodSpec.ml(), two_state_counts)
        assert abs(objective.scaled_gradient([theta_hat])[0]) < 1e-12

    def test_kimura_ql_gradient(self):
        model = Kimura4()
        for i, theta in enumerate(random_thetas(model, 10, seed=12)):
            counts = simulated_counts(model, theta, 500, 2, seed=200 + i)
            objective = Objective.from_counts(model, MethodSpec.ql(2), counts)
            numeric = numdiff.gradient(objective.value, theta)
            np.testing.assert_allclose(
                objective.gradient(theta), numeric, rtol=1e-6, atol=1e-6 * np.abs(numeric).max()
            )
