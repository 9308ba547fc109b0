"""Unit tests for least-false parameters under a perturbed six-parameter truth."""
import numpy as np
import pytest

from src.likelihood import MethodSpec
from src.misspec import (
    DEFAULT_BASE,
    TrueMechanism,
    default_eps_grid,
    eps_sweep,
    kimura6_truth,
    kl_distance,
    least_false,
    limit_functional,
    pl_triple_sum_form,
    pl_two_step_form,
)
from src.models import GeneralTwoState, Kimura4, ReflectingWalk, ThreeState
from src.utils.errors import InvalidSpec, NoClosedForm

from .conftest import random_thetas

METHODS = [MethodSpec.ml(), MethodSpec.ql(2), MethodSpec.ql(4), MethodSpec.pl(1)]


def sweep_by_method(rows):
    out: dict[tuple[float, str], np.ndarray] = {}
    for row in rows:
        out[(row.eps, row.method)] = np.array(row.theta)
    return out


class TestLimitFunctionals:
    """Test the population objectives and their distances."""

    def test_pl_forms_agree(self):
        truth = kimura6_truth(0.04)
        model = Kimura4()
        for theta in random_thetas(model, 10, seed=61):
            triple = pl_triple_sum_form(model, truth, theta)
            two_step = pl_two_step_form(model, truth, theta)
            assert triple == pytest.approx(two_step, rel=1e-10)
            assert limit_functional(MethodSpec.pl(1), model, truth, theta) == pytest.approx(
                triple, rel=1e-10
            )

    @pytest.mark.parametrize("method", METHODS, ids=lambda m: m.label)
    def test_kl_is_drop_from_truth(self, method):
        """With the truth inside the model, the distance is H(theta_0) - H(theta)."""
        model = GeneralTwoState()
        theta_0 = np.array([0.3, 0.6])
        truth = TrueMechanism.from_matrix(model.transition(theta_0))
        top = limit_functional(method, model, truth, theta_0)

        assert kl_distance(method, model, truth, theta_0) == pytest.approx(0.0, abs=1e-14)
        for theta in random_thetas(model, 10, seed=62):
            drop = top - limit_functional(method, model, truth, theta)
            kl = kl_distance(method, model, truth, theta)
            assert kl >= 0.0
            assert kl == pytest.approx(drop, rel=1e-9, abs=1e-12)

    def test_nested_truth_is_recovered(self):
        model = ThreeState()
        theta_0 = [0.21, 0.55]
        truth = TrueMechanism.from_matrix(model.transition(theta_0))
        for method in METHODS:
            result = least_false(method, model, truth)
            np.testing.assert_allclose(result.theta_0, theta_0, atol=1e-6)
            assert result.kl_at_min == pytest.approx(0.0, abs=1e-10)

    def test_result_document(self):
        model = GeneralTwoState()
        truth = TrueMechanism.from_matrix(model.transition([0.3, 0.6]))
        doc = least_false(MethodSpec.ml(), model, truth).as_dict()
        assert set(doc) == {"method", "H", "kl", "converged", "theta.alpha", "theta.beta"}

    @pytest.mark.parametrize("method", METHODS, ids=lambda m: m.label)
    def test_truth_outside_model_support(self, method):
        """A positive truth puts weight on the walk's structural zeros."""
        P = np.full((3, 3), 0.2) + 0.4 * np.eye(3)
        truth = TrueMechanism.from_matrix(P)
        model = ReflectingWalk(3)
        assert limit_functional(method, model, truth, [0.5]) == -np.inf
        assert kl_distance(method, model, truth, [0.5]) == np.inf

    def test_size_mismatch(self):
        with pytest.raises(InvalidSpec):
            limit_functional(MethodSpec.ml(), GeneralTwoState(), kimura6_truth(0.0), [0.3, 0.6])

    def test_higher_order_pl_is_not_supported(self):
        with pytest.raises(NoClosedForm):
            limit_functional(MethodSpec.pl(2), Kimura4(), kimura6_truth(0.0), DEFAULT_BASE)


class TestEpsSweep:
    """Test the perturbed-Kimura sweep."""

    def test_default_grid(self):
        grid = default_eps_grid()
        assert len(grid) == 41
        assert grid[0] == -0.1 and grid[-1] == 0.1
        assert 0.0 in grid

    def test_unperturbed_truth_gives_base_values(self):
        rows = eps_sweep(Kimura4(), [0.0])
        assert [row.method for row in rows] == ["ml", "ql2", "pl"]
        for row in rows:
            assert row.converged and not row.error
            np.testing.assert_allclose(row.theta, DEFAULT_BASE, atol=1e-6)

    def test_pl_drifts_further_than_ql(self):
        rows = sweep_by_method(eps_sweep(Kimura4(), [-0.05, 0.05]))
        for eps in (-0.05, 0.05):
            ml, ql, pl = (rows[(eps, label)] for label in ("ml", "ql2", "pl"))
            ql_gap = np.abs(ql - ml).max()
            assert ql_gap < 0.002
            assert np.abs(pl - ml).max() > 5 * ql_gap

    def test_least_false_values_move_continuously(self):
        grid = [0.0, 0.005, 0.01, 0.015]
        rows = sweep_by_method(eps_sweep(Kimura4(), grid))
        for label in ("ml", "ql2", "pl"):
            path = np.array([rows[(eps, label)] for eps in grid])
            assert np.abs(np.diff(path, axis=0)).max() < 0.01

    def test_rows_flatten_with_names(self):
        (row,) = eps_sweep(Kimura4(), [0.01], methods=[MethodSpec.ml()])
        doc = row.as_dict(Kimura4().theta_names)
        assert list(doc) == [
            "eps",
            "method",
            "alpha",
            "beta",
            "gamma",
            "delta",
            "H",
            "kl",
            "converged",
            "error",
        ]
        assert doc["kl"] > 0.0

    def test_eps_outside_range(self):
        with pytest.raises(InvalidSpec):
            eps_sweep(Kimura4(), [0.2])
