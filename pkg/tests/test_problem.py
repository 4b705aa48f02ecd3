import numpy as np
import pytest

from l0screen import (
    ConstraintViolationError,
    Instance,
    InvalidInputError,
    ProblemSpec,
    Variant,
    delta_vector,
    objective_card,
    objective_reg,
    ridge_restricted_solve,
)

from ._oracles import ridge_ls
from .conftest import random_instance


class TestInstance:
    def test_shapes(self, tiny):
        assert tiny.m == 2 and tiny.n == 2

    def test_copies_and_freezes(self):
        a = np.eye(2)
        y = np.array([3.0, 0.1])
        inst = Instance(a, y)
        a[0, 0] = 99.0
        assert inst.a[0, 0] == 1.0
        with pytest.raises(ValueError):
            inst.a[0, 0] = 5.0

    @pytest.mark.parametrize(
        "a, y",
        [
            (np.eye(2), np.zeros(3)),
            (np.zeros((2, 2, 2)), np.zeros(2)),
            (np.array([[np.nan, 0.0], [0.0, 1.0]]), np.zeros(2)),
            (np.eye(2), np.array([np.inf, 0.0])),
            (np.zeros((0, 2)), np.zeros(0)),
        ],
    )
    def test_rejects_bad_input(self, a, y):
        with pytest.raises(InvalidInputError):
            Instance(a, y)


class TestProblemSpec:
    def test_reg(self):
        spec = ProblemSpec.reg(2.0, 0.5)
        assert spec.variant is Variant.REG
        assert spec.mu == 0.5 and spec.k is None

    def test_card(self):
        spec = ProblemSpec.card(2.0, 3)
        assert spec.variant is Variant.CARD
        assert spec.k == 3 and spec.mu is None

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(variant="reg", gamma=1.0),
            dict(variant="reg", gamma=1.0, mu=-1.0),
            dict(variant="reg", gamma=1.0, mu=1.0, k=2),
            dict(variant="card", gamma=1.0),
            dict(variant="card", gamma=1.0, k=0),
            dict(variant="card", gamma=1.0, k=2, mu=1.0),
            dict(variant="card", gamma=0.0, k=2),
            dict(variant="reg", gamma=-3.0, mu=1.0),
        ],
    )
    def test_rejects_bad_spec(self, kwargs):
        with pytest.raises(InvalidInputError):
            ProblemSpec(**kwargs)


class TestObjectives:
    def test_reg_worked_example(self, tiny):
        spec = ProblemSpec.reg(1.0, 1.0)
        x = np.array([1.5, 0.0])
        assert objective_reg(tiny, spec, [0], x) == pytest.approx(5.51, abs=1e-12)

    def test_reg_empty_support(self, tiny):
        spec = ProblemSpec.reg(1.0, 1.0)
        val = objective_reg(tiny, spec, [], np.zeros(2))
        assert val == pytest.approx(9.01, abs=1e-12)

    def test_reg_two_coordinates(self, tiny):
        spec = ProblemSpec.reg(1.0, 1.0)
        x = np.array([1.5, 0.05])
        assert objective_reg(tiny, spec, [0, 1], x) == pytest.approx(6.505, abs=1e-12)

    def test_card_worked_example(self, tiny):
        spec = ProblemSpec.card(1.0, 1)
        x = np.array([1.5, 0.0])
        assert objective_card(tiny, spec, [0], x) == pytest.approx(4.51, abs=1e-12)

    def test_card_empty(self, tiny):
        spec = ProblemSpec.card(1.0, 1)
        assert objective_card(tiny, spec, [], np.zeros(2)) == pytest.approx(9.01, abs=1e-12)

    def test_card_second_coordinate(self, tiny):
        # (0.1-0.05)^2 + 3^2 residual plus 0.05^2/gamma
        spec = ProblemSpec.card(1.0, 1)
        x = np.array([0.0, 0.05])
        assert objective_card(tiny, spec, [1], x) == pytest.approx(9.005, abs=1e-12)

    def test_card_over_budget(self, tiny):
        spec = ProblemSpec.card(1.0, 1)
        with pytest.raises(ConstraintViolationError):
            objective_card(tiny, spec, [0, 1], np.array([1.5, 0.05]))

    def test_nonzero_off_support_rejected(self, tiny):
        spec = ProblemSpec.reg(1.0, 1.0)
        with pytest.raises(InvalidInputError):
            objective_reg(tiny, spec, [0], np.array([1.5, 0.2]))


class TestRidgeRestricted:
    def test_single_coordinate(self, tiny):
        x, val = ridge_restricted_solve(tiny, 1.0, [0])
        assert x[0] == pytest.approx(1.5, abs=1e-12)
        assert x[1] == 0.0
        assert val == pytest.approx(4.51, abs=1e-12)

    def test_both_coordinates(self, tiny):
        x, val = ridge_restricted_solve(tiny, 1.0, [0, 1])
        np.testing.assert_allclose(x, [1.5, 0.05], atol=1e-12)
        assert val == pytest.approx(4.505, abs=1e-12)

    def test_large_gamma_limit(self):
        # orthonormal columns: the ridge term vanishes and x -> A_S'y
        rng = np.random.default_rng(5)
        q, _ = np.linalg.qr(rng.standard_normal((10, 3)))
        y = rng.standard_normal(10)
        inst = Instance(q, y)
        x, _ = ridge_restricted_solve(inst, 1e8, [0, 1, 2])
        np.testing.assert_allclose(x[:3], q.T @ y, atol=1e-6)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_stacked_least_squares(self, seed):
        inst = random_instance(seed, 12, 8)
        rng = np.random.default_rng(100 + seed)
        sup = sorted(rng.choice(8, size=3, replace=False).tolist())
        gamma = float(rng.uniform(0.1, 10.0))
        x, val = ridge_restricted_solve(inst, gamma, sup)
        x_ref, val_ref = ridge_ls(inst.a[:, sup], inst.y, gamma)
        np.testing.assert_allclose(x[sup], x_ref, atol=1e-9)
        assert val == pytest.approx(val_ref, abs=1e-9)

    def test_empty_support_rejected(self, tiny):
        with pytest.raises(InvalidInputError):
            ridge_restricted_solve(tiny, 1.0, [])


class TestDeltaVector:
    def test_at_zero(self, tiny):
        eps, delta = delta_vector(tiny, np.zeros(2))
        np.testing.assert_allclose(eps, tiny.y)
        np.testing.assert_allclose(delta, (tiny.a.T @ tiny.y) ** 2)

    def test_worked_example(self, tiny):
        eps, delta = delta_vector(tiny, np.array([1.5, 0.0]))
        np.testing.assert_allclose(eps, [1.5, 0.1], atol=1e-12)
        np.testing.assert_allclose(delta, [2.25, 0.01], atol=1e-12)

    def test_zero_residual(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((4, 4)) + 4 * np.eye(4)
        x = rng.standard_normal(4)
        inst = Instance(a, a @ x)
        _, delta = delta_vector(inst, x)
        np.testing.assert_allclose(delta, 0.0, atol=1e-18)
