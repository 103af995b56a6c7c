import logging

import numpy as np
import pytest

from cardiosep.errors import NumericsError
from cardiosep.nmf import (
    EPS_FLOOR,
    IterationControls,
    LayerStack,
    PassParams,
    alpha_divergence,
    init_stack,
    normalize_stack,
    run_plnmf_pass,
    standard_nmf,
    update_A_alpha,
    update_layer,
    update_X_alpha,
    update_X_multilayer,
)
from oracles import alpha_divergence_loop, frobenius_loop


def random_factors(seed, m=3, n=3, t=3):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.1, 2.0, (m, n)), rng.uniform(0.1, 2.0, (n, t))


class TestAlphaDivergence:
    @pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.5, 1.0, 2.0, 10.0])
    def test_zero_iff_equal(self, alpha):
        rng = np.random.default_rng(0)
        y = rng.uniform(0.2, 2.0, (3, 4))
        assert alpha_divergence(y, y.copy(), alpha) == pytest.approx(0.0, abs=1e-12)

    def test_hand_case(self):
        # (1/2) * (4 * 1 - 2*2 + 1*1) = 0.5
        assert alpha_divergence([[2.0]], [[1.0]], 2.0) == pytest.approx(0.5)

    @pytest.mark.parametrize("alpha", [-1.0, 0.5, 2.0])
    def test_matches_double_loop(self, alpha):
        rng = np.random.default_rng(11)
        y = rng.uniform(0.1, 3.0, (3, 3))
        z = rng.uniform(0.1, 3.0, (3, 3))
        expected = alpha_divergence_loop(y, z, alpha)
        assert alpha_divergence(y, z, alpha) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, 1.0])
    def test_limits_match_loop(self, alpha):
        rng = np.random.default_rng(12)
        y = rng.uniform(0.1, 3.0, (4, 5))
        z = rng.uniform(0.1, 3.0, (4, 5))
        expected = alpha_divergence_loop(y, z, alpha)
        assert alpha_divergence(y, z, alpha) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.5, 1.0, 2.0, 10.0])
    def test_nonnegative_on_random_pairs(self, alpha):
        rng = np.random.default_rng(13)
        for _ in range(20):
            y = rng.uniform(0.05, 4.0, (3, 6))
            z = rng.uniform(0.05, 4.0, (3, 6))
            assert alpha_divergence(y, z, alpha) >= 0.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            alpha_divergence(np.ones((2, 2)), np.ones((2, 3)), 0.5)

    def test_negative_entries_rejected(self):
        with pytest.raises(NumericsError):
            alpha_divergence(np.array([[-0.1]]), np.ones((1, 1)), 0.5)


class TestAlphaUpdates:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_fixed_point_x(self, alpha):
        a, x = random_factors(1)
        y = a @ x
        np.testing.assert_allclose(update_X_alpha(y, a, x, alpha), x, rtol=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_fixed_point_a(self, alpha):
        a, x = random_factors(2)
        y = a @ x
        np.testing.assert_allclose(update_A_alpha(y, a, x, alpha), a, rtol=1e-12)

    def test_scalar_x_step(self):
        out = update_X_alpha(np.array([[2.0]]), np.array([[1.0]]),
                             np.array([[1.0]]), 1.0)
        np.testing.assert_allclose(out, [[2.0]])

    def test_scalar_a_step(self):
        out = update_A_alpha(np.array([[4.0]]), np.array([[1.0]]),
                             np.array([[2.0]]), 1.0)
        np.testing.assert_allclose(out, [[2.0]])

    def test_zero_column_rejected(self):
        a = np.array([[1.0, 0.0], [1.0, 0.0]])
        with pytest.raises(NumericsError):
            update_X_alpha(np.ones((2, 3)), a, np.ones((2, 3)), 0.5)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_alternating_updates_monotone(self, alpha):
        """200 alternating steps on the seed-5 instance, cost checked
        against the double-loop oracle after every step."""
        rng = np.random.default_rng(5)
        a = rng.uniform(0.1, 2.0, (2, 2))
        x = rng.uniform(0.1, 2.0, (2, 5))
        y = rng.uniform(0.1, 2.0, (2, 2)) @ rng.uniform(0.1, 2.0, (2, 5))
        prev = alpha_divergence_loop(y, a @ x, alpha)
        for step in range(200):
            if step % 2 == 0:
                x = update_X_alpha(y, a, x, alpha)
            else:
                a = update_A_alpha(y, a, x, alpha)
            cost = alpha_divergence_loop(y, a @ x, alpha)
            assert cost <= prev + 1e-9
            prev = cost


class TestStandardNmf:
    def test_recovers_rank_one(self):
        rng = np.random.default_rng(4)
        y = np.outer(rng.uniform(0.5, 2.0, 6), rng.uniform(0.5, 2.0, 40))
        a, x, trace = standard_nmf(y, 1, IterationControls(2000, 0.0, seed=0))
        rel = np.linalg.norm(y - a @ x) / np.linalg.norm(y)
        assert rel <= 1e-3

    def test_zero_matrix_collapses_to_floor(self):
        a, x, trace = standard_nmf(np.zeros((2, 4)), 1,
                                   IterationControls(50, 0.0, seed=0))
        assert np.all(a == EPS_FLOOR)
        assert np.all(x == EPS_FLOOR)
        assert trace.costs[-1] <= (2 * 4) * (2 * EPS_FLOOR**2) ** 2

    def test_cost_trace_monotone(self):
        rng = np.random.default_rng(8)
        y = rng.uniform(0.0, 1.0, (4, 50))
        a, x, trace = standard_nmf(y, 2, IterationControls(300, 0.0, seed=1))
        assert np.all(np.diff(trace.costs) <= 1e-9)
        assert trace.costs[-1] == pytest.approx(frobenius_loop(y, a @ x), rel=1e-12)

    def test_rank_bounds(self):
        with pytest.raises(ValueError):
            standard_nmf(np.ones((2, 4)), 3, IterationControls())
        with pytest.raises(ValueError):
            standard_nmf(np.ones((2, 4)), 0, IterationControls())


class TestLayerStack:
    def test_composite_of_single_layer_is_that_layer(self):
        a, x = random_factors(3)
        stack = LayerStack([a], x)
        assert stack.composite() is a

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            LayerStack([np.ones((2, 3))], np.ones((2, 4)))
        with pytest.raises(ValueError):
            LayerStack([], np.ones((2, 4)))


class TestUpdateLayer:
    def test_single_layer_matches_plain_update(self):
        rng = np.random.default_rng(6)
        a, x = random_factors(6, m=2, n=2, t=7)
        y = rng.uniform(0.1, 2.0, (2, 7))
        stack = LayerStack([a.copy()], x.copy())
        via_stack = update_layer(y, stack, 0, 0.5)
        direct = update_A_alpha(y, a, x, 0.5)
        np.testing.assert_array_equal(via_stack, direct)

    def test_exact_fit_is_fixed_point(self):
        rng = np.random.default_rng(7)
        a1 = rng.uniform(0.1, 1.0, (2, 2))
        a2 = rng.uniform(0.1, 1.0, (2, 2))
        x = rng.uniform(0.1, 1.0, (2, 9))
        y = a1 @ a2 @ x
        stack = LayerStack([a1, a2], x)
        np.testing.assert_allclose(update_layer(y, stack, 0, 0.5), a1, rtol=1e-12)
        np.testing.assert_allclose(update_layer(y, stack, 1, 0.5), a2, rtol=1e-12)

    def test_two_layer_sweep_does_not_increase_cost(self):
        """Seed-9 instance: full-model divergence after one sweep <= before."""
        rng = np.random.default_rng(9)
        y = rng.uniform(0.1, 1.0, (2, 2)) @ rng.uniform(0.1, 1.0, (2, 50))
        ctrl = IterationControls(max_iter=1, rel_tol=0.0, seed=9)
        params = PassParams(lambda1=1.0, lambda2=0.0, alpha=0.5, layers=2)
        rng_init = np.random.default_rng(9)
        stack0 = init_stack(2, 2, 2, 50, rng_init)
        before = alpha_divergence(y, stack0.reconstruction(), 0.5)
        _, trace, _ = run_plnmf_pass(y, params, ctrl)
        assert trace.costs[0] <= before + 1e-9

    def test_index_out_of_range(self):
        a, x = random_factors(1)
        with pytest.raises(ValueError):
            update_layer(np.ones((3, 3)), LayerStack([a], x), 1, 0.5)

    def test_tall_first_layer_back_projection(self):
        # M=4 mixtures, N=2 sources, second layer is 2x2
        rng = np.random.default_rng(10)
        a1 = rng.uniform(0.1, 1.0, (4, 2))
        a2 = rng.uniform(0.1, 1.0, (2, 2))
        x = rng.uniform(0.1, 1.0, (2, 12))
        y = a1 @ a2 @ x
        stack = LayerStack([a1, a2], x)
        updated = update_layer(y, stack, 1, 0.5)
        assert updated.shape == (2, 2)
        np.testing.assert_allclose(updated, a2, rtol=1e-12)


class TestUpdateXMultilayer:
    def test_single_layer_identical(self):
        rng = np.random.default_rng(14)
        a, x = random_factors(14, m=2, n=2, t=6)
        y = rng.uniform(0.1, 2.0, (2, 6))
        stack = LayerStack([a], x)
        np.testing.assert_array_equal(
            update_X_multilayer(y, stack, 0.5), update_X_alpha(y, a, x, 0.5)
        )

    def test_composite_fixed_point(self):
        rng = np.random.default_rng(15)
        layers = [rng.uniform(0.1, 1.0, (2, 2)) for _ in range(3)]
        x = rng.uniform(0.1, 1.0, (2, 8))
        stack = LayerStack(layers, x)
        y = stack.reconstruction()
        np.testing.assert_allclose(update_X_multilayer(y, stack, 0.5), x, rtol=1e-11)

    def test_matches_explicit_composite(self):
        rng = np.random.default_rng(16)
        layers = [rng.uniform(0.1, 1.0, (2, 2)) for _ in range(3)]
        x = rng.uniform(0.1, 1.0, (2, 10))
        y = rng.uniform(0.1, 1.0, (2, 10))
        stack = LayerStack(layers, x)
        composite = layers[0] @ layers[1] @ layers[2]
        np.testing.assert_allclose(
            update_X_multilayer(y, stack, 0.5),
            update_X_alpha(y, composite, x, 0.5),
            rtol=1e-12,
        )


class TestNormalizeStack:
    def test_idempotent_on_normalized(self):
        rng = np.random.default_rng(17)
        stack = init_stack(2, 2, 2, 6, rng)
        once = normalize_stack(stack)
        twice = normalize_stack(once)
        for a, b in zip(once.layers, twice.layers):
            np.testing.assert_allclose(a, b, rtol=1e-15)
        np.testing.assert_allclose(once.X, twice.X, rtol=1e-15)

    def test_scale_moves_into_x(self):
        stack = LayerStack([np.diag([2.0, 4.0])], np.eye(2))
        out = normalize_stack(stack)
        np.testing.assert_allclose(out.layers[0].sum(axis=0), [1.0, 1.0])
        np.testing.assert_allclose(out.X, np.diag([2.0, 4.0]))

    @pytest.mark.parametrize("n_layers", [1, 2, 3, 4])
    def test_product_preserved(self, n_layers):
        for seed in range(12):
            rng = np.random.default_rng(100 + seed)
            stack = init_stack(3, 2, n_layers, 8, rng)
            before = stack.reconstruction()
            after = normalize_stack(stack).reconstruction()
            rel = np.linalg.norm(after - before) / np.linalg.norm(before)
            assert rel <= 1e-12

    def test_dead_column_left_alone(self, caplog):
        a = np.array([[EPS_FLOOR, 0.5], [EPS_FLOOR, 0.5]])
        stack = LayerStack([a.copy()], np.ones((2, 3)))
        with caplog.at_level(logging.WARNING):
            out = normalize_stack(stack)
        np.testing.assert_array_equal(out.layers[0][:, 0], a[:, 0])
        np.testing.assert_allclose(out.layers[0][:, 1].sum(), 1.0)
        assert any("floored-out" in r.message for r in caplog.records)


class TestRunPlnmfPass:
    def test_recovers_planted_factors(self):
        rng = np.random.default_rng(20)
        y = rng.uniform(0.1, 1.0, (2, 2)) @ rng.uniform(0.1, 1.0, (2, 60))
        params = PassParams(lambda1=1.0, lambda2=0.0, alpha=0.5, layers=1)
        stack, trace, _ = run_plnmf_pass(y, params, IterationControls(3000, 0.0, 1))
        rel = np.linalg.norm(y - stack.reconstruction()) / np.linalg.norm(y)
        assert rel <= 1e-3

    def test_zero_budget_returns_initialization(self):
        rng = np.random.default_rng(21)
        y = rng.uniform(0.1, 1.0, (2, 10))
        params = PassParams(lambda1=1.0, lambda2=0.0, alpha=0.5, layers=2)
        stack, trace, _ = run_plnmf_pass(y, params, IterationControls(0, 1e-6, 5))
        expected = init_stack(2, 2, 2, 10, np.random.default_rng(5))
        for got, want in zip(stack.layers, expected.layers):
            np.testing.assert_array_equal(got, want)
        np.testing.assert_array_equal(stack.X, expected.X)
        assert trace.stop_reason == "max_iter"
        assert trace.iterations == 0

    def test_seed13_single_layer_trace_monotone(self):
        rng = np.random.default_rng(13)
        y = rng.uniform(0.1, 1.0, (2, 2)) @ rng.uniform(0.1, 1.0, (2, 40))
        params = PassParams(lambda1=1.0, lambda2=0.0, alpha=0.5, layers=1)
        _, trace, _ = run_plnmf_pass(y, params, IterationControls(200, 0.0, 13))
        assert np.all(np.diff(trace.costs) <= 1e-9)

    def test_alpha_zero_guard_runs(self):
        rng = np.random.default_rng(22)
        y = rng.uniform(0.1, 1.0, (2, 15))
        params = PassParams(alpha=0.0, layers=1)
        _, trace, _ = run_plnmf_pass(y, params, IterationControls(20, 0.0, 2))
        assert np.all(np.isfinite(trace.costs))

    def test_converged_stop_reason(self):
        rng = np.random.default_rng(23)
        y = rng.uniform(0.1, 1.0, (2, 2)) @ rng.uniform(0.1, 1.0, (2, 30))
        params = PassParams(lambda1=1.0, lambda2=0.0, alpha=1.0, layers=1)
        _, trace, _ = run_plnmf_pass(y, params, IterationControls(5000, 1e-7, 3))
        assert trace.stop_reason == "converged"
        assert trace.iterations < 5000


class TestSingleLayerReduction:
    @pytest.mark.parametrize("seed", range(10))
    def test_bit_identical_to_plain_alpha_loop(self, seed):
        """The multilayer pass with L=1, lam1=1, lam2=0 must replay the plain
        alternating update loop exactly, float for float."""
        rng = np.random.default_rng(200 + seed)
        y = rng.uniform(0.1, 1.0, (2, 2)) @ rng.uniform(0.1, 1.0, (2, 25))
        alpha = 0.5
        sweeps = 40

        params = PassParams(lambda1=1.0, lambda2=0.0, alpha=alpha, layers=1)
        ctrl = IterationControls(sweeps, 0.0, seed)
        stack, trace, _ = run_plnmf_pass(y, params, ctrl)

        init_rng = np.random.default_rng(seed)
        a = init_rng.uniform(0.1, 1.0, (2, 2))
        x = init_rng.uniform(0.1, 1.0, (2, 25))
        costs = []
        for _ in range(sweeps):
            a = update_A_alpha(y, a, x, alpha)
            x = update_X_alpha(y, a, x, alpha)
            plain = normalize_stack(LayerStack([a], x))
            a, x = plain.layers[0], plain.X
            costs.append(alpha_divergence(y, a @ x, alpha))

        np.testing.assert_array_equal(trace.costs, np.asarray(costs))
        np.testing.assert_array_equal(stack.layers[0], a)
        np.testing.assert_array_equal(stack.X, x)
