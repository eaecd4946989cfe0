"""Learning-rule, optimizer, and training-loop tests.

Hand-derived oracles: closed-form gradients for one-layer nets, manual Adam
step arithmetic, and equivalence relations between the three rules that a
correct implementation must satisfy exactly.
"""

import numpy as np
import pytest

from tinytrain import nn, trainers
from tinytrain.errors import (ConfigError, ContractError, DivergenceError,
                              ShapeError)
from tinytrain.nn import build_mlp, build_paper_cnn, forward_pass
from tinytrain.trainers import (AdamState, Optimizer, TrainerConfig,
                                adam_update, apply_gradients, backprop_sweep,
                                dfa_sweep, layerwise_instant_sweep,
                                make_feedback_matrices, one_hot, output_error,
                                sgd_update, train)


def toy_cnn(seed=0):
    rng = np.random.default_rng(seed)
    return nn.Network([
        nn.conv2d(1, 2, 3, 3, "relu", rng=rng),
        nn.maxpool2(),
        nn.flatten(),
        nn.dense(8, 3, "softmax", rng=rng),
    ], (1, 6, 6))


def max_param_diff(a, b):
    return max(
        float(np.abs(a.parameters()[k] - b.parameters()[k]).max())
        for k in a.parameters()
    )


class TestOutputError:
    def test_softmax_ce_uniform_prediction(self):
        h = np.full((1, 10), 0.1)
        t = one_hot(np.array([3]), 10)
        loss, delta = output_error(h, t, "softmax_ce")
        assert abs(loss - (-np.log(0.1))) < 1e-12
        np.testing.assert_allclose(delta, h - t, rtol=0, atol=0)

    def test_softmax_ce_log_clamped_at_floor(self):
        h = np.zeros((1, 3))
        h[0, 0] = 1.0
        t = one_hot(np.array([2]), 3)
        loss, _ = output_error(h, t, "softmax_ce")
        assert abs(loss - (-np.log(1e-12))) < 1e-9

    def test_softmax_ce_batch_mean(self):
        h = np.array([[0.7, 0.3], [0.2, 0.8]])
        t = np.array([[1.0, 0.0], [0.0, 1.0]])
        loss, _ = output_error(h, t, "softmax_ce")
        want = -(np.log(0.7) + np.log(0.8)) / 2
        assert abs(loss - want) < 1e-12

    def test_mse_with_identity(self):
        h = np.array([[1.0, 2.0]])
        t = np.array([[0.0, 0.0]])
        loss, delta = output_error(h, t, "mse")
        assert abs(loss - 2.5) < 1e-12
        np.testing.assert_array_equal(delta, [[1.0, 2.0]])

    def test_mse_gates_through_activation_derivative(self):
        z = np.array([[0.5, -0.3]])
        h = nn.activation("sigmoid", z)
        t = np.zeros((1, 2))
        _, delta = output_error(h, t, "mse", activation="sigmoid", z=z)
        np.testing.assert_allclose(delta, (h - t) * h * (1 - h), rtol=1e-15)

    def test_mse_with_softmax_head_refused(self):
        h = np.full((1, 3), 1 / 3)
        with pytest.raises(ContractError):
            output_error(h, h, "mse", activation="softmax", z=h)

    def test_ce_with_non_softmax_head_refused(self):
        h = np.full((1, 3), 0.5)
        with pytest.raises(ConfigError):
            output_error(h, h, "softmax_ce", activation="sigmoid", z=h)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            output_error(np.zeros((1, 3)), np.zeros((1, 4)))

    def test_unknown_loss_rejected(self):
        with pytest.raises(ConfigError):
            output_error(np.zeros((1, 2)), np.zeros((1, 2)), "hinge")


class TestBackprop:
    def test_single_sigmoid_layer_closed_form(self):
        # one dense sigmoid layer under mse: delta = (h-t) h (1-h),
        # gw = delta^T x / n, gb = mean(delta)
        w = np.array([[0.2, -0.4], [0.6, 0.1]])
        b = np.array([0.05, -0.2])
        net = nn.Network([nn.dense(2, 2, "sigmoid", weights=w, bias=b)], (2,))
        x = np.array([[1.0, 2.0], [-0.5, 0.3]])
        t = np.array([[1.0, 0.0], [0.0, 1.0]])
        cache = forward_pass(net, x)
        g = backprop_sweep(net, cache, t, loss="mse")
        z = x @ w.T + b
        h = 1 / (1 + np.exp(-z))
        delta = (h - t) * h * (1 - h)
        np.testing.assert_allclose(g.weight[0], delta.T @ x / 2, rtol=1e-14)
        np.testing.assert_allclose(g.bias[0], delta.mean(axis=0), rtol=1e-14)
        np.testing.assert_allclose(g.deltas[0], delta, rtol=1e-14)

    def test_softmax_head_delta_is_h_minus_t(self):
        net = build_mlp([4, 3], seed=0)
        x = np.random.default_rng(1).normal(size=(5, 4))
        t = one_hot(np.array([0, 1, 2, 0, 1]), 3)
        cache = forward_pass(net, x)
        g = backprop_sweep(net, cache, t)
        np.testing.assert_allclose(g.deltas[0], cache.h[0] - t, rtol=0, atol=0)

    def test_batch_gradient_is_mean_of_per_sample_gradients(self):
        net = build_mlp([4, 5, 3], hidden_activation="tanh", seed=2)
        rng = np.random.default_rng(3)
        x = rng.normal(size=(6, 4))
        t = one_hot(rng.integers(0, 3, size=6), 3)
        cache = forward_pass(net, x)
        g = backprop_sweep(net, cache, t)
        for l in net.param_layers():
            per_sample_w = np.zeros_like(g.weight[l])
            per_sample_b = np.zeros_like(g.bias[l])
            for i in range(6):
                ci = forward_pass(net, x[i])
                gi = backprop_sweep(net, ci, t[i])
                per_sample_w += gi.weight[l]
                per_sample_b += gi.bias[l]
            np.testing.assert_allclose(g.weight[l], per_sample_w / 6, rtol=1e-12)
            np.testing.assert_allclose(g.bias[l], per_sample_b / 6, rtol=1e-12)

    def test_stale_cache_rejected(self):
        net = build_mlp([3, 2], seed=0)
        cache = forward_pass(net, np.zeros((1, 3)))
        net.bump_version()
        with pytest.raises(ContractError):
            backprop_sweep(net, cache, np.array([[1.0, 0.0]]))

    def test_sweep_does_not_mutate_network(self):
        net = build_mlp([4, 3, 2], seed=1)
        before = net.snapshot()
        x = np.random.default_rng(0).normal(size=(2, 4))
        cache = forward_pass(net, x)
        backprop_sweep(net, cache, one_hot(np.array([0, 1]), 2))
        assert net.version == cache.net_version
        for k, v in net.parameters().items():
            np.testing.assert_array_equal(v, before[k])


class TestDFA:
    def test_feedback_shapes_and_bound(self):
        net = build_mlp([6, 8, 5, 3], seed=0)
        fb = make_feedback_matrices(net, 42)
        assert set(fb) == {0, 1}
        assert fb[0].shape == (8, 3)
        assert fb[1].shape == (5, 3)
        bound = 1 / np.sqrt(3)
        for b in fb.values():
            assert np.abs(b).max() <= bound

    def test_feedback_deterministic_per_seed(self):
        net = build_mlp([6, 8, 3], seed=0)
        a = make_feedback_matrices(net, 7)
        b = make_feedback_matrices(net, 7)
        c = make_feedback_matrices(net, 8)
        np.testing.assert_array_equal(a[0], b[0])
        assert not np.array_equal(a[0], c[0])

    def test_feedback_covers_conv_layers(self):
        net = toy_cnn()
        fb = make_feedback_matrices(net, 0)
        assert set(fb) == {0}
        assert fb[0].shape == (2 * 4 * 4, 3)

    def test_hidden_delta_is_projected_output_error(self):
        net = build_mlp([4, 5, 3], hidden_activation="tanh", seed=1)
        rng = np.random.default_rng(2)
        x = rng.normal(size=(3, 4))
        t = one_hot(rng.integers(0, 3, size=3), 3)
        fb = make_feedback_matrices(net, 9)
        cache = forward_pass(net, x)
        g = dfa_sweep(net, cache, t, fb)
        delta_out = cache.h[-1] - t
        want = (delta_out @ fb[0].T) * (1 - cache.h[0] ** 2)
        np.testing.assert_allclose(g.deltas[0], want, rtol=1e-14)
        np.testing.assert_allclose(g.deltas[1], delta_out, rtol=0, atol=0)

    def test_hidden_delta_ignores_upper_weights(self):
        # perturbing W of the layer above changes backprop's hidden delta
        # but must not change dfa's
        rng = np.random.default_rng(4)
        x = rng.normal(size=(3, 4))
        t = one_hot(rng.integers(0, 3, size=3), 3)

        def hidden_deltas(bump):
            net = build_mlp([4, 5, 3], seed=3)
            if bump:
                net.layers[1].weights[0, 0] += 0.5
            fb = make_feedback_matrices(net, 11)
            cache = forward_pass(net, x)
            g_dfa = dfa_sweep(net, cache, t, fb)
            g_bp = backprop_sweep(net, cache, t)
            return g_dfa.deltas[0], g_bp.deltas[0], cache.h[-1] - t

        dfa_a, bp_a, out_a = hidden_deltas(False)
        dfa_b, bp_b, out_b = hidden_deltas(True)
        # same forward input, perturbed top layer: outputs differ
        assert not np.array_equal(out_a, out_b)
        assert not np.allclose(bp_a, bp_b)
        # dfa hidden delta depends only on the output error, which moved,
        # but its routing must not involve the upper weights: check by
        # replaying the projection with each output error
        net = build_mlp([4, 5, 3], seed=3)
        fb = make_feedback_matrices(net, 11)
        cache = forward_pass(net, x)
        gate = nn.activation_derivative("relu", cache.z[0], cache.h[0])
        np.testing.assert_allclose(dfa_a, (out_a @ fb[0].T) * gate, rtol=1e-14)

    def test_zero_output_error_gives_zero_grads(self):
        net = build_mlp([4, 5, 3], seed=5)
        x = np.random.default_rng(6).normal(size=(2, 4))
        cache = forward_pass(net, x)
        t = cache.h[-1].copy()  # target equals prediction
        fb = make_feedback_matrices(net, 1)
        g = dfa_sweep(net, cache, t, fb)
        for l in net.param_layers():
            assert np.abs(g.weight[l]).max() == 0.0
            assert np.abs(g.bias[l]).max() == 0.0

    def test_missing_or_misshapen_feedback_rejected(self):
        net = build_mlp([4, 5, 3], seed=0)
        x = np.zeros((1, 4))
        t = one_hot(np.array([0]), 3)
        cache = forward_pass(net, x)
        with pytest.raises(ConfigError):
            dfa_sweep(net, cache, t, {})
        with pytest.raises(ConfigError):
            dfa_sweep(net, cache, t, {0: np.zeros((3, 5))})


class TestOptimizers:
    def test_sgd_known_value(self):
        params = {"W": np.array([[1.0]])}
        grads = {"W": np.array([[2.0]])}
        sgd_update(params, grads, 0.5)
        np.testing.assert_array_equal(params["W"], [[0.0]])

    def test_sgd_updates_in_place(self):
        w = np.array([1.0, 2.0])
        sgd_update({"w": w}, {"w": np.array([1.0, 1.0])}, 0.1)
        np.testing.assert_allclose(w, [0.9, 1.9], rtol=1e-15)

    def test_adam_first_step_magnitude_is_lr(self):
        state = AdamState()
        p = np.array([1.0, -2.0, 3.0])
        g = np.array([5.0, -0.01, 2.0])
        adam_update(state, {"p": p}, {"p": g}, 0.001)
        # first step: m_hat = g, v_hat = g^2, step = lr * g / (|g| + eps)
        np.testing.assert_allclose(
            p, [1.0, -2.0, 3.0] - 0.001 * np.sign(g), rtol=1e-6
        )

    def test_adam_two_steps_match_manual_arithmetic(self):
        b1, b2, eps, lr = 0.9, 0.999, 1e-8, 0.01
        state = AdamState()
        p = np.array([0.5])
        g1, g2 = np.array([0.3]), np.array([-0.2])
        adam_update(state, {"p": p}, {"p": g1}, lr)
        adam_update(state, {"p": p}, {"p": g2}, lr)
        # manual replay
        q = np.array([0.5])
        m = v = np.zeros(1)
        for t, g in ((1, g1), (2, g2)):
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            q = q - lr * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)
        np.testing.assert_allclose(p, q, rtol=1e-15)
        assert state.t["p"] == 2

    def test_adam_state_is_per_key(self):
        state = AdamState()
        a, b = np.zeros(1), np.zeros(1)
        adam_update(state, {"a": a}, {"a": np.ones(1)}, 0.1)
        adam_update(state, {"a": a, "b": b}, {"a": np.ones(1), "b": np.ones(1)}, 0.1)
        assert state.t == {"a": 2, "b": 1}

    def test_optimizer_validation(self):
        with pytest.raises(ConfigError):
            Optimizer("rmsprop", 0.1)
        with pytest.raises(ConfigError):
            Optimizer("sgd", -0.1)

    def test_lr_scale_applies_per_layer(self):
        opt = Optimizer("sgd", 0.1, lr_scale={0: 0.0, 2: 2.0})
        params = {(0, "W"): np.array([1.0]), (2, "W"): np.array([1.0])}
        grads = {(0, "W"): np.array([1.0]), (2, "W"): np.array([1.0])}
        opt.step(params, grads)
        np.testing.assert_allclose(params[(0, "W")], [1.0])
        np.testing.assert_allclose(params[(2, "W")], [0.8], rtol=1e-15)


class TestLayerwise:
    def test_pre_update_equals_backprop_plus_sgd_exactly(self):
        for seed in (0, 1, 2):
            a = build_mlp([6, 5, 4, 3], seed=seed)
            b = build_mlp([6, 5, 4, 3], seed=seed)
            rng = np.random.default_rng(seed + 10)
            x = rng.normal(size=(8, 6))
            t = one_hot(rng.integers(0, 3, size=8), 3)
            apply_gradients(a, backprop_sweep(a, forward_pass(a, x), t),
                            Optimizer("sgd", 0.05))
            layerwise_instant_sweep(b, forward_pass(b, x), t,
                                    Optimizer("sgd", 0.05), mode="pre_update")
            assert max_param_diff(a, b) <= 1e-12

    def test_post_update_routes_through_updated_weights(self):
        a = build_mlp([6, 5, 3], seed=4)
        b = build_mlp([6, 5, 3], seed=4)
        rng = np.random.default_rng(5)
        x = rng.normal(size=(8, 6))
        t = one_hot(rng.integers(0, 3, size=8), 3)
        apply_gradients(a, backprop_sweep(a, forward_pass(a, x), t),
                        Optimizer("sgd", 0.05))
        layerwise_instant_sweep(b, forward_pass(b, x), t,
                                Optimizer("sgd", 0.05), mode="post_update")
        # the top layer sees the same update; the hidden layer must differ
        np.testing.assert_array_equal(a.layers[1].weights, b.layers[1].weights)
        assert np.abs(a.layers[0].weights - b.layers[0].weights).max() > 0

    def test_zero_lr_deltas_match_backprop_bitwise(self):
        for make in (lambda: build_mlp([6, 5, 4, 3], seed=3), toy_cnn):
            a, b = make(), make()
            rng = np.random.default_rng(7)
            x = rng.normal(size=(4,) + a.input_shape)
            t = one_hot(rng.integers(0, 3, size=4), 3)
            g = backprop_sweep(a, forward_pass(a, x), t)
            before = b.snapshot()
            rep = layerwise_instant_sweep(b, forward_pass(b, x), t,
                                          Optimizer("sgd", 0.0))
            for gd, rd in zip(g.deltas, rep.deltas):
                if gd is None:
                    assert rd is None
                else:
                    assert gd.tobytes() == rd.tobytes()
            for k, v in b.parameters().items():
                assert v.tobytes() == before[k].tobytes()

    def test_update_magnitudes_reported(self):
        net = build_mlp([4, 3, 2], seed=0)
        x = np.random.default_rng(1).normal(size=(2, 4))
        t = one_hot(np.array([0, 1]), 2)
        rep = layerwise_instant_sweep(net, forward_pass(net, x), t,
                                      Optimizer("sgd", 0.1))
        mags = [m for m in rep.update_magnitudes if m is not None]
        assert len(mags) == 2
        assert all(m > 0 for m in mags)

    def test_stale_cache_rejected(self):
        net = build_mlp([3, 2], seed=0)
        cache = forward_pass(net, np.zeros((1, 3)))
        layerwise_instant_sweep(net, cache, np.array([[1.0, 0.0]]),
                                Optimizer("sgd", 0.1))
        # the sweep itself bumped the version; reusing the cache must fail
        with pytest.raises(ContractError):
            layerwise_instant_sweep(net, cache, np.array([[1.0, 0.0]]),
                                    Optimizer("sgd", 0.1))

    def test_unknown_mode_rejected(self):
        net = build_mlp([3, 2], seed=0)
        cache = forward_pass(net, np.zeros((1, 3)))
        with pytest.raises(ConfigError):
            layerwise_instant_sweep(net, cache, np.array([[1.0, 0.0]]),
                                    Optimizer("sgd", 0.1), mode="sideways")


class TestDepthOneEquivalence:
    def test_all_rules_identical_on_single_layer(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(8, 5))
        t = one_hot(rng.integers(0, 4, size=8), 4)
        for opt_kind in ("sgd", "adam"):
            nets = [build_mlp([5, 4], seed=11) for _ in range(3)]
            caches = [forward_pass(n, x) for n in nets]
            apply_gradients(nets[0], backprop_sweep(nets[0], caches[0], t),
                            Optimizer(opt_kind, 0.01))
            apply_gradients(nets[1],
                            dfa_sweep(nets[1], caches[1], t,
                                      make_feedback_matrices(nets[1], 0)),
                            Optimizer(opt_kind, 0.01))
            layerwise_instant_sweep(nets[2], caches[2], t,
                                    Optimizer(opt_kind, 0.01))
            assert max_param_diff(nets[0], nets[1]) <= 1e-12
            assert max_param_diff(nets[0], nets[2]) <= 1e-12


class TestZeroLRAllRules:
    def test_no_rule_changes_params_at_zero_lr(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(4, 6))
        t = one_hot(rng.integers(0, 3, size=4), 3)
        for rule in ("backprop", "dfa", "layerwise"):
            net = build_mlp([6, 5, 3], seed=2)
            before = net.snapshot()
            cache = forward_pass(net, x)
            if rule == "backprop":
                apply_gradients(net, backprop_sweep(net, cache, t),
                                Optimizer("sgd", 0.0))
            elif rule == "dfa":
                apply_gradients(net,
                                dfa_sweep(net, cache, t,
                                          make_feedback_matrices(net, 0)),
                                Optimizer("sgd", 0.0))
            else:
                layerwise_instant_sweep(net, cache, t, Optimizer("sgd", 0.0))
            for k, v in net.parameters().items():
                assert v.tobytes() == before[k].tobytes(), (rule, k)


class TestTrainerConfig:
    def test_defaults_valid(self):
        cfg = TrainerConfig()
        assert cfg.rule == "backprop"

    @pytest.mark.parametrize("kwargs", [
        {"rule": "hebbian"},
        {"optimizer": "lbfgs"},
        {"loss": "hinge"},
        {"snapshot_mode": "mid"},
        {"learning_rate": 0.0},
        {"learning_rate": -1.0},
        {"batch_size": 0},
        {"epochs": -1},
        {"patience": 0},
    ])
    def test_bad_values_rejected(self, kwargs):
        with pytest.raises(ConfigError):
            TrainerConfig(**kwargs)


def blob_data(n_per_class, dim, classes, seed):
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for c in range(classes):
        center = np.zeros(dim)
        center[c % dim] = 2.5
        xs.append(rng.normal(center, 0.4, size=(n_per_class, dim)))
        ys.append(np.full(n_per_class, c, dtype=np.int64))
    return np.concatenate(xs), np.concatenate(ys)


class TestTrainLoop:
    def test_learns_separable_blobs_with_each_rule(self):
        x, y = blob_data(40, 6, 3, seed=0)
        for rule in ("backprop", "dfa", "layerwise"):
            net = build_mlp([6, 16, 3], seed=1)
            run = train(net, (x, y), (x, y), TrainerConfig(
                rule=rule, optimizer="adam", learning_rate=0.01,
                batch_size=16, epochs=8, seed=0,
            ))
            assert run.best_val_accuracy > 0.9, rule

    def test_identical_seeds_give_identical_runs(self):
        x, y = blob_data(20, 5, 3, seed=2)
        results = []
        for _ in range(2):
            net = build_mlp([5, 8, 3], seed=4)
            run = train(net, (x, y), (x, y), TrainerConfig(
                rule="dfa", optimizer="adam", learning_rate=0.01,
                batch_size=8, epochs=4, seed=9,
            ))
            results.append((run, net.snapshot()))
        run_a, snap_a = results[0]
        run_b, snap_b = results[1]
        for ra, rb in zip(run_a.history, run_b.history):
            assert ra.train_loss == rb.train_loss
            assert ra.val_loss == rb.val_loss
            assert ra.val_accuracy == rb.val_accuracy
            assert ra.delta_norms == rb.delta_norms
        for k in snap_a:
            assert snap_a[k].tobytes() == snap_b[k].tobytes()

    def test_different_seeds_differ(self):
        x, y = blob_data(20, 5, 3, seed=2)
        losses = []
        for seed in (0, 1):
            net = build_mlp([5, 8, 3], seed=4)
            run = train(net, (x, y), (x, y), TrainerConfig(
                rule="backprop", learning_rate=0.01, batch_size=8,
                epochs=2, seed=seed,
            ))
            losses.append(run.history[-1].train_loss)
        assert losses[0] != losses[1]

    def test_best_checkpoint_tracks_validation_peak(self):
        x, y = blob_data(30, 4, 2, seed=5)
        net = build_mlp([4, 8, 2], seed=6)
        run = train(net, (x, y), (x, y), TrainerConfig(
            learning_rate=0.02, batch_size=16, epochs=6, seed=0,
        ))
        accs = [r.val_accuracy for r in run.history]
        assert run.best_val_accuracy == max(accs)
        assert run.best_epoch == accs.index(max(accs)) + 1
        assert set(run.best_params) == set(net.parameters())

    def test_patience_stops_training_early(self):
        # validation accuracy saturates at 1.0 immediately, so no strict
        # improvement can follow and patience must cut the run short
        x, y = blob_data(30, 4, 2, seed=7)
        net = build_mlp([4, 12, 2], seed=8)
        run = train(net, (x, y), (x, y), TrainerConfig(
            learning_rate=0.05, batch_size=8, epochs=50, seed=0, patience=3,
        ))
        assert run.stopped_early
        assert len(run.history) < 50
        assert len(run.history) == run.best_epoch + 3

    def test_patience_none_runs_all_epochs(self):
        x, y = blob_data(10, 4, 2, seed=7)
        net = build_mlp([4, 6, 2], seed=8)
        run = train(net, (x, y), (x, y), TrainerConfig(
            learning_rate=0.05, batch_size=8, epochs=5, seed=0, patience=None,
        ))
        assert len(run.history) == 5
        assert not run.stopped_early

    def test_divergence_raises(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(16, 3))
        y = rng.integers(0, 2, size=16)
        net = nn.Network([
            nn.dense(3, 8, "relu", rng=rng),
            nn.dense(8, 2, "identity", rng=rng),
        ], (3,))
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(DivergenceError):
                train(net, (x, y), (x, y), TrainerConfig(
                    optimizer="sgd", learning_rate=1e12, batch_size=16,
                    epochs=10, seed=0, loss="mse",
                ))

    def test_images_reshaped_to_flat_input(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(12, 1, 4, 4))
        y = rng.integers(0, 2, size=12)
        net = build_mlp([16, 6, 2], seed=0)
        run = train(net, (x, y), (x, y), TrainerConfig(
            learning_rate=0.01, batch_size=4, epochs=1, seed=0,
        ))
        assert len(run.history) == 1

    def test_incompatible_shapes_rejected(self):
        net = build_mlp([16, 6, 2], seed=0)
        x = np.zeros((4, 17))
        with pytest.raises(ShapeError):
            train(net, (x, np.zeros(4, dtype=int)),
                  (x, np.zeros(4, dtype=int)),
                  TrainerConfig(epochs=1))

    def test_empty_sets_rejected(self):
        net = build_mlp([4, 2], seed=0)
        empty = (np.zeros((0, 4)), np.zeros(0, dtype=int))
        data = (np.zeros((2, 4)), np.zeros(2, dtype=int))
        with pytest.raises(ConfigError):
            train(net, empty, data, TrainerConfig(epochs=1))
        with pytest.raises(ConfigError):
            train(net, data, empty, TrainerConfig(epochs=1))


class TestOneHot:
    def test_values(self):
        out = one_hot(np.array([2, 0]), 3)
        np.testing.assert_array_equal(out, [[0, 0, 1], [1, 0, 0]])
        assert out.dtype == np.float64

    def test_range_checked(self):
        with pytest.raises(ShapeError):
            one_hot(np.array([3]), 3)
        with pytest.raises(ShapeError):
            one_hot(np.array([-1]), 3)
        with pytest.raises(ShapeError):
            one_hot(np.zeros((2, 2), dtype=int), 3)
