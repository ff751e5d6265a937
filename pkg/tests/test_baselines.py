import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xfmr_aging import baselines, metrics
from xfmr_aging.baselines import MlpModel, RbfModel, Scaler
from xfmr_aging.dataset import LabeledDataset, split
from xfmr_aging.errors import InputError, ModelFileError, ModelVersionError

from conftest import toy_dataset


def linear_data(n=200, seed=0):
    rng = np.random.default_rng(seed)
    x = np.column_stack([rng.uniform(-10, 30, n), rng.uniform(0.2, 1.2, n)])
    return LabeledDataset(x, 1e-4 * (2.0 + 0.05 * x[:, 0] + 1.5 * x[:, 1]))


def probe_grid():
    return np.array([[t, k] for t in np.linspace(-20, 40, 11) for k in np.linspace(0.1, 1.4, 6)])


class TestMlp:
    def test_linear_target(self):
        train, test = split(linear_data())
        # least squares on the raw inputs is exact here, so R² = 1 is attainable
        a = np.column_stack([train.inputs, np.ones(len(train))])
        coef, *_ = np.linalg.lstsq(a, train.targets, rcond=None)
        bound = metrics.r_squared(test.targets, np.column_stack([test.inputs, np.ones(len(test))]) @ coef)
        assert bound == pytest.approx(1.0, abs=1e-12)
        model = baselines.train_mlp(train, epochs=2000, learning_rate=0.05)
        assert metrics.r_squared(test.targets, model.predict(test.inputs)) >= 0.99

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_gradient_finite_differences(self, seed):
        data = toy_dataset(10, seed)
        scaler = Scaler.fit(data.inputs, data.targets)
        p = baselines.init_mlp(scaler, seed=seed).params()
        xs, ys = scaler.x(data.inputs), scaler.y(data.targets)
        _, grads = baselines.mlp_loss_and_grad(p, xs, ys)
        h = 1e-6
        for name, value in p.items():
            for idx in np.ndindex(value.shape):
                plus = {k: v.copy() for k, v in p.items()}
                minus = {k: v.copy() for k, v in p.items()}
                plus[name][idx] += h
                minus[name][idx] -= h
                fd = (baselines.mlp_loss_and_grad(plus, xs, ys)[0] - baselines.mlp_loss_and_grad(minus, xs, ys)[0]) / (2 * h)
                scale = max(abs(fd), abs(grads[name][idx]), 1e-8)
                assert abs(fd - grads[name][idx]) / scale < 1e-5, (name, idx)

    def test_zero_epochs_returns_initial_weights(self, toy10):
        model = baselines.train_mlp(toy10, epochs=0, seed=3)
        init = baselines.init_mlp(Scaler.fit(toy10.inputs, toy10.targets), seed=3)
        for k, v in init.params().items():
            np.testing.assert_array_equal(model.params()[k], v)
        assert model.trace == []

    def test_zero_weights_output_bias(self):
        scaler = Scaler(np.zeros(2), np.ones(2), 5.0, 2.0)
        model = MlpModel(np.zeros((2, 2)), np.zeros(2), np.zeros(2), 0.75, scaler)
        np.testing.assert_array_equal(model.predict(probe_grid()), 0.75 * 2.0 + 5.0)

    def test_layer_sizes(self, toy10):
        assert baselines.train_mlp(toy10, epochs=1).layer_sizes == (2, 2, 1)

    def test_deterministic(self, toy10):
        a = baselines.train_mlp(toy10, epochs=20, seed=4)
        b = baselines.train_mlp(toy10, epochs=20, seed=4)
        np.testing.assert_array_equal(a.predict(probe_grid()), b.predict(probe_grid()))

    def test_round_trip(self, tmp_path, toy10):
        model = baselines.train_mlp(toy10, epochs=30)
        baselines.save_mlp(model, tmp_path / "mlp.json")
        np.testing.assert_array_equal(baselines.load_mlp(tmp_path / "mlp.json").predict(probe_grid()),
                                      model.predict(probe_grid()))

    def test_version_check(self, tmp_path, toy10):
        baselines.save_mlp(baselines.train_mlp(toy10, epochs=1), tmp_path / "mlp.json")
        record = json.loads((tmp_path / "mlp.json").read_text())
        record["version"] = 2
        (tmp_path / "mlp.json").write_text(json.dumps(record))
        with pytest.raises(ModelVersionError):
            baselines.load_mlp(tmp_path / "mlp.json")


class TestRbf:
    def test_huge_goal_one_neuron(self):
        data = toy_dataset(50, 1)
        model = baselines.train_rbf(data, mse_goal=float(np.var(data.targets)))
        assert model.n_neurons == 1 and model.goal_met

    @pytest.mark.parametrize("n", [10, 15, 30])
    def test_interpolates(self, n):
        data = toy_dataset(n, 2)
        model = baselines.train_rbf(data, mse_goal=1e-300, max_neurons=n)
        assert model.trace[-1] < 1e-25 * np.var(data.targets)
        np.testing.assert_allclose(model.predict(data.inputs), data.targets, rtol=1e-6)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10_000))
    def test_trace_non_increasing(self, seed):
        data = toy_dataset(60, seed)
        model = baselines.train_rbf(data, mse_goal=1e-300, max_neurons=40)
        trace = np.array(model.trace)
        assert np.all(np.diff(trace) <= 1e-12 * trace[:-1] + 1e-300)

    def test_lone_center(self):
        model = RbfModel([[1.0, 2.0]], [0.5], [3.0], 0.25, Scaler.identity())
        assert model.predict([1.0, 2.0]) == 3.25

    def test_cap_reported(self):
        data = toy_dataset(40, 3)
        model = baselines.train_rbf(data, mse_goal=1e-300, max_neurons=5)
        assert model.n_neurons == 5 and not model.goal_met

    def test_duplicates_skipped(self):
        x = np.vstack([np.tile([[5.0, 0.5]], (4, 1)), toy_dataset(20, 4).inputs])
        data = LabeledDataset(x, np.r_[np.ones(4), toy_dataset(20, 4).targets * 1e4])
        model = baselines.train_rbf(data, mse_goal=1e-300, max_neurons=30)
        assert len(np.unique(model.centers, axis=0)) == model.n_neurons

    @pytest.mark.parametrize("goal", [0.0, -1.0])
    def test_bad_goal(self, goal, toy10):
        with pytest.raises(InputError):
            baselines.train_rbf(toy10, goal)

    def test_round_trip(self, tmp_path):
        data = toy_dataset(40, 5)
        model = baselines.train_rbf(data, mse_goal=1e-14, max_neurons=12)
        baselines.save_rbf(model, tmp_path / "rbf.json")
        back = baselines.load_rbf(tmp_path / "rbf.json")
        np.testing.assert_array_equal(back.predict(probe_grid()), model.predict(probe_grid()))

    def test_corrupt(self, tmp_path):
        (tmp_path / "rbf.json").write_text('{"schema": "xfmr-aging/rbf", "version": 1, "centers": ')
        with pytest.raises(ModelFileError):
            baselines.load_rbf(tmp_path / "rbf.json")
