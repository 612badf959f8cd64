import numpy as np
import pytest

from esnena.designs.design_2d.design_2d import make_design_2d
from esnena.esn import build_random_esn
from esnena.exceptions import RidgeSolverError
from esnena.schemas import TaskConfig, TrainConfig
from esnena.task import generate
from esnena.trainer import evaluate, fit_readout, harvest_states, train


def small_esn(n_r=20, seed=0):
    return build_random_esn(n_r=n_r, n_i=2, n_o=2, sparsity=0.5, spectral_radius=0.9, seed=seed)


def test_harvest_states_drops_washout():
    config = TrainConfig(train_length=300, washout=100, test_length=200)
    states = harvest_states(small_esn(), generate(TaskConfig(length=300)), config)
    assert states.shape == (200, 20)
    assert np.all(np.abs(states) < 1.0)


def test_fit_readout_orthonormal_states():
    rng = np.random.default_rng(0)
    x, _ = np.linalg.qr(rng.normal(size=(50, 5)))
    w = rng.normal(size=(2, 5))
    np.testing.assert_allclose(fit_readout(x, x @ w.T, 0.0), w, atol=1e-10)


def test_fit_readout_residual():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(200, 10))
    w = rng.normal(size=(3, 10))
    np.testing.assert_allclose(fit_readout(x, x @ w.T, 0.0), w, atol=1e-8)


def test_fit_readout_shrinks_with_lambda():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(100, 8))
    y = rng.normal(size=(100, 2))
    norms = [np.linalg.norm(fit_readout(x, y, ridge_lambda)) for ridge_lambda in (0.0, 0.1, 1.0, 10.0)]
    assert all(b <= a for a, b in zip(norms, norms[1:]))


def test_fit_readout_singular():
    x = np.random.default_rng(3).normal(size=(50, 4))
    x[:, 2] = 0.0
    with pytest.raises(RidgeSolverError):
        fit_readout(x, np.ones((50, 1)), 0.0)
    assert fit_readout(x, np.ones((50, 1)), 1e-2).shape == (1, 4)


def test_evaluate_design_2d():
    score, trajectory = evaluate(make_design_2d(0.2), TaskConfig(length=2000, seed=3), washout=100)
    assert score < 1e-2
    assert len(trajectory) == 2000


def test_train_small_esn():
    config = TrainConfig(train_length=2000, washout=100, test_length=500)
    result = train(small_esn(n_r=50), TaskConfig(), config)
    assert result.model.is_trained
    assert result.model.readout.shape == (2, 50)
    assert np.isfinite(result.train_mse)
    assert np.isfinite(result.test_mse)
    assert result.report.washout == 100
    assert len(result.test_trajectory) == 500


def test_train_config_washout():
    with pytest.raises(ValueError):
        TrainConfig(train_length=100, washout=100)



def test_train_test_noise_seed():
    model = small_esn(n_r=50).with_noise(1e-3)
    test_task = TaskConfig(length=500, seed=1)
    config = TrainConfig(train_length=2000, washout=100, test_length=500, seed=4)
    result = train(model, TaskConfig(), config)
    assert result.test_mse == evaluate(result.model, test_task, 100, noise_seed=5)[0]
    assert result.test_mse == train(model, TaskConfig(), config).test_mse
    pinned = train(model, TaskConfig(), config.model_copy(update={"test_noise_seed": 9}))
    assert pinned.test_mse == evaluate(pinned.model, test_task, 100, noise_seed=9)[0]

@pytest.mark.slow
def test_train_500_neurons():
    model = build_random_esn(n_r=500, n_i=2, n_o=2, sparsity=0.95, spectral_radius=0.9, seed=0)
    result = train(model, TaskConfig(), TrainConfig())
    assert result.train_mse < 0.05
