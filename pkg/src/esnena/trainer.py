"""
Readout training by ridge regression on teacher forced states.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, solve

from esnena.esn import EsnModel, Trajectory, prime_state, run_closed_loop, run_open_loop
from esnena.exceptions import EsnDimensionError, RidgeSolverError
from esnena.schemas import TaskConfig, TrainConfig, TrainingReport
from esnena.task import TaskData, count_switch_errors, generate, mse

logger = logging.getLogger(__name__)


def harvest_states(model: EsnModel, task: TaskData, config: TrainConfig,
                   rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    Run the model teacher forced over the first train_length steps of the task and return the states after washout.

    :param model: Model whose feedback weights receive the targets, any readout is ignored.
    :type model: EsnModel
    :param task: Training sequence.
    :type task: TaskData
    :param config: Washout, length and harvesting noise.
    :type config: TrainConfig
    :param rng: Noise generator, seeded from config.seed when omitted.
    :type rng: Optional[np.random.Generator]
    :return: State matrix X with train_length - washout rows.
    :rtype: np.ndarray
    """
    if task.inputs.shape[1] != model.n_i or task.targets.shape[1] != model.n_o:
        raise EsnDimensionError("task", (model.n_i, model.n_o), (task.inputs.shape[1], task.targets.shape[1]))
    if len(task) < config.train_length:
        raise EsnDimensionError("task", (config.train_length,), (len(task),), "Task shorter than train_length.")
    rng = np.random.default_rng(config.seed) if rng is None else rng
    forced = model.with_noise(config.noise_std)
    trajectory = run_open_loop(forced, task.inputs[:config.train_length], task.targets[:config.train_length],
                               rng=rng, initial_target=task.initial_state)
    return trajectory.states[config.washout:]


def fit_readout(x: np.ndarray, y: np.ndarray, ridge_lambda: float) -> np.ndarray:
    """
    W_o = ((X^T X + lambda^2 I)^-1 X^T Y)^T, solved as a symmetric positive definite system.

    :raises RidgeSolverError: If the normal matrix is singular.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[0] != y.shape[0]:
        raise EsnDimensionError("Y", (x.shape[0], y.shape[1]), y.shape)
    normal = x.T @ x + ridge_lambda ** 2 * np.eye(x.shape[1])
    with warnings.catch_warnings():
        if ridge_lambda == 0:
            warnings.simplefilter("error", LinAlgWarning)
        try:
            solution = solve(normal, x.T @ y, assume_a="pos")
        except (LinAlgError, LinAlgWarning) as e:
            raise RidgeSolverError(ridge_lambda, str(e))
    return solution.T


@dataclass(frozen=True, eq=False)
class TrainingResult:
    model: EsnModel
    train_mse: float
    test_mse: float
    switch_errors: int
    test_trajectory: Trajectory
    report: TrainingReport


def evaluate(model: EsnModel, task_config: TaskConfig, washout: int = 100, noise_std: Optional[float] = None,
             noise_seed: int = 0) -> Tuple[float, Trajectory]:
    """
    Closed-loop test on a fresh sequence, scored after washout.

    The run starts from the primed all +1 memory state so the first target is meaningful.
    """
    task = generate(task_config)
    rng = np.random.default_rng(noise_seed)
    trajectory = run_closed_loop(model, task.inputs, x0=prime_state(model), rng=rng, targets=task.targets,
                                 noise_std=noise_std)
    return mse(trajectory.outputs[washout:], task.targets[washout:]), trajectory


def train(model: EsnModel, task_config: TaskConfig, config: TrainConfig) -> TrainingResult:
    """
    Harvest, fit the readout and test in closed loop.

    :param model: Untrained (or to be retrained) model.
    :type model: EsnModel
    :param task_config: Task used for training, its length is replaced by train_length.
    :type task_config: TaskConfig
    :param config: Training parameters.
    :type config: TrainConfig
    :return: Trained model with training and test scores.
    :rtype: TrainingResult
    """
    task = generate(task_config.model_copy(update={"length": config.train_length}))
    states = harvest_states(model, task, config)
    targets = task.targets[config.washout:config.train_length]
    readout = fit_readout(states, targets, config.ridge_lambda)
    trained = model.with_readout(readout)
    train_mse = mse(states @ readout.T, targets)
    logger.info("Washout %d steps, ridge_lambda %.1e, training MSE %.3e", config.washout, config.ridge_lambda,
                train_mse)
    test_config = task_config.model_copy(update={"length": config.test_length, "seed": config.test_seed})
    noise_seed = config.seed + 1 if config.test_noise_seed is None else config.test_noise_seed
    test_mse, trajectory = evaluate(trained, test_config, config.washout, noise_seed=noise_seed)
    switch_errors = count_switch_errors(trajectory.inputs, trajectory.targets, trajectory.outputs)
    logger.info("Closed-loop test MSE %.3e, %d switch errors", test_mse, switch_errors)
    report = TrainingReport(train_mse=train_mse, test_mse=test_mse, ridge_lambda=config.ridge_lambda,
                            washout=config.washout, switch_errors=switch_errors, task=task_config, train=config)
    return TrainingResult(model=trained, train_mse=train_mse, test_mse=test_mse, switch_errors=switch_errors,
                          test_trajectory=trajectory, report=report)
