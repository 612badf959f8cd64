import numpy as np
import pytest

from esnena.exceptions import EmptySequenceError, EsnDimensionError
from esnena.schemas import TaskConfig
from esnena.task import count_switch_errors, generate, hold_and_flip, mse, table_actions


def test_hold_and_flip():
    inputs = np.array([[0, 0], [1, 0], [0, -1], [0, 0], [-1, 0], [0, -1]], dtype=float)
    targets = hold_and_flip(inputs, np.ones(2))
    expected = [[1, 1], [1, 1], [1, -1], [1, -1], [-1, -1], [-1, -1]]
    np.testing.assert_array_equal(targets, expected)


def test_generate_one_pulse_per_step():
    task = generate(TaskConfig(bits=3, pulse_prob=0.3, length=5000, seed=2))
    assert task.inputs.shape == (5000, 3)
    assert np.all(np.count_nonzero(task.inputs, axis=1) <= 1)
    assert set(np.unique(task.inputs)) <= {-1.0, 0.0, 1.0}
    assert set(np.unique(task.targets)) <= {-1.0, 1.0}


def test_generate_pulse_rate():
    task = generate(TaskConfig(length=100000, seed=0))
    rate = np.mean(np.any(task.inputs != 0, axis=1))
    assert rate == pytest.approx(0.1, abs=0.01)


def test_generate_deterministic():
    first = generate(TaskConfig(length=500, seed=4))
    second = generate(TaskConfig(length=500, seed=4))
    np.testing.assert_array_equal(first.inputs, second.inputs)
    np.testing.assert_array_equal(first.targets, second.targets)


def test_targets_hold_between_pulses():
    task = generate(TaskConfig(length=2000, seed=1))
    silent = ~np.any(task.inputs[1:] != 0, axis=1)
    np.testing.assert_array_equal(task.targets[1:][silent], task.targets[:-1][silent])
    np.testing.assert_array_equal(task.targets[0], np.where(task.inputs[0] != 0, task.inputs[0], 1.0))


def test_task_frame():
    frame = generate(TaskConfig(length=10)).to_frame()
    assert list(frame.columns) == ["step", "u_1", "u_2", "y_1", "y_2"]
    assert len(frame) == 10


def test_mse():
    assert mse([[0.9, 1.0]], [[1.0, 1.0]]) == pytest.approx(0.005)
    assert mse(np.ones((4, 2)), np.ones((4, 2))) == 0.0
    with pytest.raises(EmptySequenceError):
        mse(np.zeros((0, 2)), np.zeros((0, 2)))
    with pytest.raises(EsnDimensionError):
        mse(np.zeros((3, 2)), np.zeros((3, 1)))


def test_count_switch_errors():
    inputs = np.zeros((38, 1))
    inputs[[0, 15, 30]] = [[-1.0], [1.0], [-1.0]]
    targets = hold_and_flip(inputs, np.ones(1))
    outputs = targets.copy()
    assert count_switch_errors(inputs, targets, outputs) == 0
    outputs[16:30] = -0.8
    assert count_switch_errors(inputs, targets, outputs) == 1
    # the last pulse leaves fewer than settle steps and is not checked
    outputs[30:] = 0.9
    assert count_switch_errors(inputs, targets, outputs) == 1


def test_table_actions_cover_all_twenty():
    task = generate(TaskConfig(length=10000, seed=0))
    actions = table_actions(task)
    assert len(actions) == 20
    assert ((1, 1), (0, 0)) in actions
    assert ((1, -1), (-1, 0)) in actions
