"""
k-bit flip-flop task: input pulses, hold/flip targets and scores.
"""
import logging
from dataclasses import dataclass
from typing import Set, Tuple

import numpy as np
import pandas as pd

from esnena.exceptions import EmptySequenceError, EsnDimensionError
from esnena.schemas import TaskConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TaskData:
    inputs: np.ndarray
    targets: np.ndarray
    initial_state: np.ndarray
    config: TaskConfig

    def __len__(self) -> int:
        return len(self.inputs)

    def to_frame(self) -> pd.DataFrame:
        """
        Table with columns step, u_1..u_k, y_1..y_k.
        """
        columns = {"step": np.arange(len(self))}
        for prefix, block in (("u", self.inputs), ("y", self.targets)):
            for j in range(block.shape[1]):
                columns[f"{prefix}_{j + 1}"] = block[:, j]
        return pd.DataFrame(columns)


def hold_and_flip(inputs: np.ndarray, initial_state: np.ndarray) -> np.ndarray:
    """
    Targets of a pulse sequence: channel j takes the sign of u_j[k] when it is nonzero and holds otherwise.
    """
    steps = np.arange(len(inputs))
    targets = np.empty(inputs.shape, dtype=float)
    for j in range(inputs.shape[1]):
        column = inputs[:, j]
        last_pulse = np.maximum.accumulate(np.where(column != 0, steps, -1))
        targets[:, j] = np.where(last_pulse >= 0, np.sign(column[last_pulse]), initial_state[j])
    return targets


def generate(config: TaskConfig) -> TaskData:
    """
    Draw a flip-flop sequence.

    Each step is silent with probability 1 - p, otherwise one uniformly chosen channel receives a +1 or -1 pulse.
    Targets start from the all +1 memory state and change at the pulse step itself.

    :param config: Task parameters.
    :type config: TaskConfig
    :return: Inputs and targets.
    :rtype: TaskData
    """
    rng = np.random.default_rng(config.seed)
    pulses = rng.random(config.length) < config.pulse_prob
    channels = rng.integers(0, config.bits, config.length)
    signs = rng.choice([-1.0, 1.0], config.length)
    inputs = np.zeros((config.length, config.bits))
    inputs[pulses, channels[pulses]] = signs[pulses]
    initial_state = np.ones(config.bits)
    return TaskData(inputs=inputs, targets=hold_and_flip(inputs, initial_state), initial_state=initial_state,
                    config=config)


def mse(outputs, targets) -> float:
    outputs = np.asarray(outputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if outputs.shape != targets.shape:
        raise EsnDimensionError("outputs", targets.shape, outputs.shape)
    if outputs.size == 0:
        raise EmptySequenceError("outputs")
    return float(np.mean((outputs - targets) ** 2))


def count_switch_errors(inputs, targets, outputs, settle: int = 10) -> int:
    """
    Count pulses after which the network does not end up in the target memory state.

    A pulse is checked on the step before the next pulse (or the last step), provided at least settle steps are
    available to finish the switch. A check fails if any output sign differs from its target.

    :param settle: Minimum number of steps a pulse gets before it is checked.
    :type settle: int
    :return: Number of failed checks.
    :rtype: int
    """
    inputs = np.asarray(inputs)
    targets = np.asarray(targets)
    outputs = np.asarray(outputs)
    pulse_steps = np.flatnonzero(np.any(inputs != 0, axis=1))
    ends = np.append(pulse_steps[1:], len(inputs))
    errors = 0
    for start, end in zip(pulse_steps, ends):
        if end - start < settle:
            continue
        if np.any(np.sign(outputs[end - 1]) != np.sign(targets[end - 1])):
            errors += 1
    return errors


def table_actions(task: TaskData) -> Set[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """
    Pairs (memory state before the step, input) that occur in a sequence.

    With two bits there are 4 memory states and 5 inputs, 20 actions in total.
    """
    before = np.vstack([task.initial_state[None, :], task.targets[:-1]])
    return {(tuple(int(v) for v in state), tuple(int(v) for v in u)) for state, u in zip(before, task.inputs)}
