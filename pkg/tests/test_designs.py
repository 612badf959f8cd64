import itertools

import numpy as np
import pytest

from esnena.bifurcation import nullclines_2d
from esnena.commands.design import build_design
from esnena.designs import build_design_dict, get_design_module
from esnena.designs.design_2d.design_2d import COUPLING_LIMIT, make_design_2d
from esnena.designs.design_2k import design_2k
from esnena.designs.design_2k.design_2k import coupling_limit, design_block, make_design_2k
from esnena.esn import prime_state, run_closed_loop
from esnena.exceptions import DesignRangeError, EsnEnaModuleError
from esnena.fixed_points import Stability, classify
from esnena.globals import design_types_info
from esnena.objects import within_range
from esnena.schemas import DesignConfig, TaskConfig
from esnena.task import count_switch_errors, generate, hold_and_flip


def spaced_pulses(bits, length, gap, seed=0):
    rng = np.random.default_rng(seed)
    inputs = np.zeros((length, bits))
    for step in range(gap, length, gap):
        inputs[step, rng.integers(bits)] = rng.choice([-1.0, 1.0])
    return inputs


def test_design_discovery():
    build_design_dict()
    assert {"design_2d", "design_2k"} <= set(design_types_info)
    assert design_types_info["design_2d"].args["b"]
    with pytest.raises(EsnEnaModuleError):
        get_design_module("design_9d")


def test_build_design_from_config():
    model = build_design(DesignConfig(design_type="design_2k", args={"bits": 3, "s": 1.0}))
    assert model.n_r == 6
    assert model.is_trained
    assert get_design_module("design_2d").Design(b=0.1).info.name == "2D flip-flop"


def test_within_range():
    assert within_range(0.0, (0.0, 0.47))
    assert not within_range(0.47, (0.0, 0.47))
    assert within_range(-5.0, (None, 1.0))
    assert within_range(5.0, (0.0, None))


def test_design_2d_range():
    with pytest.raises(DesignRangeError) as error:
        make_design_2d(0.48)
    assert error.value.bifurcation_value == COUPLING_LIMIT
    with pytest.raises(DesignRangeError):
        make_design_2d(-0.1)


def test_design_2d_weights():
    model = make_design_2d(0.2)
    np.testing.assert_allclose(model.trained_reservoir.m, [[3.0, 0.6], [0.6, 3.0]])
    np.testing.assert_allclose(model.input_weights, 6.0 * np.eye(2))
    np.testing.assert_allclose(model.readout, np.eye(2))


def test_design_2d_solves_task():
    model = make_design_2d(0.2)
    task = generate(TaskConfig(length=10000, seed=5))
    trajectory = run_closed_loop(model, task.inputs, x0=prime_state(model), targets=task.targets)
    assert count_switch_errors(task.inputs, task.targets, trajectory.outputs) == 0


def test_design_2k_range():
    with pytest.raises(DesignRangeError):
        make_design_2k(2, 2.2)
    with pytest.raises(ValueError):
        make_design_2k(0, 1.0)


def test_design_2k_weights():
    model = make_design_2k(2, 2.0)
    np.testing.assert_allclose(model.reservoir[:2, :2], design_block(2.0))
    np.testing.assert_allclose(model.reservoir[:2, 2:], 0.0)
    assert model.input_weights[1, 0] == 1.0
    assert model.input_weights[3, 1] == 1.0
    assert model.readout[0, 0] == 1.0
    assert model.readout[1, 2] == 1.0


def test_design_2k_solves_spaced_pulses():
    model = make_design_2k(2, 2.0)
    inputs = spaced_pulses(2, 4000, 25)
    targets = hold_and_flip(inputs, np.ones(2))
    trajectory = run_closed_loop(model, inputs, x0=prime_state(model), targets=targets)
    assert count_switch_errors(inputs, targets, trajectory.outputs) == 0


def thin_pulses(inputs, gap):
    thinned = np.zeros_like(inputs)
    for j in range(inputs.shape[1]):
        last = -gap
        for step in np.flatnonzero(inputs[:, j]):
            if step - last >= gap:
                thinned[step, j] = inputs[step, j]
                last = step
    return thinned


def test_design_2k_solves_task_with_spaced_flips():
    model = make_design_2k(2, 2.0)
    inputs = thin_pulses(generate(TaskConfig(length=10000, seed=5)).inputs, 10)
    targets = hold_and_flip(inputs, np.ones(2))
    trajectory = run_closed_loop(model, inputs, x0=prime_state(model), targets=targets)
    assert np.count_nonzero(inputs) > 400
    assert count_switch_errors(inputs, targets, trajectory.outputs) == 0


def test_design_2k_three_bits_has_eight_attractors():
    block = nullclines_2d(1.1, 4.0, -2.0, 4.0)
    stable_blocks = [p.location for p in block.fixed_points if p.stability == "stable"]
    model = make_design_2k(3, 2.0)
    attractors = [classify(model, np.concatenate(combo)) for combo in itertools.product(stable_blocks, repeat=3)]
    assert len(attractors) == 8
    assert all(p.stability is Stability.STABLE for p in attractors)
    assert len({tuple(np.sign(model.output(p.location))) for p in attractors}) == 8


def test_coupling_limit():
    block = design_block(2.0)
    assert coupling_limit(block, 1) == np.inf
    limit = coupling_limit(block, 2)
    assert 0.0 < limit < np.inf
    assert coupling_limit(block, 3) == pytest.approx(limit / 2)
    model = make_design_2k(2, 2.0, gamma=limit / 2)
    np.testing.assert_allclose(model.reservoir[0, 2:], limit / 2)
    np.testing.assert_allclose(model.reservoir[1, 2:], 0.0)
    with pytest.raises(DesignRangeError):
        make_design_2k(2, 2.0, gamma=1.01 * limit)
    assert design_2k.SADDLE_LIMIT == 2.15
