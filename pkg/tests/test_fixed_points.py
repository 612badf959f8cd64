import dataclasses
import itertools

import numpy as np
import pytest
from scipy.optimize import check_grad

from esnena.bifurcation import nullclines_2d
from esnena.designs.design_2d.design_2d import make_design_2d
from esnena.designs.design_2k.design_2k import make_design_2k
from esnena.esn import Trajectory, build_random_esn, prime_state, run_closed_loop
from esnena.exceptions import EsnUsageError, NotAFixedPoint
from esnena.fixed_points import BOX_START, FixedPoint, Stability, aggregate, classify, find_fixed_points, \
    fixed_point_report, kinetic_energy, kinetic_energy_gradient, locate_fixed_points
from esnena.schemas import FixedPointConfig, TaskConfig
from esnena.task import generate


def grid_trajectory(points_per_edge=21):
    axis = np.linspace(-1.0, 1.0, points_per_edge)
    states = np.array(list(itertools.product(axis, axis)))
    return Trajectory.from_arrays(states=states, inputs=np.zeros((len(states), 2)))


def point(location, unstable_count=0):
    location = np.asarray(location, dtype=float)
    return FixedPoint(location=location, energy=0.0, jacobian_spectrum=np.zeros(len(location)),
                      unstable_count=unstable_count)


def test_gradient_matches_finite_differences():
    model = make_design_2d(0.2)
    for x in np.random.default_rng(0).uniform(-1.0, 1.0, (5, 2)):
        error = check_grad(lambda v: kinetic_energy(model, v), lambda v: kinetic_energy_gradient(model, v), x)
        assert error < 1e-6


def test_gradient_random_esn():
    model = build_random_esn(n_r=30, n_i=2, n_o=2, sparsity=0.5, spectral_radius=1.2, seed=1)
    model = model.with_readout(np.random.default_rng(1).normal(size=(2, 30)) * 0.1)
    x = np.random.default_rng(2).uniform(-0.5, 0.5, 30)
    error = check_grad(lambda v: kinetic_energy(model, v), lambda v: kinetic_energy_gradient(model, v), x)
    assert error < 1e-5


@pytest.mark.slow
def test_gradient_500_neurons_central_differences():
    model = build_random_esn(n_r=500, n_i=2, n_o=2, sparsity=0.95, spectral_radius=0.9, seed=0)
    model = model.with_readout(np.random.default_rng(1).normal(size=(2, 500)) * 0.1)
    m = model.trained_reservoir.m
    h = 1e-5
    shifts = h * np.eye(500)

    def energies(x):
        q = np.tanh(x @ m.T) - x
        return 0.5 * np.sum(q ** 2, axis=1)

    for x in np.random.default_rng(2).uniform(-1.0, 1.0, (100, 500)):
        numeric = (energies(x + shifts) - energies(x - shifts)) / (2 * h)
        analytic = kinetic_energy_gradient(model, x)
        assert np.linalg.norm(analytic - numeric) < 1e-6 * np.linalg.norm(numeric)


def test_energy_scales_with_leak_rate_squared():
    model = make_design_2d(0.2)
    leaky = dataclasses.replace(model, leak_rate=0.5)
    x = np.array([0.3, -0.7])
    assert kinetic_energy(leaky, x) == pytest.approx(0.25 * kinetic_energy(model, x))


def test_origin_is_a_repeller():
    fp = classify(make_design_2d(0.2), np.zeros(2))
    assert fp.stability is Stability.REPELLER
    assert fp.unstable_count == 2
    np.testing.assert_allclose(sorted(np.abs(fp.jacobian_spectrum)), [2.4, 3.6])
    assert fp.label == "repeller"


def test_classify_rejects_non_fixed_points():
    with pytest.raises(NotAFixedPoint):
        classify(make_design_2d(0.2), [0.5, 0.5])


def test_find_fixed_points_needs_readout():
    model = build_random_esn(n_r=10, n_i=2, n_o=2, sparsity=0.5, spectral_radius=0.9, seed=0)
    with pytest.raises(EsnUsageError):
        find_fixed_points(model, grid_trajectory(3), 4)


def test_zero_starts():
    search = find_fixed_points(make_design_2d(0.2), grid_trajectory(3), 0)
    assert len(search) == 0
    assert search.dropped == 0


def test_nine_fixed_points_of_design_2d():
    trajectory = grid_trajectory()
    fixed_points, search = locate_fixed_points(make_design_2d(0.2), trajectory,
                                               FixedPointConfig(n_starts=len(trajectory)))
    assert len(fixed_points) == 9
    labels = [p.label for p in fixed_points]
    assert labels.count("stable") == 4
    assert labels.count("saddle(1)") == 4
    assert labels.count("repeller") == 1
    stable = np.array([p.location for p in fixed_points if p.stability is Stability.STABLE])
    assert len({tuple(np.sign(p)) for p in stable}) == 4
    assert sum(p.cluster_size for p in fixed_points) == len(search)
    report = fixed_point_report(fixed_points, search)
    assert len(report.fixed_points) == 9
    assert FixedPoint.from_info(report.fixed_points[0]).unstable_count == fixed_points[0].unstable_count


def test_aggregate_merges_near_duplicates():
    merged = aggregate([point([1.0, 1.0]), point([1.0 + 1e-7, 1.0]), point([1.0, 1.0 + 2e-7])])
    assert len(merged) == 1
    assert merged[0].cluster_size == 3


def test_aggregate_three_clusters():
    rng = np.random.default_rng(0)
    centres = np.array([[0.0, 0.0], [5.0, 5.0], [-5.0, 5.0]])
    points = [point(c + rng.normal(0.0, 0.01, 2)) for c in centres for _ in range(5)]
    merged = aggregate(points, seed=0)
    assert len(merged) == 3
    assert [p.cluster_size for p in merged] == [5, 5, 5]
    for p in merged:
        assert np.min(np.linalg.norm(centres - p.location, axis=1)) < 0.05


def test_aggregate_groups_by_unstable_count():
    merged = aggregate([point([0.0, 0.0], 2), point([1.0, 1.0], 0), point([1.0, 1.0], 0)])
    assert [p.unstable_count for p in merged] == [0, 2]


def test_aggregate_needs_candidates():
    with pytest.raises(EsnUsageError):
        aggregate([])


def test_four_neuron_census():
    block = nullclines_2d(1.1, 4.0, -2.0, 4.0)
    assert block.count == 5
    stable_blocks = [p.location for p in block.fixed_points if p.stability == "stable"]
    assert len(stable_blocks) == 2
    model = make_design_2k(2, 2.0)
    stable = [classify(model, np.concatenate(pair)) for pair in itertools.product(stable_blocks, repeat=2)]
    assert all(p.stability is Stability.STABLE for p in stable)
    assert len(stable) == 4


def test_aggregate_keeps_distinct_singletons():
    three = aggregate([point([1.0, 0.0], 1), point([0.0, 1.0], 1), point([-1.0, 0.0], 1)])
    assert len(three) == 3
    assert all(p.cluster_size == 1 for p in three)
    four = aggregate([point(c, 1) for c in ([1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0])])
    assert len(four) == 4


def closed_loop_trajectory(model, length=2000, seed=0):
    task = generate(TaskConfig(length=length, seed=seed))
    return run_closed_loop(model, task.inputs, x0=prime_state(model), targets=task.targets)


def test_box_starts_are_marked():
    model = make_design_2d(0.2)
    trajectory = closed_loop_trajectory(model, length=500)
    search = find_fixed_points(model, trajectory, 20, config=FixedPointConfig(box_starts=0.5))
    assert sum(c.start_index == BOX_START for c in search) > 0
    assert all(c.start_index == BOX_START or 0 <= c.start_index < len(trajectory.states) for c in search)
    only_trajectory = find_fixed_points(model, trajectory, 20, config=FixedPointConfig(box_starts=0.0))
    assert all(c.start_index != BOX_START for c in only_trajectory)


def test_design_2d_census_from_closed_loop_trajectory():
    model = make_design_2d(0.2)
    fixed_points, _ = locate_fixed_points(model, closed_loop_trajectory(model), FixedPointConfig(n_starts=200))
    labels = [p.label for p in fixed_points]
    assert len(fixed_points) == 9
    assert labels.count("stable") == 4
    assert labels.count("saddle(1)") == 4
    assert labels.count("repeller") == 1


@pytest.mark.slow
def test_design_2k_census_from_closed_loop_trajectory():
    model = make_design_2k(2, 2.0)
    fixed_points, _ = locate_fixed_points(model, closed_loop_trajectory(model, length=3000),
                                          FixedPointConfig(n_starts=3000))
    counts = {count: sum(p.unstable_count == count for p in fixed_points) for count in range(5)}
    assert len(fixed_points) == 25
    assert counts == {0: 4, 1: 8, 2: 8, 3: 4, 4: 1}
