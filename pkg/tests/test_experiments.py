import numpy as np
import pytest
from pydantic import ValidationError

from esnena.designs.design_2d.design_2d import make_design_2d
from esnena.ena import EnaEdge, EnaGraph, EnaNode, build_lss, extract_from_trajectory, label_edges
from esnena.esn import Trajectory, build_random_esn, prime_state, run_closed_loop
from esnena.exceptions import EsnUsageError
from esnena.experiments import NOISE_LEVELS, diagnose_errors, max_undesired_beta, rank_by_robustness, \
    run_noise_sweep
from esnena.fixed_points import FixedPoint, Stability, locate_fixed_points
from esnena.schemas import ExtractionConfig, FixedPointConfig, GridSpec, SweepResult, TaskConfig, TrainConfig
from esnena.task import generate
from esnena.trainer import train


def node(index, location, spurious=False):
    location = np.asarray(location, dtype=float)
    fixed_point = FixedPoint(location=location, energy=0.0, jacobian_spectrum=np.zeros(2), unstable_count=0)
    return EnaNode(index=index, fixed_point=fixed_point, output=location, spurious=spurious)


def graph_with_beta(beta):
    graph = EnaGraph()
    graph.add_node(node(0, [1.0, 1.0]))
    graph.add_node(node(1, [-1.0, -1.0]))
    graph.add_edge(EnaEdge(source=0, target=1, threshold=1.0 / beta, volume_ratio=1.0, count=1,
                           classification="undesired"))
    return graph


def sweep(breakdown):
    levels = [0.01, 0.05, 0.1]
    mse = [0.0 if breakdown is None or level < breakdown else 1.0 for level in levels]
    return SweepResult(noise_levels=levels, mse_per_level=mse, breakdown_level=breakdown)


def test_noise_sweep_design_2d():
    result = run_noise_sweep(make_design_2d(0.2), TaskConfig(), levels=[1e-4, 1e-2, 5.0], test_length=2000,
                             seeds=(0, 1))
    assert result.mse_per_level[0] < 1e-2
    assert result.mse_per_level[1] < 1e-2
    assert result.mse_per_level[2] > 0.1
    assert result.breakdown_level == 5.0
    assert result.seeds == [0, 1]


def test_noise_sweep_needs_readout():
    model = build_random_esn(n_r=10, n_i=2, n_o=2, sparsity=0.5, spectral_radius=0.9, seed=0)
    with pytest.raises(EsnUsageError):
        run_noise_sweep(model, TaskConfig(), test_length=200)


def test_sweep_levels_increasing():
    with pytest.raises(ValidationError):
        SweepResult(noise_levels=[0.1, 0.05], mse_per_level=[0.0, 0.0])
    with pytest.raises(ValidationError):
        SweepResult(noise_levels=[0.05, 0.1], mse_per_level=[0.0])


def test_diagnose_clean_run():
    model = make_design_2d(0.2)
    task = generate(TaskConfig(length=1000, seed=2))
    trajectory = run_closed_loop(model, task.inputs, x0=prime_state(model), targets=task.targets)
    graph = EnaGraph()
    for index, location in enumerate([[1, 1], [1, -1], [-1, 1], [-1, -1]]):
        graph.add_node(node(index, location))
    assert diagnose_errors(graph, trajectory).intervals == []


def test_diagnose_spurious_visit():
    graph = EnaGraph()
    graph.add_node(node(0, [1.0, 1.0]))
    graph.add_node(node(1, [-1.0, 1.0]))
    graph.add_node(node(2, [0.0, 0.9], spurious=True))
    graph.add_edge(EnaEdge(source=2, target=1, threshold=1.0, volume_ratio=1.0, count=1,
                           classification="undesired"))
    states = [[1, 1]] * 3 + [[0, 0.9]] * 2 + [[-1, 1]] * 2 + [[1, 1]] * 2
    trajectory = Trajectory.from_arrays(states=states, inputs=np.zeros((9, 2)), outputs=states,
                                        targets=np.ones((9, 2)))
    report = diagnose_errors(graph, trajectory)
    assert len(report.intervals) == 1
    interval = report.intervals[0]
    assert (interval.start, interval.end) == (3, 6)
    assert interval.max_error == pytest.approx(2.0)
    assert interval.nodes == [0, 2, 1]
    assert interval.spurious_nodes == [2]
    assert interval.undesired_edges == [(2, 1)]
    assert interval.outputs_at_spurious == [[0.0, 0.9]]


def test_diagnose_needs_targets():
    trajectory = Trajectory.from_arrays(states=np.zeros((3, 2)), inputs=np.zeros((3, 2)))
    with pytest.raises(EsnUsageError):
        diagnose_errors(graph_with_beta(1.0), trajectory)


def test_max_undesired_beta():
    assert max_undesired_beta(graph_with_beta(2.0)) == pytest.approx(2.0)
    assert max_undesired_beta(EnaGraph()) == 0.0


def test_rank_by_robustness():
    ranking = rank_by_robustness([(graph_with_beta(2.0), sweep(0.05)), (graph_with_beta(1.0), sweep(0.1)),
                                  (graph_with_beta(0.5), sweep(None))])
    assert ranking.agrees
    assert ranking.max_undesired_beta == pytest.approx([2.0, 1.0, 0.5])
    assert ranking.breakdown_levels == [0.05, 0.1, None]
    swapped = rank_by_robustness([(graph_with_beta(2.0), sweep(0.1)), (graph_with_beta(1.0), sweep(0.05))])
    assert not swapped.agrees


def trained_flip_flop(seed):
    model = build_random_esn(n_r=500, n_i=2, n_o=2, sparsity=0.95, spectral_radius=0.9, seed=seed, noise_std=1e-4)
    result = train(model, TaskConfig(seed=seed), TrainConfig(seed=seed, test_seed=seed + 100))
    task = generate(TaskConfig(length=5000, seed=seed + 200))
    trajectory = run_closed_loop(result.model, task.inputs, x0=prime_state(result.model), targets=task.targets)
    fixed_points, _ = locate_fixed_points(result.model, trajectory, FixedPointConfig(n_starts=200, box_starts=0.0,
                                                                                     seed=seed))
    attractors = [p for p in fixed_points if p.stability is Stability.STABLE]
    config = ExtractionConfig(grid=GridSpec(dim=2, edge_length=4.0, points_per_edge=41))
    graph, pdvs = extract_from_trajectory(result.model, trajectory, attractors, config)
    return result, label_edges(graph, TaskConfig()), pdvs


@pytest.fixture(scope="module")
def trained_models():
    return [trained_flip_flop(seed) for seed in (0, 1)]


@pytest.mark.slow
def test_trained_esn_ena(trained_models):
    result, graph, pdvs = trained_models[0]
    assert result.test_mse < 1e-2
    stable = [node for node in graph.nodes if node.fixed_point.stability is Stability.STABLE]
    assert len(stable) >= 4
    assert {node.pattern for node in stable if not node.spurious} == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
    for node in stable:
        if node.lss is not None:
            assert build_lss(node.fixed_point, pdvs).dim <= 3


@pytest.mark.slow
def test_larger_undesired_beta_breaks_down_first(trained_models):
    entries = []
    for result, graph, _ in trained_models:
        sweep = run_noise_sweep(result.model, TaskConfig(seed=7), levels=NOISE_LEVELS, test_length=20000)
        entries.append((graph, sweep))
    ranking = rank_by_robustness(entries)
    assert ranking.max_undesired_beta == [max_undesired_beta(graph) for graph, _ in entries]
    assert ranking.agrees
