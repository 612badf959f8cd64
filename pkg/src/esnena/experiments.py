"""
Noise robustness sweeps and diagnosis of closed-loop errors against an ENA graph.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from esnena import globals as esnena_globals
from esnena.ena import EnaGraph
from esnena.esn import EsnModel, Trajectory
from esnena.exceptions import EsnUsageError
from esnena.schemas import ErrorInterval, ErrorReport, RobustnessRanking, SweepResult, TaskConfig
from esnena.trainer import evaluate

logger = logging.getLogger(__name__)

NOISE_LEVELS = [1e-4, 2e-2, 5e-2, 8e-2, 1e-1, 1.2e-1, 1.4e-1, 1.6e-1]
FAILURE_THRESHOLD = 0.1
ERROR_THRESHOLD = 0.25


def run_noise_sweep(model: EsnModel, task: TaskConfig, levels: Sequence[float] = tuple(NOISE_LEVELS),
                    test_length: int = 100000, seeds: Sequence[int] = (0,), washout: int = 100,
                    failure_threshold: float = FAILURE_THRESHOLD) -> SweepResult:
    """
    Closed-loop MSE on one input sequence under increasing state noise.

    Every level is run once per noise seed and the MSEs are averaged. The breakdown level is the first level whose
    mean MSE exceeds failure_threshold.

    :param model: Trained model.
    :type model: EsnModel
    :param task: Task of the shared input sequence, its length is replaced by test_length.
    :type task: TaskConfig
    :param levels: Strictly increasing noise standard deviations.
    :type levels: Sequence[float]
    :param test_length: Steps per run.
    :type test_length: int
    :param seeds: Noise seeds averaged per level.
    :type seeds: Sequence[int]
    :return: MSE per level and the breakdown level.
    :rtype: SweepResult
    """
    if not model.is_trained:
        raise EsnUsageError("run_noise_sweep", "The model has no readout.")
    task = task.model_copy(update={"length": test_length})
    logger.info("Noise sweep over %d levels, %d seeds, breakdown at MSE > %.2f", len(levels), len(seeds),
                failure_threshold)
    jobs = [(level, seed) for level in levels for seed in seeds]

    def run(job: Tuple[float, int]) -> float:
        level, seed = job
        return evaluate(model, task, washout, noise_std=level, noise_seed=seed)[0]

    with ThreadPoolExecutor(max_workers=esnena_globals.num_threads) as executor:
        scores = np.array(list(executor.map(run, jobs))).reshape(len(levels), len(seeds))
    mse_per_level = [float(v) for v in scores.mean(axis=1)]
    breakdown = next((float(level) for level, value in zip(levels, mse_per_level) if value > failure_threshold),
                     None)
    return SweepResult(noise_levels=[float(v) for v in levels], mse_per_level=mse_per_level,
                       breakdown_level=breakdown, failure_threshold=failure_threshold, seeds=list(seeds))


def _intervals(mask: np.ndarray) -> List[Tuple[int, int]]:
    edges = np.diff(np.concatenate([[0], mask.astype(int), [0]]))
    return list(zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1) - 1))


def diagnose_errors(graph: EnaGraph, trajectory: Trajectory, threshold: float = ERROR_THRESHOLD) -> ErrorReport:
    """
    Attribute output errors to spurious nodes and undesired edges.

    Each maximal run of steps with |z - y| above threshold (infinity norm) is mapped onto the graph by sending
    every state, from the step before the run to its end, to the nearest node. Visits to spurious nodes and moves
    along undesired edges are reported.
    """
    if trajectory.targets is None or trajectory.outputs is None:
        raise EsnUsageError("diagnose_errors", "The trajectory needs outputs and targets.")
    nodes = graph.nodes
    if not nodes:
        raise EsnUsageError("diagnose_errors", "The graph has no nodes.")
    locations = np.array([n.location for n in nodes])
    errors = np.max(np.abs(trajectory.outputs - trajectory.targets), axis=1)
    report = ErrorReport(threshold=threshold)
    for start, end in _intervals(errors > threshold):
        window = trajectory.states[max(start - 1, 0):end + 1]
        nearest = np.argmin(np.linalg.norm(window[:, None, :] - locations[None, :, :], axis=2), axis=1)
        visited = [int(nodes[nearest[0]].index)]
        for i in nearest[1:]:
            if nodes[i].index != visited[-1]:
                visited.append(int(nodes[i].index))
        spurious = sorted({i for i in visited if graph.node(i).spurious})
        undesired = []
        for source, target in zip(visited, visited[1:]):
            edge = graph.edge(source, target)
            if edge is not None and edge.classification == "undesired":
                undesired.append((source, target))
        outputs = [[float(v) for v in graph.node(i).output] for i in spurious if graph.node(i).output is not None]
        report.intervals.append(ErrorInterval(start=int(start), end=int(end),
                                              max_error=float(errors[start:end + 1].max()), nodes=visited,
                                              spurious_nodes=spurious, undesired_edges=undesired,
                                              outputs_at_spurious=outputs))
    logger.info("%d error intervals above %.2f", len(report.intervals), threshold)
    return report


def max_undesired_beta(graph: EnaGraph) -> float:
    return max((e.effective_excitability for e in graph.edges if e.classification == "undesired"), default=0.0)


def rank_by_robustness(entries: Sequence[Tuple[EnaGraph, SweepResult]]) -> RobustnessRanking:
    """
    Check that models with larger undesired-edge excitability never break down at larger noise levels.

    A model that never breaks down counts as breaking down beyond every level.
    """
    betas = [max_undesired_beta(graph) for graph, _ in entries]
    breakdowns: List[Optional[float]] = [sweep.breakdown_level for _, sweep in entries]
    effective = [np.inf if level is None else level for level in breakdowns]
    agrees = all(effective[i] <= effective[j]
                 for i in range(len(entries)) for j in range(len(entries)) if betas[i] > betas[j])
    return RobustnessRanking(max_undesired_beta=betas, breakdown_levels=breakdowns, agrees=agrees)
