import logging
from contextlib import contextmanager
from datetime import datetime, timezone
from typing import Dict

import numpy as np

from esnena import artifacts
from esnena.commands import run_config
from esnena.commands.design import build_design
from esnena.ena import extract_from_trajectory, label_edges
from esnena.esn import build_random_esn, prime_state, run_closed_loop
from esnena.exceptions import EsnUsageError, PipelineStageError
from esnena.fixed_points import Stability, fixed_point_report, locate_fixed_points
from esnena.schemas import Metrics, RunConfig
from esnena.task import count_switch_errors, generate
from esnena.trainer import train

logger = logging.getLogger(__name__)


@contextmanager
def stage(name: str):
    logger.info("Stage %s", name)
    try:
        yield
    except PipelineStageError:
        raise
    except Exception as e:
        raise PipelineStageError(name, e) from e


def pipeline(config: RunConfig, out_dir: str) -> Dict[str, str]:
    """
    Build or load a model, train it if needed, simulate, find fixed points, extract and label the ENA and write
    the artifact bundle.

    :param config: The run description.
    :type config: RunConfig
    :param out_dir: Directory receiving model.json, traj.csv, fixed_points.json, ena.dot, ena.json, metrics.json.
    :type out_dir: str
    :return: Artifact name to path.
    :rtype: Dict[str, str]
    :raises PipelineStageError: Naming the failing stage.
    """
    paths = {name: artifacts.bundle_path(out_dir, name) for name in
             ("model.json", "traj.csv", "fixed_points.json", "ena.dot", "ena.json", "metrics.json")}
    training = None
    with stage("load"):
        model = artifacts.get_model(config.model_path) if config.model_path else None
    with stage("build"):
        if config.design is not None:
            model = build_design(config.design)
        elif config.esn is not None:
            model = build_random_esn(**config.esn.model_dump())
    with stage("train"):
        if not model.is_trained:
            training = train(model, config.task, config.train)
            model = training.model
    with stage("simulate"):
        task = generate(config.task.model_copy(update={"length": config.simulate_length, "seed": config.seed}))
        trajectory = run_closed_loop(model, task.inputs, x0=prime_state(model),
                                     rng=np.random.default_rng(config.seed), targets=task.targets)
        switch_errors = count_switch_errors(trajectory.inputs, trajectory.targets, trajectory.outputs)
    with stage("fixed-points"):
        fixed_points, search = locate_fixed_points(model, trajectory, config.fixed_points)
        attractors = [p for p in fixed_points if p.stability is Stability.STABLE]
        if len(attractors) < 2:
            raise EsnUsageError("fixed-points", f"Found {len(attractors)} stable fixed points, need 2.")
    with stage("extract"):
        graph, pdvs = extract_from_trajectory(model, trajectory, attractors, config.extraction,
                                              config.fixed_points.tol)
        graph = label_edges(graph, config.task)
    with stage("report"):
        artifacts.create_model(model, paths["model.json"])
        artifacts.create_trajectory(trajectory, paths["traj.csv"])
        artifacts.create_fixed_points(fixed_point_report(fixed_points, search, config.fixed_points.seed),
                                      paths["fixed_points.json"])
        artifacts.create_graph(graph, paths["ena.json"], paths["ena.dot"])
        seeds = {"run": config.seed, "task": config.task.seed, "train": config.train.seed,
                 "test": config.train.test_seed, "fixed_points": config.fixed_points.seed,
                 "threshold_estimate": config.extraction.threshold_estimate.seed}
        if config.esn is not None:
            seeds["build"] = config.esn.seed
        metrics = Metrics(timestamp=datetime.now(timezone.utc).isoformat(),
                          train_mse=None if training is None else training.train_mse,
                          test_mse=None if training is None else training.test_mse,
                          switch_errors=switch_errors, fixed_points=len(fixed_points), stable=len(attractors),
                          nodes=len(graph.nodes), edges=len(graph.edges), pdvs=len(pdvs), seeds=seeds)
        artifacts.write_json(metrics, paths["metrics.json"])
    return paths


def register(subparsers):
    parser = subparsers.add_parser("pipeline", help="Run every stage from a RunConfig and write the bundle")
    parser.set_defaults(func=run)


def run(args) -> int:
    try:
        config = run_config(args)
    except Exception as e:
        raise PipelineStageError("load", e) from e
    if config is None:
        raise PipelineStageError("load", message="pipeline needs --config.")
    paths = pipeline(config, args.out_dir)
    logger.info("Wrote bundle to %s", args.out_dir)
    for name, path in paths.items():
        logger.debug("%s: %s", name, path)
    return 0
