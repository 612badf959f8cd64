import logging

from esnena import artifacts
from esnena.commands import out_path
from esnena.ena import extract_from_trajectory, label_edges
from esnena.fixed_points import FixedPoint, Stability, locate_fixed_points
from esnena.schemas import ExtractionConfig, FixedPointConfig, GridSpec, TaskConfig, ThresholdEstimateConfig

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("extract", help="Extract the excitable network attractor")
    parser.add_argument("--model", required=True, help="Model file")
    parser.add_argument("--traj", required=True, help="Trajectory CSV with input pulses")
    parser.add_argument("--fixed-points", help="Fixed-point report, located from the trajectory when omitted")
    parser.add_argument("--starts", type=int, default=100, help="search starts when no report is given")
    parser.add_argument("--grid-dim", type=int, help="lattice dimension, defaults to the LSS dimension")
    parser.add_argument("--grid-edge", type=float, default=4.0, help="hypercube edge length")
    parser.add_argument("--grid-points", type=int, default=101, help="lattice points per edge")
    parser.add_argument("--no-threshold-estimate", action="store_true")
    parser.add_argument("--out", help="Graph JSON, defaults to ena.json in --out-dir; DOT is written alongside")
    parser.set_defaults(func=run)


def run(args) -> int:
    model = artifacts.get_model(args.model)
    trajectory = artifacts.get_trajectory(args.traj)
    if args.fixed_points:
        report = artifacts.get_fixed_points(args.fixed_points)
        attractors = [FixedPoint.from_info(p) for p in report.fixed_points]
    else:
        attractors, _ = locate_fixed_points(model, trajectory, FixedPointConfig(n_starts=args.starts, seed=args.seed))
        logger.info("No fixed-point report given, located %d fixed points", len(attractors))
    attractors = [p for p in attractors if p.stability is Stability.STABLE]
    config = ExtractionConfig(
        grid=GridSpec(dim=args.grid_dim, edge_length=args.grid_edge, points_per_edge=args.grid_points),
        threshold_estimate=ThresholdEstimateConfig(enabled=not args.no_threshold_estimate, seed=args.seed))
    graph, _ = extract_from_trajectory(model, trajectory, attractors, config)
    graph = label_edges(graph, TaskConfig(bits=model.n_o))
    json_path = out_path(args, "ena.json", args.out)
    artifacts.create_graph(graph, json_path, json_path[:-5] + ".dot" if json_path.endswith(".json") else None)
    logger.info("Wrote graph with %d nodes and %d edges to %s", len(graph.nodes), len(graph.edges), json_path)
    return 0
