import logging

from esnena import artifacts
from esnena.commands import out_path
from esnena.esn import Trajectory
from esnena.experiments import NOISE_LEVELS, diagnose_errors, run_noise_sweep
from esnena.schemas import TaskConfig

logger = logging.getLogger(__name__)


def register(subparsers):
    parser_sweep = subparsers.add_parser("sweep-noise", help="Closed-loop MSE under increasing state noise")
    parser_sweep.add_argument("--model", required=True, help="Model file")
    parser_sweep.add_argument("--levels", type=float, nargs="+", default=NOISE_LEVELS)
    parser_sweep.add_argument("--length", type=int, default=100000)
    parser_sweep.add_argument("--seeds", type=int, default=5, help="Noise seeds averaged per level")
    parser_sweep.add_argument("--pulse-prob", type=float, default=0.1)
    parser_sweep.add_argument("--out", help="Report file, defaults to sweep.json in --out-dir")
    parser_sweep.set_defaults(func=run_sweep)
    parser_diagnose = subparsers.add_parser("diagnose", help="Attribute output errors to graph nodes and edges")
    parser_diagnose.add_argument("--model", required=True, help="Model file")
    parser_diagnose.add_argument("--graph", required=True, help="Labelled graph JSON")
    parser_diagnose.add_argument("--traj", required=True, help="Trajectory CSV with targets")
    parser_diagnose.add_argument("--threshold", type=float, default=0.25)
    parser_diagnose.add_argument("--out", help="Report file, defaults to diagnosis.json in --out-dir")
    parser_diagnose.set_defaults(func=run_diagnose)


def run_sweep(args) -> int:
    model = artifacts.get_model(args.model)
    task = TaskConfig(bits=model.n_i, pulse_prob=args.pulse_prob, seed=args.seed)
    result = run_noise_sweep(model, task, sorted(args.levels), args.length,
                             seeds=list(range(args.seed, args.seed + args.seeds)))
    path = artifacts.write_json(result, out_path(args, "sweep.json", args.out))
    logger.info("Breakdown at %s, wrote %s", result.breakdown_level, path)
    return 0


def run_diagnose(args) -> int:
    model = artifacts.get_model(args.model)
    graph = artifacts.get_graph(args.graph)
    trajectory = artifacts.get_trajectory(args.traj)
    if trajectory.outputs is None and trajectory.targets is not None:
        trajectory = Trajectory.from_arrays(trajectory.states, trajectory.inputs,
                                             outputs=model.output(trajectory.states), targets=trajectory.targets)
    report = diagnose_errors(graph, trajectory, args.threshold)
    path = artifacts.write_json(report, out_path(args, "diagnosis.json", args.out))
    logger.info("%d error intervals, wrote %s", len(report.intervals), path)
    return 0
