import logging

import numpy as np

from esnena import artifacts
from esnena.commands import out_path
from esnena.esn import prime_state, run_closed_loop
from esnena.schemas import TaskConfig
from esnena.task import generate

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("simulate", help="Run a trained model in closed loop on a flip-flop sequence")
    parser.add_argument("--model", required=True, help="Model file")
    parser.add_argument("--bits", type=int, help="Defaults to the model's input count")
    parser.add_argument("--pulse-prob", type=float, default=0.1)
    parser.add_argument("--length", type=int, default=1000)
    parser.add_argument("--noise-std", type=float, help="Overrides the model's noise")
    parser.add_argument("--task-out", help="Also write the task CSV (step, u_*, y_*)")
    parser.add_argument("--out", help="Trajectory CSV, defaults to traj.csv in --out-dir")
    parser.set_defaults(func=run)


def run(args) -> int:
    model = artifacts.get_model(args.model)
    task = generate(TaskConfig(bits=args.bits or model.n_i, pulse_prob=args.pulse_prob, length=args.length,
                               seed=args.seed))
    trajectory = run_closed_loop(model, task.inputs, x0=prime_state(model), rng=np.random.default_rng(args.seed),
                                 targets=task.targets, noise_std=args.noise_std)
    if args.task_out:
        artifacts.create_task(task, out_path(args, "task.csv", args.task_out))
    path = artifacts.create_trajectory(trajectory, out_path(args, "traj.csv", args.out))
    logger.info("Wrote %d steps to %s", len(trajectory), path)
    return 0
