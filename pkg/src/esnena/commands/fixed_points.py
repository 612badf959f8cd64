import logging

from esnena import artifacts
from esnena.commands import out_path
from esnena.fixed_points import fixed_point_report, locate_fixed_points
from esnena.schemas import FixedPointConfig

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("fixed-points", help="Locate and classify fixed points of a trained model")
    parser.add_argument("--model", required=True, help="Model file")
    parser.add_argument("--traj", required=True, help="Trajectory CSV supplying initial conditions")
    parser.add_argument("--starts", type=int, default=100)
    parser.add_argument("--tol", type=float, default=1e-6)
    parser.add_argument("--start-noise", type=float, default=0.0)
    parser.add_argument("--box-starts", type=float, default=0.5, help="share of starts spread over the state box")
    parser.add_argument("--out", help="Report file, defaults to fixed_points.json in --out-dir")
    parser.set_defaults(func=run)


def run(args) -> int:
    model = artifacts.get_model(args.model)
    trajectory = artifacts.get_trajectory(args.traj)
    config = FixedPointConfig(n_starts=args.starts, tol=args.tol, start_noise=args.start_noise,
                              box_starts=args.box_starts, seed=args.seed)
    fixed_points, search = locate_fixed_points(model, trajectory, config)
    path = artifacts.create_fixed_points(fixed_point_report(fixed_points, search, args.seed),
                                         out_path(args, "fixed_points.json", args.out))
    logger.info("Wrote %d fixed points to %s", len(fixed_points), path)
    return 0
