import logging

from esnena import artifacts
from esnena.commands import out_path, run_config
from esnena.esn import build_random_esn
from esnena.schemas import EsnBuildConfig, TaskConfig, TrainConfig
from esnena.trainer import train

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("train", help="Build a random ESN and fit its readout by ridge regression")
    parser.add_argument("--neurons", "--n-r", dest="n_r", type=int, default=500, help="Reservoir size")
    parser.add_argument("--sparsity", type=float, default=0.95)
    parser.add_argument("--rho", "--spectral-radius", dest="spectral_radius", type=float, default=0.9)
    parser.add_argument("--leak-rate", type=float, default=1.0)
    parser.add_argument("--noise-std", type=float, default=1e-4)
    parser.add_argument("--bits", type=int, default=2)
    parser.add_argument("--pulse-prob", type=float, default=0.1)
    parser.add_argument("--lambda", "--ridge-lambda", dest="ridge_lambda", type=float, default=1e-4)
    parser.add_argument("--washout", type=int, default=100)
    parser.add_argument("--length", "--train-length", dest="train_length", type=int, default=50000)
    parser.add_argument("--test-length", type=int, default=10000)
    parser.add_argument("--out", help="Model file, defaults to model.json in --out-dir")
    parser.set_defaults(func=run)


def run(args) -> int:
    config = run_config(args)
    if config is not None and config.esn is not None:
        build, task, training = config.esn, config.task, config.train
    else:
        build = EsnBuildConfig(n_r=args.n_r, n_i=args.bits, n_o=args.bits, sparsity=args.sparsity,
                               spectral_radius=args.spectral_radius, leak_rate=args.leak_rate,
                               noise_std=args.noise_std, seed=args.seed)
        task = TaskConfig(bits=args.bits, pulse_prob=args.pulse_prob, seed=args.seed)
        training = TrainConfig(ridge_lambda=args.ridge_lambda, washout=args.washout,
                               train_length=args.train_length, test_length=args.test_length,
                               noise_std=args.noise_std, seed=args.seed, test_seed=args.seed + 1)
    model = build_random_esn(**build.model_dump())
    result = train(model, task, training)
    path = artifacts.create_model(result.model, out_path(args, "model.json", args.out))
    artifacts.write_json(result.report, out_path(args, "training.json"))
    logger.info("Wrote %s (test MSE %.3e)", path, result.test_mse)
    return 0
