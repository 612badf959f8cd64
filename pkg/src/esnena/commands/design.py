import logging

from esnena import artifacts
from esnena.commands import out_path
from esnena.designs import build_design_dict, get_design_module
from esnena.esn import EsnModel
from esnena.globals import design_types_info
from esnena.schemas import DesignConfig

logger = logging.getLogger(__name__)


def build_design(config: DesignConfig) -> EsnModel:
    """
    Instantiate a design plugin and build its model.
    """
    design_module = get_design_module(config.design_type)
    return design_module.Design(**config.args).build()


def register(subparsers):
    parser = subparsers.add_parser("design", help="Write a hand-designed flip-flop reservoir")
    designs = parser.add_subparsers(dest="design", required=True)
    parser_2d = designs.add_parser("2d", help="Two coupled neurons, four stable states")
    parser_2d.add_argument("--b", type=float, default=0.2)
    parser_2d.add_argument("--omega-r", type=float, default=3.0)
    parser_2d.add_argument("--omega-in", type=float, default=6.0)
    parser_2d.add_argument("--out", help="Model file, defaults to model.json in --out-dir")
    parser_2d.set_defaults(func=run, design_type="design_2d")
    parser_2k = designs.add_parser("2k", help="One two-neuron block per bit")
    parser_2k.add_argument("--bits", type=int, default=2)
    parser_2k.add_argument("--s", type=float, default=2.0)
    parser_2k.add_argument("--omega-in", type=float, default=1.0)
    parser_2k.add_argument("--gamma", type=float, default=0.0)
    parser_2k.add_argument("--out", help="Model file, defaults to model.json in --out-dir")
    parser_2k.set_defaults(func=run, design_type="design_2k")
    parser_list = designs.add_parser("list", help="List the available designs")
    parser_list.set_defaults(func=list_designs)


def list_designs(args) -> int:
    build_design_dict()
    for name, info in sorted(design_types_info.items()):
        print(f"{name}: {info.name} - {info.design_description}")
        for arg, description in info.args.items():
            print(f"    {arg}: {description}")
    return 0


def run(args) -> int:
    if args.design_type == "design_2d":
        design_args = {"b": args.b, "omega_r": args.omega_r, "omega_in": args.omega_in}
    else:
        design_args = {"bits": args.bits, "s": args.s, "omega_in": args.omega_in, "gamma": args.gamma}
    model = build_design(DesignConfig(design_type=args.design_type, args=design_args))
    path = artifacts.create_model(model, out_path(args, "model.json", args.out))
    logger.info("Wrote %s", path)
    return 0
