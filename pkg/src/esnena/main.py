import argparse
import logging
import sys
from typing import List, Optional

from esnena.commands import bifurcation, design, experiments, extract, fixed_points, pipeline, simulate, train
from esnena.designs import build_design_dict
from esnena.exceptions import ArtifactError, EsnEnaException, PipelineStageError, STAGE_EXIT_CODES

logger = logging.getLogger(__name__)

description = """
Train echo state networks on k-bit flip-flop tasks, locate the fixed points of the trained dynamics and extract
the excitable network attractor (ENA) explaining how the network switches between memory states.

Artifacts are plain files: models and reports are JSON, trajectories CSV and graphs DOT.
"""

commands = [train, simulate, fixed_points, extract, design, bifurcation, experiments, pipeline]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esnena", description=description)
    parser.add_argument("--seed", type=int, default=0, help="Seed for every random draw of the command")
    parser.add_argument("--out-dir", default=".", help="Directory receiving output files")
    parser.add_argument("--config", help="RunConfig JSON file")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in commands:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="%(levelname)s: %(message)s", level=getattr(logging, args.log_level))
    try:
        build_design_dict()
        return args.func(args)
    except PipelineStageError as e:
        logger.error(e.message)
        return e.exit_code
    except ArtifactError as e:
        logger.error(e.message)
        return STAGE_EXIT_CODES["load"]
    except EsnEnaException as e:
        logger.error(e.message)
        return 1


if __name__ == "__main__":
    sys.exit(main())
