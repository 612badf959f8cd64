import os
from typing import Optional

from esnena import artifacts
from esnena.schemas import RunConfig


def run_config(args) -> Optional[RunConfig]:
    """
    The RunConfig given with --config, if any.
    """
    return artifacts.get_run_config(args.config) if getattr(args, "config", None) else None


def out_path(args, name: str, override: Optional[str] = None) -> str:
    """
    Path of an output file: an explicit --out wins, otherwise name inside --out-dir.
    """
    if override:
        directory = os.path.dirname(override)
        if directory:
            os.makedirs(directory, exist_ok=True)
        return override
    return artifacts.bundle_path(args.out_dir, name)
