import logging

import numpy as np
import pandas as pd

from esnena.bifurcation import fold_curve, nullcline_polylines, nullclines_2d
from esnena.commands import out_path

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("bifurcation", help="Fold curve and nullclines of small tanh maps")
    tools = parser.add_subparsers(dest="tool", required=True)
    parser_fold = tools.add_parser("fold-curve", help="Sample w_pm(m) of x -> tanh(m x + w)")
    parser_fold.add_argument("--m-min", type=float, default=1.0)
    parser_fold.add_argument("--m-max", type=float, default=5.0)
    parser_fold.add_argument("--samples", type=int, default=200)
    parser_fold.add_argument("--out", help="CSV file, defaults to fold_curve.csv in --out-dir")
    parser_fold.set_defaults(func=run_fold_curve)
    parser_null = tools.add_parser("nullclines", help="Nullclines and fixed points of a two-neuron map")
    for name in ("a", "b", "c", "d"):
        parser_null.add_argument(f"--{name}", type=float, required=True)
    parser_null.add_argument("--samples", type=int, default=1000)
    parser_null.add_argument("--out", help="CSV file, defaults to nullclines.csv in --out-dir")
    parser_null.set_defaults(func=run_nullclines)


def run_fold_curve(args) -> int:
    m = np.linspace(args.m_min, args.m_max, args.samples)
    w = np.array([fold_curve(value) for value in m])
    path = out_path(args, "fold_curve.csv", args.out)
    pd.DataFrame({"m": m, "w_plus": w[:, 0], "w_minus": w[:, 1]}).to_csv(path, index=False)
    logger.info("Wrote %s", path)
    return 0


def run_nullclines(args) -> int:
    first, second = nullcline_polylines(args.a, args.b, args.c, args.d, args.samples)
    result = nullclines_2d(args.a, args.b, args.c, args.d)
    frames = [
        pd.DataFrame({"kind": "x_nullcline", "x": first[:, 0], "y": first[:, 1], "stability": ""}),
        pd.DataFrame({"kind": "y_nullcline", "x": second[:, 0], "y": second[:, 1], "stability": ""}),
        pd.DataFrame({"kind": "fixed_point",
                      "x": [p.location[0] for p in result.fixed_points],
                      "y": [p.location[1] for p in result.fixed_points],
                      "stability": [p.stability for p in result.fixed_points]}),
    ]
    path = out_path(args, "nullclines.csv", args.out)
    pd.concat(frames, ignore_index=True).to_csv(path, index=False)
    logger.info("%d fixed points, wrote %s", result.count, path)
    return 0
