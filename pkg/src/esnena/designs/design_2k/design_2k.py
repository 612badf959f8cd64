import logging

import numpy as np
from scipy.linalg import block_diag

from esnena.bifurcation import Map1DParams, fixed_points_1d, fold_curve
from esnena.esn import EsnModel
from esnena.exceptions import DesignRangeError
from esnena.objects import AbstractDesign, within_range
from esnena.schemas import DesignType

logger = logging.getLogger(__name__)

SADDLE_LIMIT = 2.15


def design_block(s: float) -> np.ndarray:
    return np.array([[1.1, 4.0], [-s, 4.0]])


def coupling_limit(block: np.ndarray, k: int) -> float:
    """
    Bound on the off-block coupling gamma below which every block keeps its own fold structure.

    Each output neuron receives gamma from the 2k - 2 neurons of the other blocks. Their activity is bounded by
    y*, the positive stable root of y = tanh(block[1, 1] y), so the bias seen by the output neuron stays below the
    fold value w_+(block[0, 0]) while |gamma| < w_+(block[0, 0]) / (y* (2k - 2)).
    """
    if k < 2:
        return np.inf
    w_plus, _ = fold_curve(block[0, 0])
    y_star = max(x for x, stability in fixed_points_1d(Map1DParams(block[1, 1], 0.0)) if stability == "stable")
    return w_plus / (y_star * (2 * k - 2))


def make_design_2k(k: int, s: float, omega_in: float = 1.0, gamma: float = 0.0) -> EsnModel:
    """
    k-bit flip-flop from k copies of the block [[1.1, 4], [-s, 4]].

    Bit j drives the second neuron of block j and is read from the first one.

    :param k: Number of bits.
    :type k: int
    :param s: Saddle parameter of the block.
    :type s: float
    :param omega_in: Input scale.
    :type omega_in: float
    :param gamma: Coupling from every neuron of the other blocks into each output neuron.
    :type gamma: float
    :return: The 2k-neuron trained model.
    :rtype: EsnModel
    :raises DesignRangeError: If s is outside [0, 2.15) or gamma is not below the coupling limit.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not within_range(s, (0.0, SADDLE_LIMIT)):
        raise DesignRangeError("s", s, SADDLE_LIMIT)
    block = design_block(s)
    reservoir = block_diag(*([block] * k))
    if gamma != 0.0:
        limit = coupling_limit(block, k)
        if abs(gamma) >= limit:
            raise DesignRangeError("gamma", abs(gamma), limit, "Off-block coupling crosses the fold curve.")
        for j in range(k):
            outside = np.ones(2 * k, dtype=bool)
            outside[2 * j:2 * j + 2] = False
            reservoir[2 * j, outside] = gamma
    input_weights = np.zeros((2 * k, k))
    readout = np.zeros((k, 2 * k))
    for j in range(k):
        input_weights[2 * j + 1, j] = omega_in
        readout[j, 2 * j] = 1.0
    return EsnModel(reservoir=reservoir, input_weights=input_weights, feedback_weights=np.zeros((2 * k, k)),
                    readout=readout, leak_rate=1.0, noise_std=0.0,
                    provenance=f"design_2k(k={k}, s={s}, omega_in={omega_in}, gamma={gamma})")


class Design(AbstractDesign):

    @staticmethod
    def design_type():
        return DesignType(name="2k-D flip-flop",
                          design_description="Block-diagonal reservoir with one two-neuron block per bit",
                          args={
                              "bits": "Number of bits k",
                              "s": "Saddle parameter in [0, 2.15)",
                              "omega_in": "Input scale (default 1)",
                              "gamma": "Optional off-block coupling (default 0)",
                          })

    def __init__(self, bits: int = 2, s: float = 2.0, omega_in: float = 1.0, gamma: float = 0.0):
        self.bits = int(bits)
        self.s = float(s)
        self.omega_in = float(omega_in)
        self.gamma = float(gamma)

    def build(self) -> EsnModel:
        return make_design_2k(self.bits, self.s, self.omega_in, self.gamma)
