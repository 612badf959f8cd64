import numpy as np

from esnena.esn import EsnModel
from esnena.exceptions import DesignRangeError
from esnena.objects import AbstractDesign, within_range
from esnena.schemas import DesignType

COUPLING_LIMIT = 0.47


def make_design_2d(b: float, omega_r: float = 3.0, omega_in: float = 6.0) -> EsnModel:
    """
    Two-neuron flip-flop: M = omega_r [[1, b], [b, 1]], W_in = omega_in I, identity readout, no feedback.

    :param b: Coupling between the two neurons.
    :type b: float
    :param omega_r: Reservoir scale.
    :type omega_r: float
    :param omega_in: Input scale.
    :type omega_in: float
    :return: The trained model.
    :rtype: EsnModel
    :raises DesignRangeError: If b is outside [0, 0.47).
    """
    if not within_range(b, (0.0, COUPLING_LIMIT)):
        raise DesignRangeError("b", b, COUPLING_LIMIT)
    reservoir = omega_r * np.array([[1.0, b], [b, 1.0]])
    return EsnModel(reservoir=reservoir, input_weights=omega_in * np.eye(2), feedback_weights=np.zeros((2, 2)),
                    readout=np.eye(2), leak_rate=1.0, noise_std=0.0, provenance=f"design_2d(b={b})")


class Design(AbstractDesign):

    @staticmethod
    def design_type():
        return DesignType(name="2D flip-flop",
                          design_description="Two coupled tanh neurons with four stable states",
                          args={
                              "b": "Coupling in [0, 0.47)",
                              "omega_r": "Reservoir scale (default 3)",
                              "omega_in": "Input scale (default 6)",
                          })

    def __init__(self, b: float = 0.2, omega_r: float = 3.0, omega_in: float = 6.0):
        self.b = float(b)
        self.omega_r = float(omega_r)
        self.omega_in = float(omega_in)

    def build(self) -> EsnModel:
        return make_design_2d(self.b, self.omega_r, self.omega_in)
