from __future__ import annotations
from abc import ABC, abstractmethod
from typing import Tuple, Union

from esnena import schemas
from esnena.esn import EsnModel


def within_range(value: float, limits: Tuple[Union[float, None], Union[float, None]]) -> bool:
    """
    Help function for checking if a design parameter lies in [lower, upper) where None corresponds to no limit.

    :param value: The value to check.
    :type value: float
    :param limits: A tuple of the (lower, upper) limit of the value, None means no limit.
    :type limits: Tuple[Union[float, None], Union[float, None]]
    :return: If the value is within the limits or not.
    :rtype: bool
    """
    return (
            (limits[0] is None or limits[0] <= value)
            and
            (limits[1] is None or value < limits[1])
    )


class AbstractDesign(ABC):
    """
    Abstract base class for hand-designed reservoirs. Every plugin module under esnena.designs defines a Design
    subclass.
    """

    @staticmethod
    @abstractmethod
    def design_type() -> schemas.DesignType:
        """
        Abstract static method describing the design and the arguments its constructor takes.

        :return: The design type.
        :rtype: esnena.schemas.DesignType
        """

    @abstractmethod
    def build(self) -> EsnModel:
        """
        Abstract method for constructing the trained model of the design.

        :return: A model with readout installed.
        :rtype: esnena.esn.EsnModel
        """

    @property
    def info(self) -> schemas.DesignType:
        """
        Property getter method for the design type of the instance.

        :return: The design type.
        :rtype: esnena.schemas.DesignType
        """
        return self.design_type()
