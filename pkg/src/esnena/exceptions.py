from typing import Optional, Tuple


class EsnEnaException(Exception):
    """
    Super class for all esnena exceptions
    """
    pass


class EsnDimensionError(EsnEnaException):
    """
    Raised if vectors or matrices handed to the network have inconsistent shapes.
    """

    def __init__(self, name: str, expected: Tuple[int, ...], actual: Tuple[int, ...], message: str = ""):
        """
        Init method for EsnDimensionError exception.

        :param name: Name of the offending argument.
        :type name: str
        :param expected: The expected shape.
        :type expected: Tuple[int, ...]
        :param actual: The shape that was received.
        :type actual: Tuple[int, ...]
        :param message: Detailed message for log.
        :type message: str
        """
        self.message = f'{name} has shape {tuple(actual)}, expected {tuple(expected)}. {message}'
        super().__init__(self.message)


class EsnUsageError(EsnEnaException):
    """
    Raised if an operation is called on a model that cannot support it, e.g. closed loop without readout.
    """

    def __init__(self, operation: str, message: str = ""):
        """
        Init method for EsnUsageError exception.

        :param operation: The operation that was attempted.
        :type operation: str
        :param message: Detailed message for log.
        :type message: str
        """
        self.message = f'Cannot run {operation}. {message}'
        super().__init__(self.message)


class ReservoirRebuildRequired(EsnEnaException):
    """
    Raised if a random reservoir draw has a numerically zero spectral radius and cannot be rescaled.
    """

    def __init__(self, seed: Optional[int], radius: float, message: str = ""):
        """
        Init method for ReservoirRebuildRequired exception.

        :param seed: The seed of the failed draw.
        :type seed: Optional[int]
        :param radius: The spectral radius of the raw draw.
        :type radius: float
        :param message: Detailed message for log.
        :type message: str
        """
        self.message = f'Reservoir drawn with seed {seed} has spectral radius {radius:.3e}, ' + \
                       f'rebuild with another seed or lower sparsity. {message}'
        super().__init__(self.message)


class RidgeSolverError(EsnEnaException):
    """
    Raised if the normal equations of the readout regression cannot be solved.
    """

    def __init__(self, ridge_lambda: float, message: str = ""):
        """
        Init method for RidgeSolverError exception.

        :param ridge_lambda: The regularization used.
        :type ridge_lambda: float
        :param message: Detailed message for log.
        :type message: str
        """
        advice = " Use ridge_lambda > 0." if ridge_lambda == 0 else ""
        self.message = f'Normal matrix is singular for ridge_lambda={ridge_lambda}.{advice} {message}'
        super().__init__(self.message)


class EmptySequenceError(EsnEnaException):
    """
    Raised if a score is requested for an empty sequence.
    """

    def __init__(self, name: str, message: str = ""):
        self.message = f'{name} is empty. {message}'
        super().__init__(self.message)


class NotAFixedPoint(EsnEnaException):
    """
    Raised if a location handed to classification has kinetic energy above tolerance.
    """

    def __init__(self, energy: float, tol: float, message: str = ""):
        """
        Init method for NotAFixedPoint exception.

        :param energy: Kinetic energy at the location.
        :type energy: float
        :param tol: The tolerance that was exceeded.
        :type tol: float
        :param message: Detailed message for log.
        :type message: str
        """
        self.message = f'Kinetic energy {energy:.3e} is not below tolerance {tol:.1e}. {message}'
        super().__init__(self.message)


class InsufficientPdvs(EsnEnaException):
    """
    Raised if an attractor has too few local pulse difference vectors to build a switching subspace.
    """

    def __init__(self, attractor_index: int, count: int, radius: float, message: str = ""):
        """
        Init method for InsufficientPdvs exception.

        :param attractor_index: Index of the starved attractor.
        :type attractor_index: int
        :param count: Number of local PDVs that were found.
        :type count: int
        :param radius: Radius of the local ball.
        :type radius: float
        :param message: Detailed message for log.
        :type message: str
        """
        self.message = f'Attractor {attractor_index} has {count} PDVs within radius {radius}, at least 2 needed. ' + \
                       f'{message}'
        super().__init__(self.message)


class DesignRangeError(EsnEnaException):
    """
    Raised if a hand-designed reservoir is requested outside the parameter range where it solves the task.
    """

    def __init__(self, parameter: str, value: float, bifurcation_value: float, message: str = ""):
        """
        Init method for DesignRangeError exception.

        :param parameter: Name of the design parameter.
        :type parameter: str
        :param value: Value that was requested.
        :type value: float
        :param bifurcation_value: Approximate bifurcation value bounding the valid range.
        :type bifurcation_value: float
        :param message: Detailed message for log.
        :type message: str
        """
        self.parameter = parameter
        self.bifurcation_value = bifurcation_value
        self.message = f'{parameter}={value} is outside [0, {bifurcation_value}): a bifurcation near ' + \
                       f'{parameter}≈{bifurcation_value} makes the flip-flop attractors disappear. {message}'
        super().__init__(self.message)


class ArtifactError(EsnEnaException):
    """
    Raised if an artifact file is missing or cannot be parsed.
    """

    def __init__(self, path: str, message: str = ""):
        self.message = f'Could not read artifact {path}. {message}'
        super().__init__(self.message)


class EsnEnaModuleError(EsnEnaException):
    """
    Raised if a design module cannot be found
    """

    def __init__(self, implemented_module: str, message: str = ""):
        """
        Init method for EsnEnaModuleError exception.

        :param implemented_module: The module that cannot be found.
        :type implemented_module: str
        :param message: Detailed message for log.
        :type message: str
        """
        self.message = f'No {implemented_module} module found. {message}'
        super().__init__(self.message)


class EsnEnaImplementationError(EsnEnaException):
    """
    Raised if a design plugin does not subclass AbstractDesign correctly
    """

    def __init__(self, implemented_module: str, message: str = ""):
        self.message = f'{implemented_module} not implemented as an esnena design. {message}'
        super().__init__(self.message)


STAGE_EXIT_CODES = {
    "load": 2,
    "build": 3,
    "train": 4,
    "simulate": 5,
    "fixed-points": 6,
    "extract": 7,
    "report": 8,
}


class PipelineStageError(EsnEnaException):
    """
    Raised if a pipeline stage fails; carries the exit code for the stage.
    """

    def __init__(self, stage: str, cause: Optional[BaseException] = None, message: str = ""):
        """
        Init method for PipelineStageError exception.

        :param stage: Name of the failing stage, one of the keys of STAGE_EXIT_CODES.
        :type stage: str
        :param cause: The exception that made the stage fail.
        :type cause: Optional[BaseException]
        :param message: Detailed message for log.
        :type message: str
        """
        self.stage = stage
        self.exit_code = STAGE_EXIT_CODES.get(stage, 1)
        detail = f' {cause}' if cause is not None else ''
        self.message = f'Stage {stage} failed.{detail} {message}'
        super().__init__(self.message)
