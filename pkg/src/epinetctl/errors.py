"""Exception hierarchy shared by the library and the command-line front end."""


class EpinetError(Exception):
    """Base class for all errors raised by epinetctl."""


class DimensionError(EpinetError, ValueError):
    pass


class ParameterError(EpinetError, ValueError):
    pass


class DisconnectedError(EpinetError):
    """A generator could not produce a strongly connected graph."""

    def __init__(self, attempts: int):
        super().__init__(f"disconnected: no strongly connected graph after {attempts} attempts")
        self.attempts = attempts


class NotIrreducibleError(EpinetError):
    pass


class ConvergenceError(EpinetError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"no convergence: {message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class WrongRegimeError(EpinetError):
    pass


class IntegrationError(EpinetError):
    pass


class ScenarioError(EpinetError, ValueError):
    """Invalid scenario content; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"invalid scenario field '{field}': {message}")
        self.field = field
