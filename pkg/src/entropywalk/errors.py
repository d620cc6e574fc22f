"""Exception hierarchy shared by every entropywalk module."""


class EntropyWalkError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(EntropyWalkError, ValueError):
    """Invalid parameters, or a graph the walker cannot traverse."""


class ParseError(EntropyWalkError, ValueError):
    """Malformed line in an edge list or mutation stream."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(EntropyWalkError, IndexError):
    """A node id or node set outside what the graph defines."""


class ContractError(EntropyWalkError, ValueError):
    """An operation received input violating its precondition."""


class KeyUnderflowError(EntropyWalkError):
    """A tour has fewer distinct nodes than the community key width."""


class ConvergenceError(EntropyWalkError, RuntimeError):
    """Power iteration did not converge within the iteration limit."""

    def __init__(self, message: str, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (residual={residual:.3e} after {iterations} iterations)")


class MutationError(EntropyWalkError, ValueError):
    """A graph mutation that does not apply to the current graph."""
