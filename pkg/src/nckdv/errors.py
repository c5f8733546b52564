"""Exception hierarchy shared by the symbolic and numeric layers."""


class NCKdVError(Exception):
    """Base class for all errors raised by this package."""


class UnknownVariable(NCKdVError):
    pass


class NonInvertibleImage(NCKdVError):
    pass


class NotExactDerivative(NCKdVError):
    pass


class UnknownEquation(NCKdVError):
    pass


class UnsupportedOperator(NCKdVError):
    """Raised when an operator node (e.g. a twisted inverse) cannot be applied."""


class GeneratorError(NCKdVError):
    pass


class OutsideOmega(NCKdVError):
    pass


class InsufficientJetOrder(NCKdVError):
    pass


class ParseError(NCKdVError):
    def __init__(self, message: str, position: int, expected: frozenset[str] = frozenset()):
        self.position = position
        self.expected = expected
        detail = f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{message} at offset {position}{detail}")
