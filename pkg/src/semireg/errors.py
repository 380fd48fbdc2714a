"""Exception hierarchy shared by all modules."""


class SemiregError(Exception):
    """Base class for every error raised by :mod:`semireg`."""


class MalformedMap(SemiregError, ValueError):
    pass


class MalformedInput(SemiregError, ValueError):
    pass


class InvalidPi(SemiregError, ValueError):
    pass


class PrecisionLoss(SemiregError, ArithmeticError):
    """Cancellation in a scaled evaluation exceeded the working precision."""

    def __init__(self, ratio, bits):
        super().__init__(f"cancellation ratio {ratio:.3g} too large at {bits} bits")
        self.ratio = ratio
        self.bits = bits


# -- map parser -------------------------------------------------------------

class ParseError(SemiregError, ValueError):
    """Syntax error in a map document; ``line`` and ``column`` are 1-based."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class UnknownVariable(ParseError):
    pass


class BadExponent(ParseError):
    pass


class UnbalancedParens(ParseError):
    pass


# -- regularity ---------------------------------------------------------------

class RegularityFailure(SemiregError):
    """A map fails one of the semi-regularity conditions."""


class NotAlgebraicallyStable(RegularityFailure):
    pass


class SlopeZero(RegularityFailure):
    pass


class SharedComponent(RegularityFailure):
    pass


class Indeterminate(SemiregError):
    """A numerical certificate could neither confirm nor refute a verdict."""

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


# -- dynamics / preimages / measures -----------------------------------------

class TooShort(SemiregError, ValueError):
    pass


class NonConvergent(SemiregError, ArithmeticError):
    pass


class DegenerateTarget(SemiregError, ArithmeticError):
    pass


class Inconsistent(SemiregError):
    pass


class TooManyIndeterminate(SemiregError, ValueError):
    pass


class MBelowOne(SemiregError, ValueError):
    pass


class InsufficientSamples(SemiregError, ValueError):
    pass
