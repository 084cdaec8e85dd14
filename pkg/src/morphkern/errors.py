"""Exception hierarchy. Every error raised on purpose derives from MorphkernError."""


class MorphkernError(Exception):
    pass


class InvalidInput(MorphkernError, ValueError):
    """Malformed file, flag or parameter."""


class EmptySamples(MorphkernError, ValueError):
    pass


class TooFewSamples(MorphkernError, ValueError):
    pass


class DimensionMismatch(MorphkernError, ValueError):
    pass


class GeometryMismatch(MorphkernError, ValueError):
    pass


class SingularSystem(MorphkernError, ArithmeticError):
    """(I + gamma L K) could not be factorized or is too ill-conditioned to trust."""


class RejectionOverflow(MorphkernError, RuntimeError):
    pass
