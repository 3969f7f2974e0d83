"""Exception types shared across the package."""


class TricritError(Exception):
    """Base class for all package errors."""


class CriticalValueProximity(TricritError):
    pass


class OutsideDomain(TricritError):
    pass


class MetricSingularity(TricritError):
    pass


class BranchPointHit(TricritError):
    pass


class EssentialSingularity(TricritError):
    pass


class SamplingTooCoarse(TricritError):
    pass


class NonConvergence(TricritError):
    """A root finder or adaptive quadrature gave up."""


class Inconsistent(TricritError):
    """No vertex labeling satisfies the net axioms."""


class Inconclusive(TricritError):
    """A bounded search found no admissible candidate."""


class Unsupported(TricritError):
    pass


class InvalidPath(TricritError):
    pass
