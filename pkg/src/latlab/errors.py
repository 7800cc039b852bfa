"""Exception types raised across latlab."""


class LatlabError(Exception):
    """Base class for all latlab errors."""


class DegenerateBasis(LatlabError):
    pass


class EqualRoots(LatlabError):
    pass


class BallTooLarge(LatlabError):
    pass


class EmptyBall(LatlabError):
    pass


class NumZero(LatlabError):
    """A vector with Num(l) = 0 was met where the sum needs Num(l) != 0."""


class NotUnimodular(LatlabError):
    pass


class DomainError(LatlabError):
    pass


class BadDensity(LatlabError):
    pass


class SpecError(LatlabError, ValueError):
    """Malformed lattice spec, density spec or config file."""
