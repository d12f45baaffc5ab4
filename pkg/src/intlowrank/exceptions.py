"""Exception types shared across the toolkit."""


class RankDeficientError(ValueError):
    """A matrix that must have full column rank does not."""


class EmptyBoxError(ValueError):
    """A box constraint with some lower bound above its upper bound."""


class NotOrthonormalError(ValueError):
    """A factor expected to have orthonormal integer rows does not."""


class MatrixParseError(ValueError):
    """A matrix file that cannot be parsed into a rectangular numeric grid."""
