"""Exception hierarchy shared by all paralattice modules."""


class ParalatticeError(ValueError):
    """Base class for every error raised by this package."""


class Singular(ParalatticeError):
    """A matrix that must be inverted is (numerically) singular."""


class NonConvergence(ParalatticeError):
    """An iterative solver hit its iteration cap."""


class DuplicateAfterRounding(ParalatticeError):
    """Two distinct lattice indices round to the same integer point."""

    def __init__(self, first, second, point):
        self.first = tuple(int(v) for v in first)
        self.second = tuple(int(v) for v in second)
        self.point = tuple(int(v) for v in point)
        super().__init__(
            f"indices {self.first} and {self.second} both round to {self.point}"
        )


class BadAlpha(ParalatticeError):
    pass


class BadStructure(ParalatticeError):
    pass


class BadDiagonal(ParalatticeError):
    pass


class NormTooLarge(ParalatticeError):
    def __init__(self, norm: float, threshold: float):
        self.norm = norm
        self.threshold = threshold
        super().__init__(
            f"spectral norm {norm:.6g} is not below the admissible threshold {threshold:.6g}"
        )


class OutOfRange(ParalatticeError):
    pass


class IncompleteBlock(ParalatticeError):
    pass


class TooLarge(ParalatticeError):
    pass


class ConfigError(ParalatticeError):
    """Invalid run configuration; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
