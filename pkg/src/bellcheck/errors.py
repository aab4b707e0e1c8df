from typing import Optional, Tuple


class BellCheckError(Exception):
    """Root of every error raised by the bellcheck package."""


class NonUnitVectorError(BellCheckError, ValueError):
    pass


class DimensionMismatchError(BellCheckError, ValueError):
    pass


class NonHermitianError(BellCheckError, ValueError):
    def __init__(self, index: int, deviation: float):
        self.index = index
        self.deviation = deviation
        super().__init__(f"operator {index} is not Hermitian (max |M - M^H| = {deviation:.3e})")


class NonCommutingError(BellCheckError, ValueError):
    def __init__(self, pair: Tuple[int, int], norm: float):
        self.pair = pair
        self.norm = norm
        super().__init__(f"operators {pair[0]} and {pair[1]} do not commute (max |[A, B]| = {norm:.3e})")


class MalformedBreakpointsError(BellCheckError, ValueError):
    pass


class OutsideSampleSpaceError(BellCheckError, ValueError):
    pass


class UnknownModelError(BellCheckError, ValueError):
    pass


class EnumerationCapError(BellCheckError, ValueError):
    pass


class MalformedTargetsError(BellCheckError, ValueError):
    pass


class ShapeMismatchError(BellCheckError, ValueError):
    pass


class InstanceSchemaError(BellCheckError, ValueError):
    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class MarginalFeasibilityError(BellCheckError):
    """The instance sits inside the band where neither status can be reported safely."""

    def __init__(self, objective: float, gap: float, tol: float):
        self.objective = objective
        self.gap = gap
        self.tol = tol
        super().__init__(
            f"marginal instance: artificial objective {objective:.3e} exceeds tolerance {tol:.1e} "
            f"but the relative certificate gap {gap:.3e} does not"
        )


class SimplexError(BellCheckError, RuntimeError):
    pass
