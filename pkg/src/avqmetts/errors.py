"""Exception types shared across the package."""


class AvqmettsError(Exception):
    """Base class for all package errors."""


class ConfigError(AvqmettsError):
    """Invalid run configuration (CLI exit code 2)."""


class NumericalError(AvqmettsError):
    """Numerical consistency failure: norm drift, phase bug, singular solve (exit code 3)."""


class NoCrossingError(AvqmettsError):
    """Binder curves do not cross on the sampled grid (exit code 4)."""


class AmbiguousCrossingError(AvqmettsError):
    """Binder curves cross more than once; all candidates are reported."""

    def __init__(self, candidates):
        self.candidates = list(candidates)
        super().__init__(f"multiple crossings found: {self.candidates}")
