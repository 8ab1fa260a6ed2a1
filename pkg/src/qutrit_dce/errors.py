"""Exception hierarchy shared by all modules."""


class DCEError(Exception):
    """Base class for all library errors."""


class ValidationError(DCEError, ValueError):
    """Invalid parameters or configuration."""


class DimensionMismatch(ValidationError):
    pass


class AmbiguousBranch(DCEError):
    """No eigenvector is predominantly |0,k>."""

    def __init__(self, k, best_overlap):
        self.k = k
        self.best_overlap = best_overlap
        super().__init__(
            f"no dressed state has overlap^2 > 0.5 with |0,{k}> "
            f"(best unclaimed overlap^2 = {best_overlap:.4f})"
        )


class NearSingularDenominator(DCEError, ZeroDivisionError):
    def __init__(self, name, value):
        self.name = name
        self.value = value
        super().__init__(f"denominator {name} = {value:.3e} is too close to zero")


class NumericalFailure(DCEError):
    """Integrator output violated a conservation or positivity check."""


class NormDrift(NumericalFailure):
    pass


class TraceDrift(NumericalFailure):
    pass


class PositivityLoss(NumericalFailure):
    pass
