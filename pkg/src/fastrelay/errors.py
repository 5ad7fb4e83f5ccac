"""Exception types shared across the package."""


class InfeasibleGeometryError(ValueError):
    """Raised when a requested node layout cannot satisfy the timing constraints."""


class InfeasibleD2Error(InfeasibleGeometryError):
    """Relay offset d2 exceeds the feasibility window; carries the bound in km."""

    def __init__(self, d2: float, bound: float):
        super().__init__(
            f"d2 = {d2:.6g} km exceeds the feasibility bound {bound:.6g} km"
        )
        self.d2 = d2
        self.bound = bound


class TruncationError(ValueError):
    """Fock-space cutoff too small for the requested state or operation."""


class ProbabilityOverflowError(ValueError):
    """A small-parameter probability formula returned a value above one."""
