"""Exception hierarchy shared by the estimators."""


class LocalizationError(Exception):
    """Base class for estimation failures."""


class SingularityError(LocalizationError):
    """The linearization point coincides with a station."""


class DegenerateGeometryError(LocalizationError):
    """The normal matrix of the linearized problem is (numerically) singular."""


class DivergenceError(LocalizationError):
    """An iterate left the plausible region or became non-finite."""


class TransformError(LocalizationError):
    """A leave-one-out sub-solve failed inside the NLOS-space transform.

    Attributes:
        index: zero-based index of the station that was left out.
    """

    def __init__(self, index, cause):
        self.index = index
        self.cause = cause
        super().__init__(f"sub-solve leaving out station {index} failed: {cause}")


class EstimationError(LocalizationError):
    """No usable estimate could be produced."""
