"""Exception types shared across the package."""


class ParhodgeError(Exception):
    """Base class for all errors raised by this package."""


# --- linear algebra ---

class NotSymmetric(ParhodgeError):
    pass


class NoConvergence(ParhodgeError):
    pass


class NotPositiveDefinite(ParhodgeError):
    def __init__(self, message, smallest_eigenvalue=None):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


class DimensionMismatch(ParhodgeError):
    pass


class ConditionFailed(ParhodgeError):
    """The symplectic form on the subspace is numerically singular."""


class DegenerateInput(ParhodgeError):
    pass


# --- meshes ---

class NonManifold(ParhodgeError):
    pass


class InconsistentOrientation(ParhodgeError):
    pass


class InvalidParameter(ParhodgeError):
    pass


class DegenerateMetric(ParhodgeError):
    pass


class NotConnectedWarning(UserWarning):
    """Complex has several components; downstream code handles this."""


# --- local systems ---

class NotOrthogonal(ParhodgeError):
    pass


class NotFlat(ParhodgeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class RelationViolated(ParhodgeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotUnit(ParhodgeError):
    pass


class NotClosed(ParhodgeError):
    pass


# --- moduli ---

class SamplingFailed(ParhodgeError):
    def __init__(self, message, attempts=None):
        super().__init__(message)
        self.attempts = attempts


class InvalidAngles(ParhodgeError):
    pass


class SingularPoint(ParhodgeError):
    pass
