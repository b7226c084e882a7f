"""Exception hierarchy shared by all modules."""


class LightconeError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(LightconeError, ValueError):
    """Shape or count mismatch in the inputs (wrong spinor length, wrong number of velocities)."""


class NumericalIntegrityError(LightconeError):
    """A computed quantity violates an identity that must hold exactly (signals a bug)."""


class NumericalFailure(LightconeError):
    """A solver produced non-finite values or was called with invalid step sizes."""


class DomainError(LightconeError, ValueError):
    """A point lies outside the window on which a wave or world line is defined."""


class NodeError(LightconeError):
    """The wave function vanishes at the configuration, so no direction is defined."""

    def __init__(self, message, configuration=None):
        super().__init__(message)
        self.configuration = configuration


class DegenerateConfigurationError(LightconeError):
    """A companion world line passes through the query point itself."""


class RetardationError(LightconeError):
    """A light-cone lookup needed data that the backward integration has not produced yet."""


class ScenarioError(LightconeError):
    """Base class for scenario loading problems."""


class ScenarioParseError(ScenarioError):
    pass


class ScenarioSchemaError(ScenarioError):
    pass


class ModeInconsistencyError(ScenarioError):
    pass
