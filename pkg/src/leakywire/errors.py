"""Exception hierarchy; each class maps to one CLI exit-code class."""


class LeakyWireError(Exception):
    exit_code = 1


class ConfigError(LeakyWireError):
    exit_code = 2


class GeometryError(LeakyWireError):
    exit_code = 3


class RegimeError(LeakyWireError):
    """Coupling/tube parameters outside the range where the bounds hold."""

    exit_code = 4


class SolverError(LeakyWireError):
    exit_code = 5
