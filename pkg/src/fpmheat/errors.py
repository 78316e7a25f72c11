"""Exception hierarchy for the fpmheat package.

All package errors derive from :class:`FpmError` so callers can catch one
base class. Configuration/user-input problems and numerical failures are kept
in separate branches because the command line tool maps them to different
exit codes.
"""


class FpmError(Exception):
    """Base class for all fpmheat errors."""


class ConfigError(FpmError):
    """Bad user input: unknown case names, malformed config files, etc."""


class SolverError(FpmError):
    """Numerical failure while building or solving a discrete system."""


# -- geometry ---------------------------------------------------------------

class DuplicatePoints(ConfigError):
    pass


class PointOutsideDomain(ConfigError):
    pass


class DegenerateCell(SolverError):
    pass


class ParseError(ConfigError):
    """Mesh file parse failure; carries line and column info in the message."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class UnsupportedElementType(ConfigError):
    pass


class InsufficientSupport(SolverError):
    pass


class CrackMissesFaces(ConfigError):
    pass


# -- approximation ----------------------------------------------------------

class DegenerateAxis(SolverError):
    pass


class SingularBasis(SolverError):
    pass


class RankDeficientSupport(SolverError):
    pass


# -- materials --------------------------------------------------------------

class UnknownPreset(ConfigError):
    pass


class NonPositiveMaterial(SolverError):
    """Conductivity not SPD, or density / specific heat not positive."""


# -- assembly ---------------------------------------------------------------

class MissingOperator(SolverError):
    pass


class NonPositivePenalty(ConfigError):
    pass


class SourcePointInsideDomain(SolverError):
    pass


class NormalizationSingular(SolverError):
    pass


# -- time integration / linear algebra --------------------------------------

class SingularSystem(SolverError):
    pass


class FactorizationFailure(SolverError):
    pass


# -- harness ----------------------------------------------------------------

class NoExactSolution(ConfigError):
    pass


class UnknownCase(ConfigError):
    pass
