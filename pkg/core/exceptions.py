"""Exception hierarchy shared by the library, the scenario layer and the CLI."""


class TabsError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(TabsError, ValueError):
    """An argument lies outside the domain an operation supports."""


class ScenarioError(TabsError, ValueError):
    """A scenario file or configuration object failed validation."""


class NumericalError(TabsError, ArithmeticError):
    """A well-formed request could not be carried out numerically."""
