"""Exception hierarchy shared by all numeric modules and the CLI."""

from __future__ import annotations


class EllipticBeamError(Exception):
    """Base class for every error raised by this package."""


class DomainError(EllipticBeamError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ParameterDomainError(EllipticBeamError, ValueError):
    """Physical parameters produce an invalid statistical model.

    ``entry`` names the offending quantity so callers can report it.
    """

    def __init__(self, entry: str, message: str):
        super().__init__(f"{entry}: {message}")
        self.entry = entry


class ConvergenceError(EllipticBeamError, RuntimeError):
    """Iterative routine hit its evaluation budget before converging."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (best estimate {estimate!r}, error {error!r})")
        self.estimate = estimate
        self.error = error


class ConsistencyError(EllipticBeamError, ArithmeticError):
    """A closed-form result left its admissible range by more than roundoff."""


class DegenerateFitError(EllipticBeamError, ValueError):
    """A distribution fit was requested for data without spread."""


class AcceptanceError(EllipticBeamError, ValueError):
    """Postselection left no samples above the threshold."""

    def __init__(self, threshold: float):
        super().__init__(f"no transmittance samples at or above eta_min={threshold!r}")
        self.threshold = threshold


class ConfigError(EllipticBeamError, ValueError):
    """Invalid or incomplete run configuration; ``field`` is a dotted path."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
