"""Exception hierarchy shared by the analytic, simulation and CLI layers."""


class StandbyError(Exception):
    """Base class for model and numeric failures (CLI exit status 3)."""

    code = "error"


class NonTerminatingSystemError(StandbyError):
    """The system never fails: tau is not a proper random variable."""

    code = "non-terminating system"

    def __init__(self, continuation: float):
        self.continuation = continuation
        super().__init__(
            f"non-terminating system: phi1(0)*phi2(0) = {continuation!r} "
            "is numerically 1, the system never fails"
        )


class QuadratureError(StandbyError):
    """Adaptive quadrature exhausted its budget before reaching tolerance."""

    code = "quadrature did not converge"

    def __init__(self, best: float, abs_error: float, message: str = ""):
        self.best = best
        self.abs_error = abs_error
        super().__init__(
            f"quadrature did not converge: best estimate {best!r} "
            f"+/- {abs_error!r} {message}".rstrip()
        )


class FixedPointError(StandbyError):
    code = "fixed point disagreement"


class InversionUnstableError(StandbyError):
    code = "inversion unstable"

    def __init__(self, t: float, value: float, discrepancy: float):
        self.t = t
        self.value = value
        self.discrepancy = discrepancy
        super().__init__(
            f"inversion unstable at t={t!r}: Gaver-Stehfest N=16 and N=12 "
            f"differ by {discrepancy:.3g}"
        )


class BracketNotFoundError(StandbyError):
    code = "bracket not found"


class MomentDivergedError(StandbyError):
    code = "moment diverged"


class ConfigError(ValueError):
    """Malformed or invalid run configuration (CLI exit status 2)."""
