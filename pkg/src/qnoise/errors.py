"""Exception hierarchy.

Three families, mapped to CLI exit codes: configuration problems (exit 2),
numerical failures (exit 3), and I/O failures (exit 4).
"""


class QNoiseError(Exception):
    """Base class for all library errors."""


class ConfigurationError(QNoiseError):
    """Invalid inputs: bad parameter records, bad config files."""

    exit_code = 2


class NumericalError(QNoiseError):
    """Numerical failure: factorization, quadrature, resonance."""

    exit_code = 3


class IoError(QNoiseError):
    """Filesystem failure while emitting outputs."""

    exit_code = 4


class DimensionError(ConfigurationError):
    """A derived quantity came out non-finite or dimensionally inconsistent."""


class RangeError(ConfigurationError):
    """A parameter or derived ratio violates its allowed range."""


class ImaginaryFrequency(ConfigurationError):
    """Coulomb softening exceeds the trap stiffness; the trap is unstable."""


class NotHighTemperature(ConfigurationError):
    """Squeezed-thermal cavity closed forms require beta*hbar*omega_c < 0.1."""


class OverdampedUnsupported(ConfigurationError):
    """Langevin integration requires gamma_m < omega_m."""


class ParseError(ConfigurationError):
    """Config file syntax error, with location."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ValidationError(ConfigurationError):
    """Config parsed but violates an invariant; names the offending quantity."""


class GridTooCoarse(NumericalError):
    """Time grid does not resolve the fastest kernel frequency."""


class UnitMismatch(NumericalError):
    """Kernels with different units summed into one covariance."""


class FactorizationFailure(NumericalError):
    """Covariance needed more jitter than the policy allows."""


class ResonanceSingularity(NumericalError):
    """Closed form diverges at probe/driver degeneracy."""
