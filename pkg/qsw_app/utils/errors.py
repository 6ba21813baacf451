"""
Exception hierarchy shared by the models, controllers and the CLI.

ConfigError maps to exit code 2 and NumericalError (with its subclasses) maps
to exit code 3; the CLI controller does the translation.
"""

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


class QswError(Exception):
    """Base class for every error raised by qsw_app."""


class ConfigError(QswError):
    """
    Invalid network, parameters or experiment configuration.

    Carries every validation message so callers can report them all at once.
    """

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class NumericalError(QswError):
    """A propagation, entropy or fit step failed numerically."""


class StepSizeUnderflow(NumericalError):
    """The adaptive integrator could not advance (step size underflow)."""


class InvariantViolation(NumericalError):
    """A density matrix or probability vector left its tolerance band."""


class NoScalingRegime(NumericalError):
    """No admissible logarithmic-growth window exists in an entropy trace."""


class FitError(NumericalError):
    """Least-squares fit could not be performed (too few points, zero variance)."""
