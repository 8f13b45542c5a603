class GSBMError(Exception):
    exit_code = 1


class ConfigError(GSBMError, ValueError):
    """Invalid model, spec file or flag."""
    exit_code = 2


class UnsupportedRegime(ConfigError):
    """A hypothesis of the requested analysis does not hold for this model."""


class BudgetExceeded(GSBMError):
    exit_code = 4


class VerificationFailure(GSBMError):
    exit_code = 3

    def __init__(self, message, link=None):
        super().__init__(message)
        self.link = link
