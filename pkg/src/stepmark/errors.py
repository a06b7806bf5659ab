"""Exception hierarchy shared across the package."""


class StepmarkError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(StepmarkError):
    """Invalid configuration or generation parameters."""


class UnsolvableQuestionError(StepmarkError):
    """The baseline success estimate is zero, so step contributions are undefined."""


class GatewayError(StepmarkError):
    """Base class for completer-backend failures."""


class BackendError(GatewayError):
    """Transport failure or persistent HTTP error after exhausting retries."""


class ProtocolError(GatewayError):
    """The backend answered, but the response violates the completions contract
    (e.g. missing per-token logprobs)."""
