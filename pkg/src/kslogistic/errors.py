class DomainError(ValueError):
    """A parameter lies outside the range where a formula is defined."""


class ConfigError(ValueError):
    """Malformed scenario configuration; carries the offending line if known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalAbort(RuntimeError):
    """Integration produced non-finite values.

    ``t`` is the time of the last finite state; ``record`` holds whatever
    diagnostics were collected before the failure (may be ``None``).
    """

    def __init__(self, t, message="non-finite values", record=None, diagnostics=None):
        self.t = t
        self.record = record
        self.diagnostics = diagnostics or {}
        super().__init__(f"{message} at t={t:.6g}")
