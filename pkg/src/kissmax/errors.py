class InputError(ValueError):
    """Malformed or out-of-domain input (dimension mismatch, bad exponent, ...)."""


class PreconditionError(InputError):
    """Input is well formed but violates an operation's precondition."""
