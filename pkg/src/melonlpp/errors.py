class UsageError(ValueError):
    """Bad arguments or violated preconditions (CLI exit code 1)."""


class DomainError(ValueError):
    """A time, line or parameter outside the admissible domain (exit code 2)."""


class InfeasibleError(DomainError):
    """No disjoint tuple of paths exists for the endpoint pair (exit code 2)."""


class VerificationError(AssertionError):
    """A deterministic identity or inequality failed (exit code 3)."""
