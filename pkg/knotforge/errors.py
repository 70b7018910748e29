"""
Error types shared by the KnotForge services.
Each carries the CLI exit code it maps to.
"""


class KnotForgeError(ValueError):
    exit_code = 1


class InputError(KnotForgeError):
    """Malformed curve, pattern or configuration input."""
    exit_code = 4


class UnboundedError(InputError):
    pass


class NotAKnotError(InputError):
    pass


class DegenerateError(KnotForgeError):
    """The curve or projection is not generic enough to read a diagram from."""
    exit_code = 2


class NotCompactError(DegenerateError):
    pass


class TriplePointError(DegenerateError):
    pass


class AmbiguousCrossingError(DegenerateError):
    pass


class InfeasibleError(KnotForgeError):
    """A synthesis search ran out of budget."""
    exit_code = 3
