"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed input: wrong shapes, degenerate bases, mismatched base points."""


class PreconditionError(ValueError):
    """An operation was called outside its domain of validity."""


class InvariantViolation(RuntimeError):
    """An internal invariant failed; indicates a bug or severe roundoff."""


class ProximalityError(ValueError):
    """Spectral gap too small to single out an attracting isotropic plane."""


class StepSizeError(RuntimeError):
    """Frame transport degenerated; retry with finer steps."""
