"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition or schema."""


class WholePlaneError(RuntimeError):
    """Raised when a computed risk region degenerates to the whole plane.

    A whole-plane region would mean arbitrarily large capital could be
    withdrawn from the position, so it signals a modelling problem (for
    example, no usable scalarization direction) rather than a valid answer.
    """
