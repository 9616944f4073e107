class DmalaError(Exception):
    """
    Base exception for dmala_mimo-specific error conditions.

    Every domain failure raised by the library derives from this class, so callers
    can catch one type at the boundary (the CLI maps subclasses to exit codes).

    Examples:
        >>> raise DmalaError("Chain state caches are inconsistent")
        >>> try:
        ...     OracleUtils.exact_posterior(instance)
        ... except DmalaError as e:
        ...     print(f"Detector error: {e.message}")
    """

    def __init__(self, message="dmala_mimo operation failed"):
        self.message = message
        super().__init__(self.message)


class ConfigError(DmalaError):
    """Invalid experiment or sampler configuration (CLI exit code 2)."""


class OracleCapExceededError(DmalaError):
    """State space Q^N larger than the dense-oracle cap (CLI exit code 3)."""


class KernelError(DmalaError):
    """Transition kernel that is not a valid row-stochastic Markov kernel."""


class DemapError(DmalaError):
    """Symbol farther than d_min from every constellation point."""


class ChannelError(DmalaError):
    """Channel generation or transmission failure (dimensions, correlation matrix)."""


class InstanceError(DmalaError):
    """DetectionInstance violating its invariants (sigma2 > 0, even dimensions)."""
