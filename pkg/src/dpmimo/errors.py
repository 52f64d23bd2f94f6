"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent scenario configuration."""


class ChiTwoDomainError(ValueError):
    """The AoD-dependent XPD ratio is nonpositive at this geometry.

    Signals a parameter regime outside the angular model's validity rather
    than a numerical bug; callers should adjust cluster spreads/positions.
    """


class UntiedStatsError(ValueError):
    """Channel statistics are not constant within each subarray block.

    The structured permanent requires exactly repeated columns; run
    ``channel.tie_to_subarrays`` first.
    """


class PermanentGuardError(ValueError):
    """A definition-based permanent would exceed the term-count guard."""


class InfeasibleConstraintError(ValueError):
    """Power constraints admit no feasible allocation."""


class NumericalFailure(RuntimeError):
    """A numerical routine failed to produce a usable result."""
