"""Exception hierarchy shared by the solver modules and the CLI."""


class EPShockError(Exception):
    """Base class for all solver errors."""


class DomainError(EPShockError, ValueError):
    """An argument lies outside the domain of a formula."""


class SonicDegeneracyError(EPShockError):
    """A formula was evaluated too close to the sonic point M = 1."""

    def __init__(self, M2, guard):
        super().__init__(f"|M^2 - 1| = {abs(M2 - 1.0):.3e} below sonic guard {guard:.1e}")
        self.M2 = M2
        self.guard = guard


class NotSupersonicError(EPShockError, ValueError):
    """Upstream state is not supersonic enough for the requested operation."""


class OutOfSpanError(EPShockError, ValueError):
    """Dense evaluation requested outside the stored trajectory."""


class IntegrationError(EPShockError):
    """An integration stopped before reaching its end point.

    ``t_stop`` is where integration halted; ``guard`` names the guard that
    fired, or is ``None`` for a step-size failure.
    """

    def __init__(self, message, t_stop, guard=None, trajectory=None):
        super().__init__(message)
        self.t_stop = t_stop
        self.guard = guard
        self.trajectory = trajectory


class UpstreamSonicError(IntegrationError):
    """Supersonic branch decelerated to M -> 1+ before the requested stop."""


class DownstreamChokedError(IntegrationError):
    """Subsonic branch left the admissible region before the exit.

    ``t_stop`` is the maximal solvable span end reached by the solver.
    """


class OutOfRangeError(EPShockError):
    """Prescribed exit pressure lies outside the computed admissible range."""

    def __init__(self, p_ex, p_range):
        super().__init__(
            f"exit pressure {p_ex!r} outside admissible range "
            f"[{p_range[0]!r}, {p_range[1]!r}]"
        )
        self.p_ex = p_ex
        self.range = p_range


class NonMonotoneMapError(EPShockError):
    """Exit-pressure map is not monotone, so bisection would be unsound."""


class ConfigError(EPShockError, ValueError):
    """Invalid problem configuration."""
