"""Exception types shared across the solver modules."""


class NonConvergence(RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class InvalidRegime(RuntimeError):
    """The shifted-oscillator treatment does not apply at this coupling.

    Raised when the shift equations have no interior stationary point
    (iterates pushed against x = +-1, singular Jacobian) or when the reduced
    kinetic/potential tensors stop being positive definite. Weak-coupling
    workflows catch this and fall back to constraint-only shifts for state
    selection instead of treating it as a crash.
    """
