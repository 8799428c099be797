"""Exception types shared across the solver, analysis and driver layers."""

from __future__ import annotations


class SolverError(RuntimeError):
    """Base class for numerical failures (as opposed to bad arguments)."""


class NonFiniteRhsError(SolverError):
    """The right-hand side returned a NaN or infinity at a collocation node."""

    def __init__(self, node: int, t: float):
        super().__init__(f"non-finite right-hand side at node {node} (t={t!r})")
        self.node = node
        self.t = t


class NonConvergenceError(SolverError):
    """An inner iteration (Picard or Newton) hit its cap before the tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


class SingularSystemError(SolverError):
    """A collocation system was singular, i.e. the scaled problem sits on a
    pole of the rational stability function."""


class MaxIterationsError(SolverError):
    """The outer predictor-corrector loop hit its iteration cap.

    Carries the convergence history so the caller can diagnose stagnation.
    """

    def __init__(self, message: str, history):
        super().__init__(message)
        self.history = list(history)


class SweepError(SolverError):
    """One or more subintervals of a concurrent fine sweep failed."""

    def __init__(self, indices, cause: BaseException):
        super().__init__(f"fine propagator failed on subintervals {sorted(indices)}: {cause}")
        self.indices = sorted(indices)
        self.cause = cause


class PointSearchError(SolverError):
    """The minimal-point-count search hit its cap without satisfying the
    endpoint criterion."""

    def __init__(self, z_max: float, cap: int, last_value: float):
        super().__init__(
            f"no point count up to M={cap} satisfies the endpoint criterion "
            f"at z_max={z_max:g} (last |R|={last_value:.6e})"
        )
        self.z_max = z_max
        self.cap = cap
        self.last_value = last_value
