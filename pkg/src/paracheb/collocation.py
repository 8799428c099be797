"""Spectral collocation solver on a single subinterval.

Solves ``u' = f(t, u)`` on ``[a, b]`` with ``u(a) = u_a`` by expanding ``u``
in shifted Chebyshev polynomials and collocating the interpolated right-hand
side at the CG nodes.  Nonlinear problems run fixed-point (Picard) sweeps,

    coefficients  u_hat = U0 + (b - a) * C_alpha @ f(t_nodes, u_prev_nodes),
    node values   u_nodes = T1 @ u_hat,

which converge linearly when the Lipschitz constant times the interval
length is small.  Linear problems ``u' + A u = g`` are instead solved as one
dense linear system in the node values; the direct solve stays well defined
far outside the fixed-point convergence region.

States are arrays of shape ``(dim,)``; node tables are node-major,
``(M+1, dim)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chebyshev import CgPointSet, CollocationOperator
from .errors import NonConvergenceError, NonFiniteRhsError, SingularSystemError

RhsFunction = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PicardConfig:
    """Stopping rule for the fixed-point sweep.

    ``initial_guess`` chooses between the constant initial value at all nodes
    and a caller-provided node table.  ``on_nonconvergence`` selects whether
    hitting ``max_iter`` raises (default) or emits a warning and returns the
    best iterate; the outer predictor-corrector loop can often still contract
    on a poor inner solve.
    """

    tol: float = 1e-12
    max_iter: int = 100
    initial_guess: str = "constant"  # "constant" | "provided"
    on_nonconvergence: str = "raise"  # "raise" | "warn"

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.initial_guess not in ("constant", "provided"):
            raise ValueError(f"unknown initial_guess {self.initial_guess!r}")
        if self.on_nonconvergence not in ("raise", "warn"):
            raise ValueError(f"unknown on_nonconvergence {self.on_nonconvergence!r}")


@dataclass(frozen=True, eq=False)
class CollocationSolution:
    """Result of a single-interval solve.

    ``u_hat`` has shape ``(M+2, dim)``, ``u_nodes`` ``(M+1, dim)`` and
    ``u_end`` ``(dim,)``.  Because every basis polynomial equals one at the
    right endpoint, ``u_end`` is the column sum of ``u_hat``.
    """

    u_hat: np.ndarray
    u_nodes: np.ndarray
    u_end: np.ndarray
    iterations: int
    converged: bool


def _as_state(u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.ndim != 1:
        raise ValueError(f"state must be one-dimensional (got shape {u.shape})")
    return u


def solve_checked(K: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense solve that flags (near-)singular systems instead of returning
    the amplified garbage a backward-stable factorization would produce.

    The systems here have identity-plus-term structure, so unit scale is the
    natural yardstick even when cancellation shrinks the whole matrix.
    """
    spectrum = np.linalg.svd(K, compute_uv=False)
    if spectrum[-1] <= 1e-14 * max(spectrum[0], 1.0):
        raise SingularSystemError(
            f"collocation system is singular to working precision "
            f"(smallest singular value {spectrum[-1]:.2e})"
        )
    try:
        return np.linalg.solve(K, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"collocation system is singular: {exc}") from exc


def _rhs_table(f: RhsFunction, points: CgPointSet, u_nodes: np.ndarray) -> np.ndarray:
    F = np.empty_like(u_nodes)
    for m, tm in enumerate(points.t):
        val = np.atleast_1d(np.asarray(f(tm, u_nodes[m]), dtype=float))
        if not np.all(np.isfinite(val)):
            raise NonFiniteRhsError(m, tm)
        F[m] = val
    return F


def picard_sweep(
    op: CollocationOperator,
    f: RhsFunction,
    points: CgPointSet,
    u_a,
    u_prev_nodes: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """One fixed-point update; returns the new ``(u_hat, u_nodes)`` pair."""
    if points.M != op.M:
        raise ValueError(f"operator built for M={op.M} but points have M={points.M}")
    u_a = _as_state(u_a)
    u_prev_nodes = np.asarray(u_prev_nodes, dtype=float)
    if u_prev_nodes.shape != (op.M + 1, u_a.size):
        raise ValueError(
            f"node table must have shape {(op.M + 1, u_a.size)} "
            f"(got {u_prev_nodes.shape})"
        )
    F = _rhs_table(f, points, u_prev_nodes)
    u_hat = np.zeros((op.M + 2, u_a.size))
    u_hat[0] = u_a
    u_hat += points.length * (op.C_alpha @ F)
    return u_hat, op.T1 @ u_hat


def endpoint_value(u_hat: np.ndarray) -> np.ndarray:
    """State at the right endpoint: the componentwise coefficient sum."""
    u_hat = np.asarray(u_hat, dtype=float)
    return u_hat.sum(axis=0)


def solve_nonlinear(
    op: CollocationOperator,
    f: RhsFunction,
    points: CgPointSet,
    u_a,
    cfg: PicardConfig | None = None,
    u_guess: np.ndarray | None = None,
) -> CollocationSolution:
    """Iterate fixed-point sweeps until successive node values settle.

    The stopping metric is the max norm of the node-value difference between
    consecutive sweeps.  On hitting ``cfg.max_iter`` the configured
    nonconvergence policy applies.
    """
    cfg = cfg or PicardConfig()
    u_a = _as_state(u_a)
    if cfg.initial_guess == "provided":
        if u_guess is None:
            raise ValueError("initial_guess='provided' requires u_guess")
        u_nodes = np.array(u_guess, dtype=float)
    else:
        u_nodes = np.tile(u_a, (op.M + 1, 1))

    u_hat = None
    diff = np.inf
    for p in range(1, cfg.max_iter + 1):
        u_hat, u_new = picard_sweep(op, f, points, u_a, u_nodes)
        diff = float(np.max(np.abs(u_new - u_nodes)))
        u_nodes = u_new
        if not np.isfinite(diff):
            break
        if diff < cfg.tol:
            return CollocationSolution(
                u_hat=u_hat,
                u_nodes=u_nodes,
                u_end=endpoint_value(u_hat),
                iterations=p,
                converged=True,
            )

    if cfg.on_nonconvergence == "raise":
        raise NonConvergenceError(
            f"fixed-point sweep did not converge in {cfg.max_iter} iterations", diff
        )
    warnings.warn(
        f"fixed-point sweep stopped at residual {diff:.3e} after "
        f"{cfg.max_iter} iterations; returning best iterate",
        RuntimeWarning,
        stacklevel=2,
    )
    return CollocationSolution(
        u_hat=u_hat,
        u_nodes=u_nodes,
        u_end=endpoint_value(u_hat),
        iterations=cfg.max_iter,
        converged=False,
    )


def solve_linear(
    op: CollocationOperator,
    A: np.ndarray,
    g: Callable[[float], np.ndarray] | None,
    points: CgPointSet,
    u_a,
) -> CollocationSolution:
    """Direct collocation solve of ``u' + A u = g(t)``.

    Assembles the node values as one dense system of size ``(M+1) * dim``:

        u_nodes + dT * T1_C @ (A u_nodes) = T1 U0 + dT * T1_C @ g_nodes

    and recovers the coefficients from the solved right-hand side.  A
    singular system (the scaled problem sits on a pole of the rational
    stability function) raises ``SingularSystemError`` rather than being
    regularized.
    """
    if points.M != op.M:
        raise ValueError(f"operator built for M={op.M} but points have M={points.M}")
    u_a = _as_state(u_a)
    A = np.asarray(A, dtype=float)
    dim = u_a.size
    if A.shape != (dim, dim):
        raise ValueError(f"matrix must be {dim}x{dim} (got shape {A.shape})")
    n = op.M + 1
    dT = points.length

    if g is None:
        G = np.zeros((n, dim))
    else:
        G = np.empty((n, dim))
        for m, tm in enumerate(points.t):
            G[m] = np.atleast_1d(np.asarray(g(tm), dtype=float))

    K = np.eye(n * dim) + dT * np.kron(op.T1_C, A)
    rhs = np.tile(u_a, (n, 1)) + dT * (op.T1_C @ G)
    u_flat = solve_checked(K, rhs.reshape(-1))
    if not np.all(np.isfinite(u_flat)):
        raise SingularSystemError("collocation system produced non-finite values")
    U = u_flat.reshape(n, dim)

    F = G - U @ A.T
    u_hat = np.zeros((op.M + 2, dim))
    u_hat[0] = u_a
    u_hat += dT * (op.C_alpha @ F)
    return CollocationSolution(
        u_hat=u_hat,
        u_nodes=op.T1 @ u_hat,
        u_end=endpoint_value(u_hat),
        iterations=0,
        converged=True,
    )
