"""Test-problem catalog.

Three families drive the experiments and tests:

* symmetric positive definite linear systems ``u' + A u = g`` whose
  eigenvalues map the contraction analysis onto scalar ``z`` values,
* a low-Earth-orbit two-body problem with an analytic Lagrange-coefficient
  reference propagated in universal variables,
* the periodic viscous Burgers equation semi-discretized with fourth-order
  compact finite differences.

Every catalog entry reduces to an :class:`IvpProblem`, the uniform contract
consumed by the time integrators: a right-hand side, an initial state, a
horizon, and optional jacobian / linear-structure / reference hooks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import SolverError

# Earth gravitational parameter, km^3 / s^2.
MU_EARTH = 3.986e5

_KEPLER_R0 = (464.856, 6667.880, 574.231)  # km
_KEPLER_V0 = (-2.8381188, -0.7871898, 7.0830275)  # km/s


@dataclass(frozen=True, eq=False)
class IvpProblem:
    """An initial-value problem ``du/dt = f(t, u)``, ``u(0) = u0``.

    ``reference`` maps a time to the exact (or high-accuracy) state when one
    is known.  ``jacobian`` is the optional analytic hook used by implicit
    stage solves.  ``linear`` carries ``(A, g)`` when the right-hand side has
    the form ``g(t) - A u``, which lets the collocation propagator use its
    direct linear solve.
    """

    dim: int
    f: Callable[[float, np.ndarray], np.ndarray]
    u0: np.ndarray
    T: float
    reference: Callable[[float], np.ndarray] | None = None
    jacobian: Callable[[float, np.ndarray], np.ndarray] | None = None
    linear: tuple[np.ndarray, Callable[[float], np.ndarray] | None] | None = None
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        u0 = np.atleast_1d(np.asarray(self.u0, dtype=float))
        if u0.size != self.dim:
            raise ValueError(f"u0 has size {u0.size}, expected {self.dim}")
        object.__setattr__(self, "u0", u0)
        if not np.all(np.isfinite(np.asarray(self.f(0.0, u0), dtype=float))):
            raise ValueError("f(0, u0) is not finite")


# ---------------------------------------------------------------------------
# Symmetric positive definite linear systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpdLinearProblem:
    """Linear system ``u' + A u = g(t)`` with symmetric positive definite A."""

    A: np.ndarray
    u0: np.ndarray
    T: float
    g: Callable[[float], np.ndarray] | None = None
    name: str = "spd"

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(A).max())):
            raise ValueError("A must be symmetric")
        if np.linalg.eigvalsh(A).min() <= 0.0:
            raise ValueError("A must be positive definite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "u0", np.atleast_1d(np.asarray(self.u0, dtype=float)))

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def to_ivp(self) -> IvpProblem:
        A, g = self.A, self.g

        if g is None:
            def f(t, u):
                return -(A @ u)

            lam, Q = np.linalg.eigh(A)
            c0 = Q.T @ self.u0

            def reference(t):
                return Q @ (np.exp(-lam * t) * c0)
        else:
            def f(t, u):
                return g(t) - A @ u

            reference = None

        return IvpProblem(
            dim=self.dim,
            f=f,
            u0=self.u0,
            T=self.T,
            reference=reference,
            jacobian=lambda t, u: -A,
            linear=(A, g),
            name=self.name,
        )


def spd_catalog(name: str, **params) -> SpdLinearProblem:
    """Named SPD instances.

    ``diag-spectrum``: a diagonal matrix with ``m`` log-spaced eigenvalues in
    ``[lambda_min, lambda_max]``.  ``laplacian-1d``: the second-difference
    matrix of ``m`` interior unit-interval points scaled by ``1 / dx**2``.
    Unknown names or parameters raise ValueError.
    """
    known = {"diag-spectrum", "laplacian-1d"}
    if name not in known:
        raise ValueError(f"unknown SPD problem {name!r} (expected one of {sorted(known)})")

    T = float(params.pop("T", 1.0))
    u0 = params.pop("u0", None)

    if name == "diag-spectrum":
        m = int(params.pop("m", 3))
        lam_min = float(params.pop("lambda_min", 1.0))
        lam_max = float(params.pop("lambda_max", 100.0))
        if params:
            raise ValueError(f"unexpected parameters {sorted(params)}")
        if m < 1 or lam_min <= 0 or lam_max < lam_min:
            raise ValueError("need m >= 1 and 0 < lambda_min <= lambda_max")
        lam = np.geomspace(lam_min, lam_max, m) if m > 1 else np.array([lam_min])
        A = np.diag(lam)
    else:
        m = int(params.pop("m", 32))
        if params:
            raise ValueError(f"unexpected parameters {sorted(params)}")
        if m < 1:
            raise ValueError("need m >= 1")
        dx = 1.0 / (m + 1)
        A = (np.diag(np.full(m, 2.0)) - np.diag(np.ones(m - 1), 1) - np.diag(np.ones(m - 1), -1)) / dx**2

    u0 = np.ones(m) if u0 is None else np.atleast_1d(np.asarray(u0, dtype=float))
    return SpdLinearProblem(A=A, u0=u0, T=T, name=name)


# ---------------------------------------------------------------------------
# Two-body orbit
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KeplerProblem:
    """Two-body motion in low Earth orbit, first-order six-dimensional form.

    State layout is ``[x, y, z, vx, vy, vz]`` in km and km/s.
    """

    mu: float = MU_EARTH
    r0: np.ndarray = field(default_factory=lambda: np.array(_KEPLER_R0))
    v0: np.ndarray = field(default_factory=lambda: np.array(_KEPLER_V0))
    T: float = 50.0

    @property
    def u0(self) -> np.ndarray:
        return np.concatenate((np.asarray(self.r0, float), np.asarray(self.v0, float)))

    def to_ivp(self) -> IvpProblem:
        mu = self.mu

        def f(t, u):
            r = u[:3]
            rn = np.linalg.norm(r)
            return np.concatenate((u[3:], -mu / rn**3 * r))

        def jacobian(t, u):
            r = u[:3]
            rn = np.linalg.norm(r)
            grav = mu * (3.0 * np.outer(r, r) / rn**5 - np.eye(3) / rn**3)
            J = np.zeros((6, 6))
            J[:3, 3:] = np.eye(3)
            J[3:, :3] = grav
            return J

        return IvpProblem(
            dim=6,
            f=f,
            u0=self.u0,
            T=self.T,
            reference=lambda t: kepler_reference(self, t),
            jacobian=jacobian,
            name="kepler",
        )


def _stumpff(z: float) -> tuple[float, float]:
    """Stumpff functions C(z) and S(z), series-evaluated near zero."""
    if abs(z) < 1e-6:
        C = 1.0 / 2.0 - z / 24.0 + z * z / 720.0 - z**3 / 40320.0
        S = 1.0 / 6.0 - z / 120.0 + z * z / 5040.0 - z**3 / 362880.0
        return C, S
    if z > 0:
        sz = math.sqrt(z)
        return (1.0 - math.cos(sz)) / z, (sz - math.sin(sz)) / sz**3
    sz = math.sqrt(-z)
    return (math.cosh(sz) - 1.0) / (-z), (math.sinh(sz) - sz) / sz**3


def kepler_reference(problem: KeplerProblem, t: float) -> np.ndarray:
    """Analytic state at time ``t`` via Lagrange coefficients.

    Solves the universal-variable Kepler equation for the anomaly by a
    bisection-safeguarded Newton iteration (the time residual is monotone in
    the anomaly, so a bracket is always available), then combines the initial
    position and velocity with the F and G coefficients.  The Wronskian
    identity ``F*Gdot - Fdot*G = 1`` is verified before returning.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    r0 = np.asarray(problem.r0, dtype=float)
    v0 = np.asarray(problem.v0, dtype=float)
    mu = problem.mu
    if t == 0.0:
        return np.concatenate((r0, v0))

    r0n = float(np.linalg.norm(r0))
    vr0 = float(r0 @ v0) / r0n
    alpha = 2.0 / r0n - float(v0 @ v0) / mu  # inverse semi-major axis
    sqrt_mu = math.sqrt(mu)

    def residual(chi: float) -> float:
        z = alpha * chi * chi
        C, S = _stumpff(z)
        return (
            r0n * vr0 / sqrt_mu * chi * chi * C
            + (1.0 - alpha * r0n) * chi**3 * S
            + r0n * chi
            - sqrt_mu * t
        )

    def slope(chi: float) -> float:
        z = alpha * chi * chi
        C, S = _stumpff(z)
        return (
            r0n * vr0 / sqrt_mu * chi * (1.0 - z * S)
            + (1.0 - alpha * r0n) * chi * chi * C
            + r0n
        )

    chi = sqrt_mu * abs(alpha) * t if abs(alpha) > 1e-12 else sqrt_mu * t / r0n

    # Expand a sign-changing bracket around the guess; residual(0) < 0 for t > 0.
    lo, hi = 0.0, max(chi, 1.0)
    while residual(hi) < 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise SolverError("failed to bracket the universal Kepler equation")

    converged = False
    for _ in range(60):
        res = residual(chi)
        if res < 0.0:
            lo = chi
        else:
            hi = chi
        step = res / slope(chi)
        chi_new = chi - step
        if not lo < chi_new < hi:
            chi_new = 0.5 * (lo + hi)
        if abs(chi_new - chi) <= 1e-13 * max(1.0, abs(chi_new)):
            chi = chi_new
            converged = True
            break
        chi = chi_new
    if not converged:
        raise SolverError(f"universal Kepler equation did not converge at t={t!r}")

    z = alpha * chi * chi
    C, S = _stumpff(z)
    F = 1.0 - chi * chi * C / r0n
    G = t - chi**3 * S / sqrt_mu
    r = F * r0 + G * v0
    rn = float(np.linalg.norm(r))
    Fdot = sqrt_mu / (rn * r0n) * chi * (z * S - 1.0)
    Gdot = 1.0 - chi * chi * C / rn
    v = Fdot * r0 + Gdot * v0

    wronskian = F * Gdot - Fdot * G
    if abs(wronskian - 1.0) > 1e-10:
        raise SolverError(f"Lagrange coefficient identity violated: {wronskian - 1.0:.3e}")
    return np.concatenate((r, v))


# ---------------------------------------------------------------------------
# Periodic Burgers equation, fourth-order compact differences
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BurgersProblem:
    """Semi-discrete viscous Burgers equation on the periodic grid ``[0, 2)``.

    ``A1`` approximates ``-nu * d^2/dx^2`` and ``A2`` approximates ``d/dx``;
    the semi-discrete system is ``du/dt = -A1 u - u * (A2 u)`` with the
    componentwise product.
    """

    nu: float
    Nx: int
    dx: float
    x: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    alpha: float = 2.0
    T: float = 4.0

    @property
    def u0(self) -> np.ndarray:
        return burgers_exact(self, self.x, 0.0)

    def to_ivp(self) -> IvpProblem:
        A1, A2 = self.A1, self.A2
        x = self.x

        def f(t, u):
            return -(A1 @ u) - u * (A2 @ u)

        def jacobian(t, u):
            return -A1 - np.diag(A2 @ u) - u[:, None] * A2

        return IvpProblem(
            dim=self.Nx,
            f=f,
            u0=self.u0,
            T=self.T,
            reference=lambda t: burgers_exact(self, x, t),
            jacobian=jacobian,
            name=f"burgers_nu{self.nu:g}",
        )


def burgers_exact(problem: BurgersProblem, x, t: float):
    """Closed-form solution of the viscous Burgers test case.

    At ``t = 0`` this reduces to the initial profile; the denominator stays
    at or above ``alpha - 1`` so the expression is well defined everywhere.
    """
    x = np.asarray(x, dtype=float)
    decay = math.exp(-math.pi**2 * problem.nu * t)
    return (
        2.0 * problem.nu * math.pi * decay * np.sin(math.pi * x)
        / (problem.alpha + decay * np.cos(math.pi * x))
    )


def _circulant(n: int, main: float, sup: float, sub: float) -> np.ndarray:
    C = np.diag(np.full(n, main))
    C += np.diag(np.full(n - 1, sup), 1) + np.diag(np.full(n - 1, sub), -1)
    C[0, -1] = sub
    C[-1, 0] = sup
    return C


def build_burgers(nu: float, Nx: int) -> BurgersProblem:
    """Assemble the compact-difference operators on an ``Nx``-point grid.

    The implicit stencil matrices are factored once and applied to the
    explicit stencils to realize ``A1`` and ``A2`` as dense operators, reused
    by every right-hand-side and jacobian evaluation.
    """
    if Nx < 4:
        raise ValueError("Nx must be >= 4")
    if nu <= 0:
        raise ValueError("nu must be positive")
    dx = 2.0 / Nx
    x = np.arange(Nx) * dx

    P1 = _circulant(Nx, 5.0 / 6.0, 1.0 / 12.0, 1.0 / 12.0)
    Q1 = _circulant(Nx, -2.0, 1.0, 1.0)
    P2 = _circulant(Nx, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0)
    Q2 = _circulant(Nx, 0.0, 1.0, -1.0)

    A1 = -(nu / dx**2) * lu_solve(lu_factor(P1), Q1)
    A2 = (1.0 / (2.0 * dx)) * lu_solve(lu_factor(P2), Q2)
    for arr in (x, A1, A2):
        arr.setflags(write=False)
    return BurgersProblem(nu=float(nu), Nx=Nx, dx=dx, x=x, A1=A1, A2=A2)
