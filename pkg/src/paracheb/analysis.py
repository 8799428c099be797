"""Contraction-factor analytics for the predictor-corrector iteration.

With backward Euler fixed as the coarse propagator, the per-iteration error
reduction at a single eigenvalue is governed by the contraction factor

    K(z) = |R_F(z) - 1/(1+z)| / (1 - 1/(1+z)),      z = lambda * dT,

and the convergence factor of a problem with spectrum in ``[0, lambda_max]``
is the maximum of ``K`` over ``z in [0, z_max]``.  The iteration is
considered fast when that maximum stays at or below 1/3; this module finds
the point counts and thresholds that achieve it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import PointSearchError
from .propagators import PropagatorSpec, stability

#: Largest z for which zero interior collocation points keep K <= 1/3.
Z0_STAR = 1.0
#: Largest z for which a single interior collocation point keeps K <= 1/3.
Z1_STAR = 8.0 + 6.0 * math.sqrt(2.0)

_SEARCH_CAP = 512


class Branch(enum.Enum):
    ZERO = "zero"
    ONE = "one"
    SEARCH = "search"


@dataclass(frozen=True, eq=False)
class ContractionReport:
    """Sampled contraction factors over ``[0, z_max]`` for one propagator."""

    z_grid: np.ndarray
    K_values: np.ndarray
    rho: float
    spec: PropagatorSpec
    z_max: float


@dataclass(frozen=True)
class MminResult:
    """Minimal CG point count guaranteeing the 1/3 convergence factor.

    ``condition_value`` is ``|R(z_max, m_min)|`` and ``threshold`` the
    endpoint criterion ``(3 + z_max) / (3 (1 + z_max))`` it is tested
    against on the search branch.
    """

    z_max: float
    m_min: int
    branch: Branch
    condition_value: float
    threshold: float


def contraction(spec: PropagatorSpec, z: float) -> float:
    """Contraction factor ``K(z)`` of the iteration with fine propagator ``spec``.

    Returns 0 at ``z = 0`` by continuity.  Values above 1 (and infinities,
    for explicit kinds past their stability limit) are returned as-is.
    """
    z = float(z)
    if z < 0:
        raise ValueError("z must be nonnegative")
    if z == 0.0:
        return 0.0
    r_coarse = 1.0 / (1.0 + z)
    return abs(stability(spec, z) - r_coarse) / (1.0 - r_coarse)


def _golden_max(fun, a: float, b: float, xtol: float = 1e-8) -> tuple[float, float]:
    """Golden-section search for a local maximum of ``fun`` on ``[a, b]``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = fun(x1), fun(x2)
    while b - a > xtol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = fun(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = fun(x1)
    x = 0.5 * (a + b)
    return x, fun(x)


def rho_over_interval(
    spec: PropagatorSpec, z_max: float, n_grid: int = 2048
) -> ContractionReport:
    """Convergence factor ``max K(z)`` over ``[0, z_max]``.

    Samples ``K`` on a log-spaced grid (plus ``z = 0``), then sharpens every
    local maximum, including the right endpoint, by golden-section search.
    The refined points are merged into the returned grid so ``rho`` equals
    the maximum of ``K_values``.
    """
    if z_max <= 0:
        raise ValueError("z_max must be positive")
    lo = max(z_max * 1e-6, 1e-8)
    zs = np.concatenate(([0.0], np.geomspace(lo, z_max, n_grid)))
    Ks = np.array([contraction(spec, z) for z in zs])

    extra_z, extra_K = [], []
    if np.all(np.isfinite(Ks)):
        brackets = [
            (zs[i - 1], zs[i + 1])
            for i in range(1, len(zs) - 1)
            if Ks[i] >= Ks[i - 1] and Ks[i] >= Ks[i + 1]
        ]
        if Ks[-1] >= Ks[-2]:
            brackets.append((zs[-2], zs[-1]))
        for a, b in brackets:
            z_star, k_star = _golden_max(lambda z: contraction(spec, z), a, b)
            extra_z.append(z_star)
            extra_K.append(k_star)

    if extra_z:
        zs = np.concatenate((zs, extra_z))
        Ks = np.concatenate((Ks, extra_K))
        order = np.argsort(zs)
        zs, Ks = zs[order], Ks[order]
    return ContractionReport(
        z_grid=zs, K_values=Ks, rho=float(np.max(Ks)), spec=spec, z_max=float(z_max)
    )


def _endpoint_condition(M: int, z_max: float) -> tuple[bool, float, float]:
    value = abs(stability(PropagatorSpec.chebyshev_gauss(M), z_max))
    threshold = (3.0 + z_max) / (3.0 * (1.0 + z_max))
    return value <= threshold, value, threshold


def m_min(z_max: float) -> MminResult:
    """Smallest CG point count whose convergence factor stays at or below 1/3.

    Below ``Z0_STAR`` no interior refinement is needed; below ``Z1_STAR`` a
    single point suffices.  Beyond that the count is found by incrementing M
    until the endpoint criterion holds, capped at M = 512.
    """
    if z_max <= 0:
        raise ValueError("z_max must be positive")
    if z_max <= Z0_STAR:
        _, value, threshold = _endpoint_condition(0, z_max)
        return MminResult(z_max, 0, Branch.ZERO, value, threshold)
    if z_max <= Z1_STAR:
        _, value, threshold = _endpoint_condition(1, z_max)
        return MminResult(z_max, 1, Branch.ONE, value, threshold)
    value = math.inf
    for M in range(2, _SEARCH_CAP + 1):
        ok, value, threshold = _endpoint_condition(M, z_max)
        if ok:
            return MminResult(z_max, M, Branch.SEARCH, value, threshold)
    raise PointSearchError(z_max, _SEARCH_CAP, value)


def find_threshold_roots(xtol: float = 1e-10) -> tuple[float, float]:
    """Numerically recover the two branch thresholds from the contraction factor.

    The first is the unique positive root of ``K(z) = 1/3`` with zero
    interior points; the second is the largest positive root with one
    interior point.  Both are found by bisection on bracketing intervals
    using the matrix-based stability evaluator, so the closed forms remain
    available as an independent check.
    """
    cg0 = PropagatorSpec.chebyshev_gauss(0)
    cg1 = PropagatorSpec.chebyshev_gauss(1)
    z0 = bisect(lambda z: contraction(cg0, z) - 1.0 / 3.0, 1e-6, 10.0, xtol=xtol)
    # With one interior point K re-crosses 1/3 from below somewhere past
    # z = 8 and increases from there; bracket to the right of the tangency.
    z1 = bisect(lambda z: contraction(cg1, z) - 1.0 / 3.0, 8.5, 1e3, xtol=xtol)
    return float(z0), float(z1)
