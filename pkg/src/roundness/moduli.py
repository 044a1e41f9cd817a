"""Numerical estimates of roundness-type moduli of finite-dimensional normed spaces.

All suprema are estimated from below (and the convexity modulus, an infimum,
from above) by :func:`roundness.search.pattern_search` over pairs of vectors.
Starts consist of structured anchor pairs built from ``e_i`` and
``e_i +- e_j`` plus ``budget.starts`` scrambled-Halton pairs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidParameterError
from .search import (
    DEFAULT_BUDGET,
    SearchBudget,
    anchor_directions,
    halton_directions,
    pattern_search,
    unit_blocks,
    unit_rows,
)
from .spaces import SpaceSpec, as_vector, conjugate, make_norm, numerical_dual

__all__ = [
    "ModulusSample",
    "Bracket",
    "AtLeast",
    "FrechetResult",
    "nu_bounds",
    "nu_ratio",
    "nu_estimate",
    "mr_estimate",
    "mc_estimate",
    "rho_value",
    "rho_estimate",
    "delta_value",
    "delta_estimate",
    "clarkson_value",
    "clarkson_ratio",
    "duality_gap",
    "frechet_exponent",
    "log_convexity_check",
]

log = logging.getLogger(__name__)

VIOLATION_MARGIN = 1e-6
DEN_FLOOR = 1e-12


@dataclass
class ModulusSample:
    """One estimate of a modulus at ``argument``.

    ``raw`` is the objective at ``witness`` as found by the search; ``value``
    is ``raw`` after clamping to the a-priori bounds (the two differ only when
    ``clamped`` is set).
    """

    argument: float
    value: float
    witness: Tuple[np.ndarray, np.ndarray]
    budget: SearchBudget
    raw: float
    evaluations: int = 0
    clamped: bool = False
    feasible: bool = True


@dataclass(frozen=True)
class Bracket:
    """Interval ``[lo, hi]`` for a critical exponent with the verdict at each end.

    A verdict is ``True`` when the inequality (roundness or coroundness) held
    at that endpoint, i.e. no violation was found there.
    """

    lo: float
    hi: float
    verdict_lo: bool
    verdict_hi: bool

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def conclusive(self) -> bool:
        return self.verdict_lo != self.verdict_hi or self.lo == self.hi

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= value <= self.hi + slack


@dataclass(frozen=True)
class AtLeast:
    """Sentinel for a critical exponent that was not reached below ``bound``."""

    bound: float

    def __str__(self):
        return f"≥ {self.bound:g}"


@dataclass
class FrechetResult:
    exponent: float
    derivative: float
    ambiguous: bool
    degenerate: bool
    remainders: np.ndarray = field(repr=False, default=None)


def _check_space(space: SpaceSpec):
    if not isinstance(space, SpaceSpec):
        raise InvalidParameterError("space must be a SpaceSpec")


def _pair_norms(norm, Z, d):
    """Norms of ``x+y, x-y, x, y`` for ``Z = (x, y)`` in one batched call."""
    x, y = Z[..., :d], Z[..., d:]
    stack = np.stack([x + y, x - y, x, y])
    n = norm(stack)
    return n[0], n[1], n[2], n[3]


def _pair_starts(d, budget, *, with_zero=False, with_negatives=False):
    A = anchor_directions(d)
    B = np.concatenate([A, -A]) if with_negatives else A
    pairs = [np.concatenate([u, v]) for u in A for v in B]
    if with_zero:
        pairs += [np.concatenate([u, np.zeros(d)]) for u in A]
    H = halton_directions(budget.starts, 2 * d, budget.seed)
    return np.concatenate([np.array(pairs), H])


def nu_bounds(p: float) -> Tuple[float, float]:
    """A-priori bounds ``max(2, 2^(p-1)) <= nu(p) <= 2^p``."""
    return max(2.0, 2.0 ** (p - 1)), 2.0**p


def _nu_objective(norm, d, p):
    def f(Z):
        ns, nd, nx, ny = _pair_norms(norm, Z, d)
        den = nx**p + ny**p
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (ns**p + nd**p) / den
        return np.where(den < DEN_FLOOR, np.nan, val)

    return f


def nu_ratio(space: SpaceSpec, p: float, x, y) -> float:
    """``(||x+y||^p + ||x-y||^p) / (||x||^p + ||y||^p)`` for one pair."""
    d = space.size
    z = np.concatenate([as_vector(x, d), as_vector(y, d)])
    return float(_nu_objective(make_norm(space), d, p)(z[None, :])[0])


def nu_estimate(space: SpaceSpec, p: float, budget: SearchBudget = DEFAULT_BUDGET, *, workers: int = 1) -> ModulusSample:
    """Lower estimate of the modulus of roundness ``nu_X(p)``.

    The ratio is scale invariant, so the search runs over unit vectors of
    ``R^(2d)``. The result is clamped to ``[max(2, 2^(p-1)), 2^p]``.
    """
    _check_space(space)
    if not p >= 1:
        raise InvalidParameterError(f"p must be >= 1, got {p}")
    d = space.size
    obj = _nu_objective(make_norm(space), d, p)
    res = pattern_search(obj, unit_rows, _pair_starts(d, budget, with_zero=True), budget, workers=workers)
    lower, upper = nu_bounds(p)
    raw, value, clamped = res.value, res.value, False
    if raw > upper:
        if raw > upper + 1e-9:
            log.warning("nu estimate %.17g exceeds 2^p = %.17g at p=%g; clamped", raw, upper, p)
        value, clamped = upper, True
    elif raw < lower:
        log.info("nu estimate %.17g below lower bound %.17g at p=%g; clamped", raw, lower, p)
        value, clamped = lower, True
    z = res.point
    return ModulusSample(p, value, (z[:d].copy(), z[d:].copy()), budget, raw, res.evaluations, clamped)


def _violated(sample: ModulusSample, threshold: float, margin: float) -> bool:
    return sample.value > threshold + margin


def mr_estimate(space: SpaceSpec, tol_p: float = 5e-3, budget: SearchBudget = DEFAULT_BUDGET, *,
                margin: float = VIOLATION_MARGIN, workers: int = 1) -> Bracket:
    """Bracket the maximal roundness by bisection on ``nu(p) > 2 + margin`` over ``[1, 2]``.

    Returns the degenerate bracket ``[2, 2]`` when no violation is found at 2.
    """
    if not tol_p > 0:
        raise InvalidParameterError("tol_p must be positive")
    bad = lambda p: _violated(nu_estimate(space, p, budget, workers=workers), 2.0, margin)
    if not bad(2.0):
        return Bracket(2.0, 2.0, True, True)
    lo, hi = 1.0, 2.0
    ok_lo = not bad(lo)
    while hi - lo > tol_p:
        mid = 0.5 * (lo + hi)
        if bad(mid):
            hi = mid
        else:
            lo, ok_lo = mid, True
    return Bracket(lo, hi, ok_lo, False)


def mc_estimate(space: SpaceSpec, p_max: float = 16.0, tol_p: float = 5e-3,
                budget: SearchBudget = DEFAULT_BUDGET, *, margin: float = VIOLATION_MARGIN,
                workers: int = 1) -> Union[Bracket, AtLeast]:
    """Bracket the minimal coroundness by bisection on ``nu(p) > 2^(p-1) + margin`` over ``[2, p_max]``.

    Returns :class:`AtLeast` when the inequality still fails at ``p_max``.
    """
    if not p_max >= 2:
        raise InvalidParameterError("p_max must be >= 2")
    if not tol_p > 0:
        raise InvalidParameterError("tol_p must be positive")
    bad = lambda p: _violated(nu_estimate(space, p, budget, workers=workers), 2.0 ** (p - 1), margin)
    if not bad(2.0):
        return Bracket(2.0, 2.0, True, True)
    if bad(p_max):
        return AtLeast(float(p_max))
    lo, hi = 2.0, float(p_max)
    while hi - lo > tol_p:
        mid = 0.5 * (lo + hi)
        if bad(mid):
            lo = mid
        else:
            hi = mid
    return Bracket(lo, hi, False, True)


def _sphere_pair(norm, Z, d):
    x, u = Z[..., :d], Z[..., d:]
    n = norm(np.stack([x, u]))
    with np.errstate(divide="ignore", invalid="ignore"):
        return x / n[0][..., None], u / n[1][..., None]


def _rho_objective(norm, d, t):
    def f(Z):
        x, u = _sphere_pair(norm, Z, d)
        y = t * u
        n = norm(np.stack([x + y, x - y]))
        return 0.5 * (n[0] + n[1]) - 1.0

    return f


def rho_value(space: SpaceSpec, x, y) -> float:
    """``(||x+y|| + ||x-y||)/2 - 1`` for one pair (no normalisation)."""
    norm = make_norm(space)
    n = norm(np.stack([as_vector(x) + as_vector(y), as_vector(x) - as_vector(y)]))
    return float(0.5 * (n[0] + n[1]) - 1.0)


def rho_estimate(space: SpaceSpec, t: float, budget: SearchBudget = DEFAULT_BUDGET, *, workers: int = 1) -> ModulusSample:
    """Lower estimate of the modulus of smoothness ``rho_X(t)``, sup over ``||x|| = 1``, ``||y|| = t``."""
    _check_space(space)
    if not t >= 0:
        raise InvalidParameterError(f"t must be >= 0, got {t}")
    d = space.size
    norm = make_norm(space)
    if t == 0:
        e = np.eye(d)[0] / float(norm(np.eye(d)[0]))
        return ModulusSample(0.0, 0.0, (e, np.zeros(d)), budget, 0.0)
    obj = _rho_objective(norm, d, t)
    res = pattern_search(obj, unit_blocks(d), _pair_starts(d, budget), budget, workers=workers)
    x, u = _sphere_pair(norm, res.point[None, :], d)
    raw = res.value
    value = min(max(raw, 0.0), t)
    return ModulusSample(t, value, (x[0], t * u[0]), budget, raw, res.evaluations, value != raw)


def _delta_objective(norm, d, eps):
    def f(Z):
        x, y = _sphere_pair(norm, Z, d)
        n = norm(np.stack([x + y, x - y]))
        val = 1.0 - 0.5 * n[0]
        return np.where(n[1] >= eps, val, np.inf)

    return f


def delta_value(space: SpaceSpec, x, y) -> float:
    """``1 - ||x+y||/2`` for one pair (no normalisation)."""
    return float(1.0 - 0.5 * make_norm(space)(as_vector(x) + as_vector(y)))


def delta_estimate(space: SpaceSpec, eps: float, budget: SearchBudget = DEFAULT_BUDGET, *, workers: int = 1) -> ModulusSample:
    """Upper estimate of the modulus of convexity ``delta_X(eps)``.

    Pairs on the unit sphere with ``||x-y|| < eps`` are discarded. Halton
    starts that are infeasible are pulled towards ``y = -x`` until feasible.
    """
    _check_space(space)
    if not 0 <= eps <= 2:
        raise InvalidParameterError(f"eps must lie in [0, 2], got {eps}")
    d = space.size
    norm = make_norm(space)
    obj = _delta_objective(norm, d, eps)
    starts = unit_blocks(d)(_pair_starts(d, budget, with_negatives=True))
    starts = _repair_delta_starts(norm, starts, d, eps)
    res = pattern_search(obj, unit_blocks(d), starts, budget, maximize=False, workers=workers)
    feasible = math.isfinite(res.value)
    x, y = _sphere_pair(norm, res.point[None, :], d)
    if not feasible:
        log.warning("no feasible pair found for delta at eps=%g", eps)
        return ModulusSample(eps, 0.0, (x[0], y[0]), budget, math.inf, res.evaluations, False, False)
    value = min(max(res.value, 0.0), 1.0)
    return ModulusSample(eps, value, (x[0], y[0]), budget, res.value, res.evaluations, value != res.value)


def _repair_delta_starts(norm, Z, d, eps):
    Z = Z.copy()
    for _ in range(30):
        x, y = _sphere_pair(norm, Z, d)
        gap = norm(x - y)
        bad = ~(gap >= eps)
        if not np.any(bad):
            break
        xb, yb = Z[bad, :d], Z[bad, d:]
        Z[bad, d:] = -xb + 0.5 * (yb + xb)
        Z[bad] = unit_blocks(d)(Z[bad])
    return Z


def _clarkson_objective(norm, d, p):
    q = conjugate(p)

    def f(Z):
        ns, nd, nx, ny = _pair_norms(norm, Z, d)
        den = 2.0 ** (1 / q) * (nx**p + ny**p) ** (1 / p)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (ns**q + nd**q) ** (1 / q) / den
        return np.where(den < DEN_FLOOR, np.nan, val)

    return f


def clarkson_value(space: SpaceSpec, p: float, x, y) -> float:
    d = space.size
    z = np.concatenate([as_vector(x, d), as_vector(y, d)])
    return float(_clarkson_objective(make_norm(space), d, p)(z[None, :])[0])


def clarkson_ratio(space: SpaceSpec, p: float, budget: SearchBudget = DEFAULT_BUDGET, *, workers: int = 1) -> ModulusSample:
    """Lower estimate of ``sup (||x+y||^p' + ||x-y||^p')^(1/p') / (2^(1/p') (||x||^p + ||y||^p)^(1/p))``.

    A value ``<= 1`` means the Clarkson-type inequality with exponent ``p``
    held at every pair the search visited.
    """
    _check_space(space)
    if not 1 < p <= 2:
        raise InvalidParameterError(f"p must lie in (1, 2], got {p}")
    d = space.size
    obj = _clarkson_objective(make_norm(space), d, p)
    res = pattern_search(obj, unit_rows, _pair_starts(d, budget, with_zero=True), budget, workers=workers)
    z = res.point
    return ModulusSample(p, res.value, (z[:d].copy(), z[d:].copy()), budget, res.value, res.evaluations)


def duality_gap(base: SpaceSpec, p: float, budget: SearchBudget = DEFAULT_BUDGET, resolution: int = 10_000,
                *, workers: int = 1) -> float:
    """``|nu_X(p)^(1/p) - nu_X*(p')^(1/p')|`` with ``X*`` the numerical dual of a 2-D base."""
    _check_space(base)
    if base.size != 2:
        raise InvalidParameterError("duality_gap needs a 2-dimensional base space")
    if not p > 1:
        raise InvalidParameterError(f"p must be > 1, got {p}")
    q = conjugate(p)
    a = nu_estimate(base, p, budget, workers=workers).value ** (1 / p)
    b = nu_estimate(numerical_dual(base, resolution), q, budget, workers=workers).value ** (1 / q)
    return abs(a - b)


def frechet_exponent(space: SpaceSpec, x, y, t_grid: Optional[Sequence[float]] = None,
                     *, floor: float = 1e-13) -> FrechetResult:
    """Fit ``r`` in ``||x + t y|| = 1 + f t + O(t^r)`` for unit vectors ``x``, ``y``.

    ``f`` is the symmetric quotient ``(||x+ty|| - ||x-ty||)/(2t)`` at the
    smallest ``t``; ``r`` is the least-squares slope of
    ``log|| x+ty|| - 1 - f t|`` against ``log t``. Remainders below ``floor``
    are left out; if none remain the result is degenerate with ``r = inf``.
    ``ambiguous`` is set when the one-sided quotients keep disagreeing as
    ``t`` shrinks (a corner of the unit sphere).
    """
    _check_space(space)
    norm = make_norm(space)
    x = as_vector(x, space.size)
    y = as_vector(y, space.size)
    for name, v in (("x", x), ("y", y)):
        if abs(float(norm(v)) - 1.0) > 1e-8:
            raise InvalidParameterError(f"{name} must lie on the unit sphere")
    t = np.array([10.0**-k for k in (1, 2, 3, 4)] if t_grid is None else t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(t <= 0) or np.any(np.diff(t) >= 0) or t.min() < 1e-6:
        raise InvalidParameterError("t_grid must be positive, strictly decreasing, with min >= 1e-6")
    plus = norm(x[None, :] + t[:, None] * y[None, :])
    minus = norm(x[None, :] - t[:, None] * y[None, :])
    f = float((plus[-1] - minus[-1]) / (2 * t[-1]))
    right = (plus - 1.0) / t
    left = (1.0 - minus) / t
    gap = np.abs(right - left)
    ambiguous = bool(gap[-1] > 1e-8 and gap[-1] > 0.5 * gap[0])
    rem = np.abs(plus - 1.0 - f * t)
    keep = rem >= floor
    if keep.sum() < 2:
        return FrechetResult(math.inf, f, ambiguous, True, rem)
    slope = np.polyfit(np.log(t[keep]), np.log(rem[keep]), 1)[0]
    return FrechetResult(float(slope), f, ambiguous, False, rem)


def log_convexity_check(space: SpaceSpec, p0: float, p1: float, theta: float,
                        budget: SearchBudget = DEFAULT_BUDGET, *, workers: int = 1) -> float:
    """``nu(p)^(1/p) - (nu(p0)^(1/p0))^(1-theta) (nu(p1)^(1/p1))^theta`` with ``1/p = (1-theta)/p0 + theta/p1``.

    The endpoints use a doubled budget. A clearly positive return points to an
    estimator shortfall at ``p0`` or ``p1``.
    """
    if not 0 < theta < 1:
        raise InvalidParameterError(f"theta must lie in (0, 1), got {theta}")
    if not (p0 >= 1 and p1 >= 1):
        raise InvalidParameterError("p0 and p1 must be >= 1")
    p = 1.0 / ((1 - theta) / p0 + theta / p1)
    big = budget.enlarged(2)
    lhs = nu_estimate(space, p, budget, workers=workers).value ** (1 / p)
    r0 = nu_estimate(space, p0, big, workers=workers).value ** (1 / p0)
    r1 = nu_estimate(space, p1, big, workers=workers).value ** (1 / p1)
    return float(lhs - r0 ** (1 - theta) * r1**theta)
