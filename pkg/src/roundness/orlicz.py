"""Orlicz functions and the hypothesis checks used on them.

Two concrete families are provided besides plain powers:

* example 1: ``Psi0(t) = t^p |log(t0 t)| + (1 - 1/p) t^p`` on ``[0, 1]``,
  continued linearly beyond 1, together with the normalised primitive
  ``Phi(t) = int_0^t Psi(s)/s ds / int_0^1 Psi(s)/s ds`` (numerically via
  :func:`phi_from_psi`, or in closed form via :func:`phi_example1`);
* example 2: ``t^p / (1 + |log t|)`` on ``[0, 1]`` and ``t^(2p)`` beyond.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import EvaluationError, InvalidParameterError, InvalidT0Error, NonIntegrableError

__all__ = [
    "OrliczFunction",
    "power",
    "psi_example1",
    "phi_example1",
    "phi_from_psi",
    "phi_example2",
    "largest_valid_t0",
    "validate_orlicz",
    "delta2_index",
    "supermult_check",
    "sqrt_convexity_check",
    "smoothness_ratio_sup",
    "log_grid",
    "from_descriptor",
]

log = logging.getLogger(__name__)

GRID_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class OrliczFunction:
    """An evaluable function on ``[0, inf)`` with optional derivative.

    ``evaluate`` and ``derivative`` act elementwise on numpy arrays.
    ``descriptor`` is the text form used in space-spec files, e.g.
    ``example2(p=2)``; it is ``None`` for functions built ad hoc.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    params: dict = field(default_factory=dict)
    label: str = ""
    descriptor: Optional[str] = None

    def __call__(self, t):
        return self.evaluate(np.asarray(t, dtype=float))

    def scaled(self, factor: float) -> "OrliczFunction":
        ev, der = self.evaluate, self.derivative
        return OrliczFunction(
            evaluate=lambda t: factor * ev(t),
            derivative=None if der is None else (lambda t: factor * der(t)),
            params=dict(self.params),
            label=f"{factor}*{self.label}",
        )


def log_grid(lo: float, hi: float, num: int) -> np.ndarray:
    """Log-spaced grid from ``hi`` down to ``lo`` (decreasing)."""
    return np.logspace(math.log10(hi), math.log10(lo), num)


def _check_increasing_convex(values: np.ndarray, grid: np.ndarray, what: str, tol=1e-10):
    d1 = np.diff(values)
    bad = np.nonzero(d1 <= 0)[0]
    if bad.size:
        return float(grid[bad[0] + 1]), f"{what} is not strictly increasing"
    d2 = values[2:] - 2 * values[1:-1] + values[:-2]
    bad = np.nonzero(d2 < -tol)[0]
    if bad.size:
        return float(grid[bad[0] + 1]), f"{what} is not convex"
    return None, ""


def validate_orlicz(phi: OrliczFunction, upper: float = 2.0, num: int = 4001) -> None:
    """Check ``Phi(0)=0``, strict increase and convexity on a uniform grid, growth at 1e3."""
    grid = np.linspace(0.0, upper, num)
    vals = np.asarray(phi(grid), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise InvalidParameterError(f"{phi.label}: non-finite values on validation grid")
    if vals[0] != 0.0:
        raise InvalidParameterError(f"{phi.label}: Phi(0) = {vals[0]!r}, expected 0")
    point, why = _check_increasing_convex(vals, grid, phi.label or "Phi")
    if point is not None:
        raise InvalidParameterError(f"{why} near t = {point:.6g}")
    # convexity with Phi(0)=0 forces Phi(T) >= T*Phi(1)
    big = float(phi(1e3))
    if not (math.isfinite(big) and big >= 1e3 * float(phi(1.0)) * (1 - 1e-9)):
        raise InvalidParameterError(f"{phi.label}: Phi does not grow to infinity (Phi(1e3) = {big!r})")


def power(p: float) -> OrliczFunction:
    """``Phi(t) = t^p``."""
    if not p >= 1:
        raise InvalidParameterError(f"power Orlicz function needs p >= 1, got {p}")
    return OrliczFunction(
        evaluate=lambda t: np.power(t, p),
        derivative=lambda t: p * np.power(t, p - 1),
        params={"p": p},
        label=f"t^{p:g}",
        descriptor=f"power(p={p!r})",
    )


def _psi0_parts(p, t0):
    L0 = -math.log(t0)
    a = L0 + 1 - 1 / p  # Psi0(1)
    b = p * L0 + p - 2  # Psi0'(1)
    return L0, a, b


def psi_example1(p: float, t0: float, validate: bool = True) -> OrliczFunction:
    """Example-1 function ``Psi``: ``Psi0`` on ``[0, 1]`` and its tangent line beyond.

    ``Psi0(t) = t^p |log(t0 t)| + (1 - 1/p) t^p``. With ``validate`` set,
    ``Psi0`` is checked for strict increase and convexity on a 10^4-point grid
    of ``[0, 1]`` and :class:`InvalidT0Error` reports the first offending point.
    """
    if not 1 < p < 2:
        raise InvalidParameterError(f"example 1 needs 1 < p < 2, got {p}")
    if not 0 < t0 < 1:
        raise InvalidT0Error(f"t0 must lie in (0, 1), got {t0}", t0)
    _, a, b = _psi0_parts(p, t0)

    def psi0(t):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.power(t, p) * (np.abs(np.log(t0 * t)) + 1 - 1 / p)
        return np.where(t > 0, out, 0.0)

    def evaluate(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= 1, psi0(np.minimum(t, 1.0)), a + (t - 1) * b)

    def derivative(t):
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 1e-300, 1.0)
        inner = np.power(tc, p - 1) * (p * np.abs(np.log(t0 * tc)) + p - 2)
        return np.where(t <= 1, np.where(t > 0, inner, 0.0), b)

    if validate:
        grid = np.linspace(0.0, 1.0, 10_001)
        point, why = _check_increasing_convex(psi0(grid), grid, "Psi0")
        if point is not None:
            raise InvalidT0Error(f"t0 = {t0}: {why} near t = {point:.6g}", point)
    return OrliczFunction(
        evaluate=evaluate,
        derivative=derivative,
        params={"p": p, "t0": t0},
        label=f"Psi_ex1(p={p:g}, t0={t0:g})",
        descriptor=f"psi_example1(p={p!r}, t0={t0!r})",
    )


def largest_valid_t0(p: float) -> float:
    """Largest ``t0`` in ``{0.01 k : k = 1..99}`` accepted by :func:`psi_example1`."""
    for k in range(99, 0, -1):
        t0 = round(0.01 * k, 2)
        try:
            psi_example1(p, t0)
        except InvalidT0Error:
            continue
        return t0
    raise InvalidT0Error(f"no grid value of t0 is valid for p = {p}", None)


def phi_example1(p: float, t0: float) -> OrliczFunction:
    """Closed form of the normalised primitive of example 1.

    On ``[0, 1]`` this is ``c_p t^p (1 + |log(t0 t)|)`` with
    ``c_p = 1/(1 + |log t0|)``; beyond 1 it integrates the linear branch of
    ``Psi`` exactly.
    """
    psi = psi_example1(p, t0)
    L0, a, b = _psi0_parts(p, t0)
    cp = 1.0 / (1.0 + L0)
    scale = cp * p  # 1 / int_0^1 Psi(s)/s ds

    def evaluate(t):
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 1e-300, 1.0)
        low = cp * np.power(tc, p) * (1 + np.abs(np.log(t0 * tc)))
        low = np.where(t > 0, low, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            high = 1.0 + scale * ((a - b) * np.log(np.maximum(t, 1.0)) + b * (t - 1))
        return np.where(t <= 1, low, high)

    def derivative(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = scale * psi.evaluate(t) / t
        return np.where(t > 0, out, 0.0)

    return OrliczFunction(
        evaluate=evaluate,
        derivative=derivative,
        params={"p": p, "t0": t0, "c_p": cp},
        label=f"Phi_ex1(p={p:g}, t0={t0:g})",
        descriptor=f"example1(p={p!r}, t0={t0!r})",
    )


def _head_exponent(psi: OrliczFunction) -> float:
    s = np.logspace(-12, -6, 7)
    g = psi(s) / s
    if np.any(g <= 0):
        return math.inf
    slope = np.polyfit(np.log(s), np.log(g), 1)[0]
    return float(slope)


def phi_from_psi(psi: OrliczFunction, quad_tol: float = 1e-12, head: float = 1e-2) -> OrliczFunction:
    """Normalised primitive ``Phi(t) = int_0^t Psi(s)/s ds / int_0^1 Psi(s)/s ds``.

    The integrand is integrated with adaptive quadrature. On ``[0, head]`` the
    substitution ``s = exp(-u)`` turns the endpoint singularity into a
    decaying tail on ``[-log head, inf)``.
    """
    alpha = _head_exponent(psi)
    if not alpha > -1 + 1e-3:
        raise NonIntegrableError(f"Psi(s)/s ~ s^{alpha:.3g} near 0 is not integrable")

    def integrand(s):
        return float(psi(s)) / s

    def head_integral(upper):
        val, _ = integrate.quad(lambda u: float(psi(math.exp(-u))), -math.log(upper), math.inf,
                                epsabs=quad_tol, epsrel=quad_tol, limit=200)
        return val

    def segment(lo, hi):
        points = [1.0] if lo < 1.0 < hi else None
        val, _ = integrate.quad(integrand, lo, hi, epsabs=quad_tol, epsrel=quad_tol,
                                limit=200, points=points)
        return val

    h0 = head_integral(head)
    total = h0 + segment(head, 1.0)
    if not (math.isfinite(total) and total > 0):
        raise NonIntegrableError("normalising integral is not finite and positive")

    def primitive_sorted(ts):
        # ts sorted ascending, all > 0
        out = np.empty_like(ts)
        acc, prev = None, None
        for i, t in enumerate(ts):
            if acc is None:
                if t <= head:
                    acc = head_integral(t)
                else:
                    acc = h0 + segment(head, t)
            elif t > prev:
                acc += segment(prev, t)
            out[i] = acc
            prev = t
        return out

    def evaluate(t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        res = np.zeros_like(flat)
        pos = flat > 0
        if np.any(pos):
            order = np.argsort(flat[pos], kind="stable")
            vals = flat[pos][order]
            prim = primitive_sorted(vals)
            tmp = np.empty_like(prim)
            tmp[order] = prim
            res[pos] = tmp / total
        return res.reshape(t.shape)

    def derivative(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = psi.evaluate(t) / (t * total)
        return np.where(t > 0, out, 0.0)

    return OrliczFunction(
        evaluate=evaluate,
        derivative=derivative,
        params={**psi.params, "normaliser": total},
        label=f"Phi[{psi.label}]",
    )


def phi_example2(p: float) -> OrliczFunction:
    """``t^p/(1+|log t|)`` on ``[0, 1]``, ``t^(2p)`` beyond; ``Phi(0) = 0``."""
    if not p >= 2:
        raise InvalidParameterError(f"example 2 needs p >= 2, got {p}")

    def evaluate(t):
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 1e-300, 1.0)
        low = np.where(t > 0, np.power(tc, p) / (1 + np.abs(np.log(tc))), 0.0)
        return np.where(t <= 1, low, np.power(t, 2 * p))

    def derivative(t):
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 1e-300, 1.0)
        L = np.abs(np.log(tc))
        low = np.power(tc, p - 1) * (p * (1 + L) + 1) / (1 + L) ** 2
        return np.where(t <= 1, np.where(t > 0, low, 0.0), 2 * p * np.power(t, 2 * p - 1))

    return OrliczFunction(
        evaluate=evaluate,
        derivative=derivative,
        params={"p": p},
        label=f"Phi_ex2(p={p:g})",
        descriptor=f"example2(p={p!r})",
    )


def delta2_index(phi: OrliczFunction, t_grid=None, tail_fraction: float = 0.25) -> float:
    """Estimate ``limsup_{t->0} t Phi'(t) / Phi(t)``.

    ``t_grid`` must decrease towards 0 (default: 400 log-spaced points from 1
    down to 1e-8). The ratio is evaluated on the grid and the maximum over the
    last ``tail_fraction`` of the points is returned. Without a supplied
    derivative a central difference with step ``1e-5 t`` is used. Grid points
    where ``Phi`` underflows to 0 are dropped with a warning.
    """
    t = log_grid(GRID_FLOOR, 1.0, 400) if t_grid is None else np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) >= 0) or t[-1] <= 0:
        raise InvalidParameterError("t_grid must be a positive, strictly decreasing sequence")
    vals = np.asarray(phi(t), dtype=float)
    keep = vals > 0
    if not np.all(keep):
        cut = int(np.argmin(keep))
        warnings.warn(f"Phi underflows at t = {t[cut]:.3g}; grid shortened", RuntimeWarning, stacklevel=2)
        t, vals = t[:cut], vals[:cut]
        if t.size < 2:
            raise EvaluationError("grid too short after dropping underflowed points")
    if phi.derivative is not None:
        d = np.asarray(phi.derivative(t), dtype=float)
    else:
        h = t * 1e-5
        d = (np.asarray(phi(t + h)) - np.asarray(phi(t - h))) / (2 * h)
    ratio = t * d / vals
    start = min(int(math.floor(t.size * (1 - tail_fraction))), t.size - 1)
    return float(np.max(ratio[start:]))


def supermult_check(phi: OrliczFunction, s_grid=None, t_grid=None, c: float = 1.0):
    """Worst value of ``Phi(st) - c Phi(s) Phi(t)`` over a product grid in ``(0, 1]^2``.

    Returns ``(worst, (s, t))``. Default grids are 200 log-spaced points in
    ``[1e-8, 1]``.
    """
    s = log_grid(GRID_FLOOR, 1.0, 200) if s_grid is None else np.asarray(s_grid, dtype=float)
    t = s if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(s <= 0) or np.any(s > 1) or np.any(t <= 0) or np.any(t > 1):
        raise InvalidParameterError("grid must lie in (0, 1]")
    S, T = np.meshgrid(s, t, indexing="ij")
    gap = phi(S * T) - c * phi(S) * phi(T)
    i, j = np.unravel_index(int(np.argmin(gap)), gap.shape)
    return float(gap[i, j]), (float(s[i]), float(t[j]))


def sqrt_convexity_check(phi: OrliczFunction, upper: float = 4.0, num: int = 4001, tol: float = 1e-10):
    """Minimum second difference of ``g(t) = Phi(sqrt t)`` on a uniform grid of ``[0, upper]``.

    Returns ``(worst, passed)`` where ``passed`` means ``worst >= -tol``.
    """
    if num < 100:
        raise InvalidParameterError("need at least 100 grid points")
    grid = np.linspace(0.0, upper, num)
    g = phi(np.sqrt(grid))
    d2 = g[2:] - 2 * g[1:-1] + g[:-2]
    worst = float(np.min(d2))
    return worst, worst >= -tol


def smoothness_ratio_sup(phi: OrliczFunction, t: float, num: int = 400, v_floor: float = GRID_FLOOR):
    """Grid maximum of ``Phi(u v) / (u^2 Phi(v))`` for ``t <= u <= 1``, ``0 < v <= 1``.

    Both axes are log-spaced and include their endpoints; ``v`` goes down to
    ``v_floor``. Points where ``Phi(v)`` underflows are dropped with a warning.
    """
    if not 0 < t <= 1:
        raise InvalidParameterError(f"t must lie in (0, 1], got {t}")
    u = np.array([1.0]) if t == 1 else log_grid(t, 1.0, num)
    v = log_grid(v_floor, 1.0, num)
    pv = phi(v)
    ok = pv > 0
    if not np.all(ok):
        warnings.warn("Phi(v) underflows; v grid truncated", RuntimeWarning, stacklevel=2)
        v, pv = v[ok], pv[ok]
    U, V = np.meshgrid(u, v, indexing="ij")
    ratio = phi(U * V) / (U**2 * pv[None, :])
    return float(np.max(ratio))


def from_descriptor(text: str) -> OrliczFunction:
    """Build an Orlicz function from ``example1(p=.., t0=..)``, ``example2(p=..)`` or ``power(p=..)``."""
    name, args = _parse_call(text)
    builders = {"example1": phi_example1, "example2": phi_example2, "power": power}
    if name not in builders:
        raise InvalidParameterError(f"unknown Orlicz function {name!r}")
    try:
        return builders[name](**args)
    except TypeError as exc:
        raise InvalidParameterError(f"bad arguments for {name}: {exc}") from None


def _parse_call(text: str):
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise InvalidParameterError(f"expected name(key=value, ...), got {text!r}")
    name, rest = text.split("(", 1)
    args = {}
    body = rest[:-1].strip()
    if body:
        for part in body.split(","):
            if "=" not in part:
                raise InvalidParameterError(f"expected key=value in {text!r}")
            k, v = part.split("=", 1)
            try:
                args[k.strip()] = float(v)
            except ValueError:
                raise InvalidParameterError(f"non-numeric value {v.strip()!r} in {text!r}") from None
    return name.strip(), args
