"""Concrete norms and the :class:`SpaceSpec` description they are built from.

Every norm acts on the last axis of its argument, so a ``(..., d)`` array of
vectors gives a ``(...)`` array of norms. Each element is processed
independently (iterative routines mask converged entries), so results do not
depend on how a batch is split up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import orlicz as _orlicz
from .errors import EvaluationError, InvalidParameterError, ShapeError

__all__ = [
    "SpaceSpec",
    "as_vector",
    "lp_norm",
    "lplq_norm",
    "schatten_norm",
    "singular_values",
    "symmetric_eigvals",
    "luxemburg_norm",
    "racetrack_norm",
    "racetrack_dual_norm",
    "dual_norm_2d",
    "sphere_polygon",
    "make_norm",
    "lp",
    "lplq",
    "schatten",
    "orlicz_space",
    "racetrack",
    "racetrack_dual",
    "numerical_dual",
    "conjugate",
]

KINDS = ("lp", "lplq", "schatten", "orlicz", "racetrack", "racetrack_dual", "numerical_dual")


def conjugate(p: float) -> float:
    """Conjugate exponent ``p'`` with ``1/p + 1/p' = 1`` (``inf`` for ``p = 1``)."""
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def as_vector(x, length: Optional[int] = None) -> np.ndarray:
    """Validate ``x`` as a finite, non-empty 1-D vector."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ShapeError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidParameterError("vector entries must be finite")
    if length is not None and v.size != length:
        raise ShapeError(f"expected a vector of length {length}, got {v.size}")
    return v


def _check_p(p, name="p"):
    if not p >= 1:
        raise InvalidParameterError(f"{name} must be >= 1, got {p}")


def _lp(a: np.ndarray, p: float) -> np.ndarray:
    a = np.abs(a)
    if math.isinf(p):
        return a.max(axis=-1)
    if p == 1:
        return a.sum(axis=-1)
    if p == 2:
        return np.sqrt((a * a).sum(axis=-1))
    m = a.max(axis=-1)
    safe = np.where(m > 0, m, 1.0)
    return m * np.power(np.power(a / safe[..., None], p).sum(axis=-1), 1.0 / p)


def lp_norm(x, p: float):
    """``(sum |x_i|^p)^(1/p)`` along the last axis."""
    _check_p(p)
    return _lp(np.asarray(x, dtype=float), p)


def lplq_norm(x, outer: int, inner: int, p: float, q: float):
    """Norm of ``l^p(l^q)``: ``x`` is read as ``outer`` blocks of length ``inner``."""
    _check_p(p)
    _check_p(q, "q")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != outer * inner:
        raise ShapeError(f"length {x.shape[-1]} does not equal outer*inner = {outer * inner}")
    blocks = x.reshape(x.shape[:-1] + (outer, inner))
    return _lp(_lp(blocks, q), p)


def symmetric_eigvals(S, tol: float = 1e-14, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of symmetric matrices ``S`` (shape ``(..., n, n)``) by cyclic Jacobi.

    Sweeps continue for each matrix until its off-diagonal Frobenius norm is
    below ``tol`` times its full Frobenius norm (or exactly zero).
    """
    A = np.array(S, dtype=float, copy=True)
    n = A.shape[-1]
    batch = A.shape[:-2]
    A = A.reshape((-1, n, n))
    if n > 1:
        offmask = ~np.eye(n, dtype=bool)
        for _ in range(max_sweeps):
            off = np.sqrt((A[:, offmask] ** 2).sum(axis=1))
            full = np.sqrt((A**2).sum(axis=(1, 2)))
            active = off > tol * full
            if not np.any(active):
                break
            for i in range(n - 1):
                for j in range(i + 1, n):
                    aij = A[:, i, j]
                    rot = active & (aij != 0)
                    safe = np.where(rot, aij, 1.0)
                    # huge theta overflows to t = 0, i.e. a negligible rotation
                    with np.errstate(over="ignore"):
                        theta = (A[:, j, j] - A[:, i, i]) / (2 * safe)
                        t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1))
                    t = np.where(theta == 0, 1.0, t)
                    c = 1 / np.sqrt(t * t + 1)
                    s = t * c
                    c = np.where(rot, c, 1.0)[:, None]
                    s = np.where(rot, s, 0.0)[:, None]
                    ci, cj = A[:, :, i].copy(), A[:, :, j].copy()
                    A[:, :, i] = c * ci - s * cj
                    A[:, :, j] = s * ci + c * cj
                    ri, rj = A[:, i, :].copy(), A[:, j, :].copy()
                    A[:, i, :] = c * ri - s * rj
                    A[:, j, :] = s * ri + c * rj
        else:
            raise EvaluationError("Jacobi iteration did not converge")
    return np.diagonal(A, axis1=1, axis2=2).reshape(batch + (n,))


def singular_values(A) -> np.ndarray:
    """Singular values of square matrices via Jacobi on ``A^T A`` (descending)."""
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ShapeError(f"expected square matrices, got shape {A.shape}")
    if A.shape[-1] == 2:
        a, b, c, d = A[..., 0, 0], A[..., 0, 1], A[..., 1, 0], A[..., 1, 1]
        r1 = np.hypot(a + d, b - c)
        r2 = np.hypot(a - d, b + c)
        return np.stack([0.5 * (r1 + r2), 0.5 * np.abs(r1 - r2)], axis=-1)
    # explicit products keep each entry independent of batch layout
    gram = (A[..., :, :, None] * A[..., :, None, :]).sum(axis=-3)
    ev = np.maximum(symmetric_eigvals(gram), 0.0)
    return -np.sort(-np.sqrt(ev), axis=-1)


def schatten_norm(A, p: float):
    """``l^p`` norm of the singular values of ``A``."""
    _check_p(p)
    return _lp(singular_values(A), p)


def luxemburg_norm(x, phi, rtol: float = 1e-10):
    """Luxemburg norm ``inf{k > 0 : sum Phi(|x_i|/k) <= 1}`` along the last axis.

    The root of ``sum Phi(|x_i|/k) = 1`` is bracketed by doubling and halving
    ``k`` from ``max |x_i|`` and then bisected until the bracket's relative
    width is below ``rtol``.
    """
    a = np.abs(np.asarray(x, dtype=float))
    shape = a.shape[:-1]
    a = a.reshape((-1, a.shape[-1]))
    m = a.max(axis=1)
    nz = m > 0
    out = np.zeros(a.shape[0])
    if not np.any(nz):
        return out.reshape(shape)
    a, m = a[nz], m[nz]

    def total(k):
        with np.errstate(over="ignore", invalid="ignore"):
            s = np.asarray(phi(a / k[:, None]), dtype=float).sum(axis=1)
        return s

    hi = m.copy()
    lo = m.copy()
    for _ in range(1100):
        s = total(hi)
        if np.any(np.isnan(s)):
            raise EvaluationError("Orlicz function returned NaN while bracketing")
        grow = s > 1
        if not np.any(grow):
            break
        hi = np.where(grow, hi * 2, hi)
    else:
        raise EvaluationError("could not bracket the Luxemburg norm from above")
    for _ in range(1100):
        s = total(lo)
        if np.any(np.isnan(s)):
            raise EvaluationError("Orlicz function returned NaN while bracketing")
        shrink = s < 1
        if not np.any(shrink):
            break
        lo = np.where(shrink, lo / 2, lo)
    else:
        raise EvaluationError("could not bracket the Luxemburg norm from below")
    for _ in range(200):
        active = (hi - lo) > rtol * hi
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        s = total(mid)
        if not np.all(np.isfinite(s[active])):
            raise EvaluationError("non-finite Orlicz values inside the bracket")
        above = s > 1
        lo = np.where(active & above, mid, lo)
        hi = np.where(active & ~above, mid, hi)
    out[nz] = 0.5 * (lo + hi)
    return out.reshape(shape)


def racetrack_norm(x):
    """``|x2|`` if ``|x2| >= |x1|``, else ``(x1^2 + x2^2)/(2|x1|)``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2:
        raise ShapeError("racetrack vectors have length 2")
    a, b = np.abs(x[..., 0]), np.abs(x[..., 1])
    curved = b < a
    safe = np.where(curved, a, 1.0)
    return np.where(curved, (a * a + b * b) / (2 * safe), b)


def racetrack_dual_norm(x):
    """``sqrt(x1^2 + x2^2) + |x1|``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2:
        raise ShapeError("racetrack vectors have length 2")
    return np.hypot(x[..., 0], x[..., 1]) + np.abs(x[..., 0])


@dataclass(frozen=True)
class _Polygon:
    vertices: np.ndarray  # (m, 2), counter-clockwise
    normal_angles: np.ndarray  # unwrapped, increasing


@lru_cache(maxsize=32)
def sphere_polygon(base: "SpaceSpec", resolution: int) -> _Polygon:
    """Vertices ``d_k / ||d_k||`` for ``resolution`` equispaced angles ``d_k``."""
    ang = 2 * np.pi * np.arange(resolution) / resolution
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    norm = make_norm(base)
    verts = dirs / norm(dirs)[:, None]
    edges = np.roll(verts, -1, axis=0) - verts
    normals = np.arctan2(-edges[:, 0], edges[:, 1])
    return _Polygon(verts, np.unwrap(normals))


def _support(poly: _Polygon, f: np.ndarray) -> np.ndarray:
    # edge k joins vertex k to k+1 with outward normal angle normal_angles[k];
    # the maximising vertex for f lies between the normals of its two edges.
    m = poly.vertices.shape[0]
    base = poly.normal_angles[0]
    alpha = np.mod(np.arctan2(f[..., 1], f[..., 0]) - base, 2 * np.pi) + base
    k = np.searchsorted(poly.normal_angles, alpha) % m
    best = None
    for off in (-2, -1, 0, 1, 2):
        v = poly.vertices[(k + off) % m]
        val = (v * f).sum(axis=-1)
        best = val if best is None else np.maximum(best, val)
    return best


def dual_norm_2d(base: "SpaceSpec", f, resolution: int = 10_000, method: str = "support"):
    """Lower bound for the dual norm of ``f`` from a polygon inscribed in the base sphere.

    ``method="brute"`` takes the maximum over all vertices; the default
    locates the maximising vertex by its edge normals, which gives the same
    value for a convex base in ``O(log resolution)`` per vector.
    """
    if resolution < 8:
        raise InvalidParameterError(f"resolution must be >= 8, got {resolution}")
    if base.size != 2:
        raise InvalidParameterError("numerical dual norms need a 2-dimensional base")
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != 2:
        raise ShapeError("dual vectors have length 2")
    poly = sphere_polygon(base, int(resolution))
    if method == "brute":
        return (f[..., None, :] * poly.vertices).sum(axis=-1).max(axis=-1)
    return _support(poly, f)


@dataclass(frozen=True)
class SpaceSpec:
    """Tagged description of a finite-dimensional normed space.

    ``dim`` is the vector length for ``lp`` and ``orlicz`` and the matrix side
    for ``schatten``. ``orlicz_fn`` is a descriptor such as ``example2(p=2)``.
    """

    kind: str
    p: Optional[float] = None
    q: Optional[float] = None
    dim: Optional[int] = None
    outer: Optional[int] = None
    inner: Optional[int] = None
    orlicz_fn: Optional[str] = None
    base: Optional["SpaceSpec"] = None
    dual_resolution: Optional[int] = None

    def __post_init__(self):
        k = self.kind
        if k not in KINDS:
            raise InvalidParameterError(f"unknown space kind {k!r}")
        for name in ("dim", "outer", "inner", "dual_resolution"):
            v = getattr(self, name)
            if v is not None and (int(v) != v or v < 1):
                raise InvalidParameterError(f"{name} must be a positive integer, got {v}")
        required = {
            "lp": ("p", "dim"),
            "lplq": ("p", "q", "outer", "inner"),
            "schatten": ("p", "dim"),
            "orlicz": ("orlicz_fn", "dim"),
            "racetrack": (),
            "racetrack_dual": (),
            "numerical_dual": ("base",),
        }[k]
        for name in required:
            if getattr(self, name) is None:
                raise InvalidParameterError(f"space kind {k!r} needs parameter {name!r}")
        if self.p is not None:
            _check_p(self.p)
        if self.q is not None:
            _check_p(self.q, "q")
        if k == "numerical_dual":
            if self.base.size != 2:
                raise InvalidParameterError("numerical_dual only wraps 2-dimensional bases")
            if self.dual_resolution is not None and self.dual_resolution < 8:
                raise InvalidParameterError("dual_resolution must be >= 8")
        if k == "orlicz":
            _orlicz.from_descriptor(self.orlicz_fn)

    @property
    def size(self) -> int:
        """Length of the coordinate vectors representing elements."""
        if self.kind in ("lp", "orlicz"):
            return int(self.dim)
        if self.kind == "lplq":
            return int(self.outer * self.inner)
        if self.kind == "schatten":
            return int(self.dim) ** 2
        return 2

    @property
    def resolution(self) -> int:
        return 10_000 if self.dual_resolution is None else int(self.dual_resolution)

    def norm(self, x):
        return make_norm(self)(np.asarray(x, dtype=float))

    def describe(self) -> str:
        parts = [f"{k}={v}" for k, v in self._params()]
        return f"{self.kind}({', '.join(parts)})"

    def _params(self):
        for name in ("p", "q", "dim", "outer", "inner", "orlicz_fn", "base", "dual_resolution"):
            v = getattr(self, name)
            if v is None:
                continue
            if isinstance(v, SpaceSpec):
                v = v.describe()
            yield name, v


@lru_cache(maxsize=64)
def make_norm(spec: SpaceSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Return a batched norm evaluator for ``spec`` (acts on the last axis)."""
    k = spec.kind
    if k == "lp":
        p = spec.p
        return lambda x: _lp(x, p)
    if k == "lplq":
        o, i, p, q = spec.outer, spec.inner, spec.p, spec.q
        return lambda x: _lp(_lp(x.reshape(x.shape[:-1] + (o, i)), q), p)
    if k == "schatten":
        n, p = spec.dim, spec.p
        return lambda x: _lp(singular_values(x.reshape(x.shape[:-1] + (n, n))), p)
    if k == "orlicz":
        phi = _orlicz.from_descriptor(spec.orlicz_fn)
        return lambda x: luxemburg_norm(x, phi)
    if k == "racetrack":
        return racetrack_norm
    if k == "racetrack_dual":
        return racetrack_dual_norm
    base, res = spec.base, spec.resolution
    return lambda x: dual_norm_2d(base, x, res)


def lp(p: float, dim: int) -> SpaceSpec:
    return SpaceSpec("lp", p=float(p), dim=int(dim))


def lplq(p: float, q: float, outer: int, inner: int) -> SpaceSpec:
    return SpaceSpec("lplq", p=float(p), q=float(q), outer=int(outer), inner=int(inner))


def schatten(p: float, dim: int) -> SpaceSpec:
    return SpaceSpec("schatten", p=float(p), dim=int(dim))


def orlicz_space(orlicz_fn: str, dim: int) -> SpaceSpec:
    return SpaceSpec("orlicz", orlicz_fn=orlicz_fn, dim=int(dim))


def racetrack() -> SpaceSpec:
    return SpaceSpec("racetrack")


def racetrack_dual() -> SpaceSpec:
    return SpaceSpec("racetrack_dual")


def numerical_dual(base: SpaceSpec, resolution: int = 10_000) -> SpaceSpec:
    return SpaceSpec("numerical_dual", base=base, dual_resolution=int(resolution))
