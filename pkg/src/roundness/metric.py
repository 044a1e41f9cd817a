"""Finite metric spaces: 4-point roundness, maximal generalised roundness and a brute-force oracle."""

from __future__ import annotations

import csv
import io
import itertools
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .errors import CostGuardError, InvalidParameterError, MetricValidationError, SpecParseError
from .moduli import AtLeast

__all__ = [
    "FiniteMetricSpace",
    "PMatrix",
    "MgrResult",
    "validate_metric",
    "p_matrix",
    "roundness_defect",
    "roundness_profile",
    "sanchez_mgr",
    "scan_functions",
    "gr_bruteforce",
    "cycle",
    "path",
    "complete_bipartite",
    "simplex",
    "read_metric_csv",
]

TRIANGLE_SLACK = 1e-12
MAX_GR_POINTS = 8


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    dist: np.ndarray

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def permuted(self, perm: Sequence[int]) -> "FiniteMetricSpace":
        perm = np.asarray(perm)
        return FiniteMetricSpace(self.dist[np.ix_(perm, perm)].copy())


@dataclass(frozen=True, eq=False)
class PMatrix:
    p: float
    entries: np.ndarray


@dataclass(frozen=True)
class MgrResult:
    value: Union[float, AtLeast]
    root_source: str
    bracket_width: float

    @property
    def finite(self) -> bool:
        return not isinstance(self.value, AtLeast)

    def csv_row(self) -> str:
        v = str(self.value) if not self.finite else f"{self.value:.17g}"
        return f"{v},{self.root_source},{self.bracket_width:.17g}"


def validate_metric(dist) -> FiniteMetricSpace:
    """Check that ``dist`` is a metric and wrap it.

    Raises :class:`MetricValidationError` naming the first offending entries.
    """
    D = np.array(dist, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise MetricValidationError("shape", D.shape, f"distance table must be square, got shape {D.shape}")
    if not np.all(np.isfinite(D)):
        i, j = np.argwhere(~np.isfinite(D))[0]
        raise MetricValidationError("positivity", (i, j), f"non-finite distance at ({i}, {j})")
    n = D.shape[0]
    for i in range(n):
        if D[i, i] != 0:
            raise MetricValidationError("diagonal", (i, i), f"d({i},{i}) = {D[i, i]} is not 0")
    asym = np.argwhere(D != D.T)
    if asym.size:
        i, j = asym[0]
        raise MetricValidationError("symmetry", (i, j), f"d({i},{j}) = {D[i, j]} but d({j},{i}) = {D[j, i]}")
    off = ~np.eye(n, dtype=bool)
    bad = np.argwhere(off & (D <= 0))
    if bad.size:
        i, j = bad[0]
        raise MetricValidationError("positivity", (i, j), f"d({i},{j}) = {D[i, j]} is not positive")
    # excess[i, j, k] = d(i,k) - d(i,j) - d(j,k)
    excess = D[:, None, :] - D[:, :, None] - D[None, :, :]
    worst = np.argwhere(excess > TRIANGLE_SLACK)
    if worst.size:
        i, j, k = worst[0]
        raise MetricValidationError(
            "triangle", (i, k, j), f"d({i},{k}) = {D[i, k]} > d({i},{j}) + d({j},{k}) = {D[i, j] + D[j, k]}")
    return FiniteMetricSpace(D)


def p_matrix(m: FiniteMetricSpace, p: float) -> PMatrix:
    if not p > 0:
        raise InvalidParameterError(f"p must be > 0, got {p}")
    return PMatrix(float(p), m.dist**p)


def roundness_defect(m: FiniteMetricSpace, p: float) -> Tuple[float, Tuple[int, int, int, int]]:
    """Max over ordered quadruples ``(a1, a2, b1, b2)`` of
    ``d(a1,a2)^p + d(b1,b2)^p - sum_ij d(a_i,b_j)^p``, with its first maximiser."""
    if not p >= 1:
        raise InvalidParameterError(f"p must be >= 1, got {p}")
    P = m.dist**p
    n = m.n
    # axes: a1, a2, b1, b2
    val = (P[:, :, None, None] + P[None, None, :, :]
           - P[:, None, :, None] - P[:, None, None, :] - P[None, :, :, None] - P[None, :, None, :])
    flat = int(np.argmax(val))
    return float(val.flat[flat]), tuple(int(i) for i in np.unravel_index(flat, (n,) * 4))


def roundness_profile(m: FiniteMetricSpace, p_grid: Sequence[float]) -> List[Tuple[float, float]]:
    grid = [float(p) for p in p_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise InvalidParameterError("p_grid must be sorted")
    return [(p, roundness_defect(m, p)[0]) for p in grid]


def scan_functions(m: FiniteMetricSpace, p: float) -> Tuple[float, float]:
    """``det(D_p)`` and ``det(D_p) * <D_p^{-1} 1, 1>`` from one LU factorisation.

    An exactly singular factorisation gives ``(0, 0)``.
    """
    D = m.dist**p
    n = m.n
    if n == 1:
        return 0.0, 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(D, check_finite=True)
    diag = np.diag(lu)
    swaps = np.count_nonzero(piv != np.arange(n))
    det = (-1.0) ** swaps * float(np.prod(diag))
    if np.any(diag == 0):
        return 0.0, 0.0
    ones = np.ones(n)
    q = float(ones @ lu_solve((lu, piv), ones))
    return det, det * q


def _bisect(fun, a, b, fa, tol):
    while b - a > tol:
        mid = 0.5 * (a + b)
        fm = fun(mid)
        if fm == 0:
            return mid, mid
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return a, b


def sanchez_mgr(m: FiniteMetricSpace, p_max: float = 20.0, grid_step: float = 0.01, tol: float = 1e-9) -> MgrResult:
    """Smallest ``p > 0`` with ``det(D_p) = 0`` or ``<D_p^{-1} 1, 1> = 0``.

    Both ``det`` and ``s = det * <D_p^{-1} 1, 1>`` are scanned on
    ``grid_step, 2 grid_step, ..., p_max``; the first sign change or near
    zero (``|f| < tol * max(1, median |f| so far)``) is bisected to width
    ``tol``. The smaller root wins; on a tie the determinant is reported.
    """
    if not p_max > 0:
        raise InvalidParameterError("p_max must be > 0")
    if not grid_step > 0 or not tol > 0:
        raise InvalidParameterError("grid_step and tol must be positive")
    if m.n < 2:
        return MgrResult(AtLeast(float(p_max)), "none", 0.0)
    steps = int(math.floor(p_max / grid_step + 1e-9))
    grid = [grid_step * k for k in range(1, steps + 1)]
    if not grid or grid[-1] < p_max - 1e-12:
        grid.append(float(p_max))
    funcs = (lambda p: scan_functions(m, p)[0], lambda p: scan_functions(m, p)[1])
    names = ("determinant", "quadratic_form")
    found = [None, None]
    seen = ([], [])
    prev = None
    for p in grid:
        vals = scan_functions(m, p)
        for k in (0, 1):
            if found[k] is not None:
                continue
            f = vals[k]
            seen[k].append(abs(f))
            scale = max(1.0, float(np.median(seen[k])))
            if abs(f) < tol * scale:
                found[k] = (p, p)
            elif prev is not None and (prev[1][k] > 0) != (f > 0) and prev[1][k] != 0:
                found[k] = _bisect(funcs[k], prev[0], p, prev[1][k], tol)
        if any(r is not None for r in found):
            break
        prev = (p, vals)
    roots = [(r[1], k, r[1] - r[0]) for k, r in enumerate(found) if r is not None]
    if not roots:
        return MgrResult(AtLeast(float(p_max)), "none", 0.0)
    roots.sort(key=lambda r: (r[0], r[1]))
    best = roots[0]
    # a root within tol of the determinant's counts as shared
    shared = [r for r in roots if abs(r[0] - best[0]) <= tol]
    pick = min(shared, key=lambda r: r[1])
    mid = pick[0] - 0.5 * pick[2]
    return MgrResult(float(mid), names[pick[1]], float(pick[2]))


def gr_bruteforce(m: FiniteMetricSpace, p: float, n_points: int = 2):
    """Max over ``a_1..a_n, b_1..b_n`` (repeats allowed) of
    ``sum_{i<j} d(a_i,a_j)^p + sum_{i<j} d(b_i,b_j)^p - sum_{i,j} d(a_i,b_j)^p``,
    summing ordered pairs (so twice the unordered sums) in the first two terms.

    Returns ``(defect, (a, b))``. Refuses spaces with more than 8 points.
    """
    if n_points not in (2, 3):
        raise InvalidParameterError("n_points must be 2 or 3")
    if not p >= 0:
        raise InvalidParameterError("p must be >= 0")
    configs = m.n ** (2 * n_points)
    if m.n > MAX_GR_POINTS:
        raise CostGuardError(
            f"{m.n} points exceed the limit of {MAX_GR_POINTS}; {configs} configurations would be enumerated",
            configs)
    P = m.dist**p
    tuples = np.array(list(itertools.product(range(m.n), repeat=n_points)))
    within = np.zeros(len(tuples))
    for i in range(n_points):
        for j in range(n_points):
            within += P[tuples[:, i], tuples[:, j]]
    cross = np.zeros((len(tuples), len(tuples)))
    for i in range(n_points):
        for j in range(n_points):
            cross += P[tuples[:, i][:, None], tuples[:, j][None, :]]
    val = within[:, None] + within[None, :] - 2 * cross
    flat = int(np.argmax(val))
    ia, ib = np.unravel_index(flat, val.shape)
    return float(val.flat[flat]), (tuple(int(v) for v in tuples[ia]), tuple(int(v) for v in tuples[ib]))


def cycle(n: int) -> FiniteMetricSpace:
    """Graph metric of the ``n``-cycle."""
    k = np.arange(n)
    diff = np.abs(k[:, None] - k[None, :])
    return validate_metric(np.minimum(diff, n - diff))


def path(n: int) -> FiniteMetricSpace:
    k = np.arange(n)
    return validate_metric(np.abs(k[:, None] - k[None, :]))


def complete_bipartite(a: int, b: int) -> FiniteMetricSpace:
    side = np.array([0] * a + [1] * b)
    D = np.where(side[:, None] == side[None, :], 2.0, 1.0)
    np.fill_diagonal(D, 0.0)
    return validate_metric(D)


def simplex(n: int, edge: float = 1.0) -> FiniteMetricSpace:
    """``n`` points at mutual distance ``edge``."""
    D = np.full((n, n), float(edge))
    np.fill_diagonal(D, 0.0)
    return validate_metric(D)


def read_metric_csv(source: Union[str, Path, io.TextIOBase]) -> FiniteMetricSpace:
    """Read an ``n x n`` comma-separated distance table; ``#`` lines are skipped."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    rows, width = [], None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = next(csv.reader([line]))
        try:
            row = [float(f) for f in fields]
        except ValueError:
            raise SpecParseError(f"non-numeric entry in {line.strip()!r}", lineno) from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise SpecParseError(f"expected {width} entries, got {len(row)}", lineno)
        rows.append(row)
    if not rows:
        raise SpecParseError("no distance rows found")
    if len(rows) != width:
        raise SpecParseError(f"table has {len(rows)} rows but {width} columns")
    return validate_metric(rows)
