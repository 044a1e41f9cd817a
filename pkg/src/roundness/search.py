"""Deterministic multi-start coordinate pattern search.

All starts advance in lockstep as one numpy batch, but every start keeps its
own step size and stopping state, so the trajectory of a start depends only on
its own initial point. Splitting the starts into chunks (optionally run on a
thread pool) therefore gives bit-identical results.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import InvalidParameterError

__all__ = ["SearchBudget", "SearchResult", "pattern_search", "halton_directions", "anchor_directions"]


@dataclass(frozen=True)
class SearchBudget:
    """Multi-start pattern search settings.

    ``starts`` quasi-random starts are generated from ``seed`` (structured
    anchor starts are added on top); each start halves its step
    ``refine_steps`` times by the factor ``shrink``.
    """

    starts: int = 256
    refine_steps: int = 60
    shrink: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.starts < 1:
            raise InvalidParameterError("starts must be >= 1")
        if self.refine_steps < 0:
            raise InvalidParameterError("refine_steps must be >= 0")
        if not 0 < self.shrink < 1:
            raise InvalidParameterError("shrink must lie in (0, 1)")

    def enlarged(self, factor: int = 2) -> "SearchBudget":
        return SearchBudget(self.starts * factor, self.refine_steps, self.shrink, self.seed)


DEFAULT_BUDGET = SearchBudget()


@dataclass
class SearchResult:
    value: float
    point: np.ndarray
    start_index: int
    evaluations: int


def halton_directions(count: int, dim: int, seed: int) -> np.ndarray:
    """``count`` scrambled-Halton points mapped to Gaussian directions in ``R^dim``."""
    u = qmc.Halton(d=dim, scramble=True, seed=seed).random(count)
    return ndtri(np.clip(u, 1e-12, 1 - 1e-12))


def anchor_directions(d: int) -> np.ndarray:
    """Basis vectors and, for ``d <= 8``, all ``e_i +- e_j`` (unnormalised)."""
    eye = np.eye(d)
    rows = list(eye)
    if d <= 8:
        for i, j in itertools.combinations(range(d), 2):
            rows.append(eye[i] + eye[j])
            rows.append(eye[i] - eye[j])
    return np.array(rows)


def _search_chunk(objective, project, Z, budget, initial_step, hmin, maximize):
    Z = project(np.array(Z, dtype=float))
    B, n = Z.shape
    sign = 1.0 if maximize else -1.0
    F = sign * objective(Z)
    F = np.where(np.isnan(F), -np.inf, F)
    H = np.full(B, float(initial_step))
    shrinks = np.zeros(B, dtype=int)
    evals = B
    E = np.concatenate([np.eye(n), -np.eye(n)])
    max_iter = max(1, 12 * budget.refine_steps)
    for _ in range(max_iter):
        active = (shrinks < budget.refine_steps) & (H >= hmin)
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        cand = Z[idx, None, :] + H[idx, None, None] * E[None, :, :]
        cand = project(cand)
        val = sign * objective(cand)
        val = np.where(np.isnan(val), -np.inf, val)
        evals += val.size
        k = np.argmax(val, axis=1)
        best = val[np.arange(idx.size), k]
        better = best > F[idx]
        mv = idx[better]
        Z[mv] = cand[np.nonzero(better)[0], k[better]]
        F[mv] = best[better]
        st = idx[~better]
        H[st] *= budget.shrink
        shrinks[st] += 1
    return sign * F, Z, evals


def pattern_search(objective, project, starts, budget: SearchBudget, *, maximize=True,
                   initial_step=0.25, hmin=1e-13, workers=1, chunk=256) -> SearchResult:
    """Run coordinate pattern search from every row of ``starts``.

    ``objective`` maps ``(..., n)`` points to ``(...)`` values (``nan`` or
    ``-inf`` mark rejected points when maximising; use ``+inf`` when
    minimising). ``project`` maps points back onto the search manifold and is
    applied to every candidate. The best start wins, ties going to the lowest
    start index.
    """
    starts = np.asarray(starts, dtype=float)
    pieces = [starts[i:i + chunk] for i in range(0, starts.shape[0], chunk)]
    run = lambda Z: _search_chunk(objective, project, Z, budget, initial_step, hmin, maximize)
    if workers > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, pieces))
    else:
        results = [run(Z) for Z in pieces]
    F = np.concatenate([r[0] for r in results])
    Z = np.concatenate([r[1] for r in results])
    evals = sum(r[2] for r in results)
    key = F if maximize else -F
    key = np.where(np.isnan(key), -np.inf, key)
    i = int(np.argmax(key))  # first maximal index
    return SearchResult(float(F[i]), Z[i].copy(), i, evals)


def unit_rows(Z: np.ndarray) -> np.ndarray:
    n = np.sqrt((Z * Z).sum(axis=-1, keepdims=True))
    return Z / np.where(n > 0, n, 1.0)


def unit_blocks(d: int):
    """Projection normalising each length-``d`` block to Euclidean length 1."""

    def project(Z):
        Z = np.asarray(Z, dtype=float)
        blocks = Z.reshape(Z.shape[:-1] + (-1, d))
        n = np.sqrt((blocks * blocks).sum(axis=-1, keepdims=True))
        out = blocks / np.where(n > 0, n, 1.0)
        return out.reshape(Z.shape)

    return project

