"""Exact 1D Wasserstein-2, the empirical sliced Wasserstein estimator, and
constructions of distinct measures at empirical distance zero.

The estimator averages squared 1D distances over p unit directions:
``sw(a, b)^2 = mean_i W2^2(proj_i a, proj_i b)``.  It is a pseudo-distance:
for p <= d there are measures other than the target at distance zero, and
this module constructs them (a translation along the common kernel of the
directions for p < d, a critical-case reweighting of the candidate grid for
p = d).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import linprog
from scipy.spatial.distance import cdist

from .coupling import measure_from_coupling, sample_coupling
from .errors import (
    DegenerateInstanceError,
    DimensionMismatchError,
    SupercriticalRegimeError,
)
from .measure import DiscreteMeasure, new_discrete_measure, pushforward
from .projection import ProjectionLaw, ProjectionStack, projection_stack
from .reconstruction import candidate_support, critical_grid

# Quantile breakpoints closer than this are treated as ties; they arise from
# float noise in cumulative weights and would otherwise pair stray mass
# slivers across distant atoms.
LEVEL_TIE_TOL = 1e-12


@dataclass(frozen=True)
class DirectionSet:
    """p unit vectors in R^dim with sampling provenance."""

    dim: int
    thetas: np.ndarray  # (p, dim), unit rows
    seed: int

    @property
    def n_directions(self) -> int:
        return self.thetas.shape[0]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def direction_set(thetas, seed: int = 0) -> DirectionSet:
    """Build a :class:`DirectionSet` from explicit vectors (rows normalized)."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    norms = np.linalg.norm(thetas, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise DimensionMismatchError("direction vectors must be nonzero")
    return DirectionSet(int(thetas.shape[1]), _readonly(thetas / norms), int(seed))


def sample_directions(dim: int, p: int, seed: int = 0) -> DirectionSet:
    """p i.i.d. uniform unit vectors (normalized Gaussians), deterministic per seed."""
    if dim < 2:
        raise DimensionMismatchError(f"ambient dimension must be >= 2, got {dim}")
    if p < 1:
        raise DimensionMismatchError(f"need at least one direction, got {p}")
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    g = rng.standard_normal((p, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return DirectionSet(int(dim), _readonly(g), int(seed))


def directions_from_stack(stack: ProjectionStack) -> DirectionSet:
    """Reinterpret a stack of single-row blocks as a direction set."""
    for i, b in enumerate(stack.blocks):
        if b.shape[0] != 1:
            raise DimensionMismatchError(f"block {i} is not a single direction")
    return direction_set(np.vstack(stack.blocks), seed=stack.seed)


def wasserstein2_1d(alpha: DiscreteMeasure, beta: DiscreteMeasure,
                    level_tol: float = LEVEL_TIE_TOL) -> float:
    """Exact W2 between weighted measures on R via the merged-CDF sweep.

    Both quantile functions are piecewise constant; sweeping the union of
    their cumulative-weight breakpoints accumulates
    ``sum (mass slice) * (x_alpha - x_beta)^2`` exactly, in
    O((n+m) log(n+m)).  Breakpoints closer than ``level_tol`` are merged.
    """
    if alpha.dim != 1 or beta.dim != 1:
        raise DimensionMismatchError("wasserstein2_1d expects one-dimensional measures")
    xa, xb = alpha.points[:, 0], beta.points[:, 0]  # canonical order is ascending
    cum_a, cum_b = np.cumsum(alpha.weights), np.cumsum(beta.weights)
    levels = np.concatenate(([0.0], np.union1d(cum_a, cum_b)))
    levels = levels[np.concatenate(([True], np.diff(levels) > level_tol))]
    mids = 0.5 * (levels[:-1] + levels[1:])
    masses = np.diff(levels)
    ia = np.minimum(np.searchsorted(cum_a, mids, side="left"), xa.size - 1)
    ib = np.minimum(np.searchsorted(cum_b, mids, side="left"), xb.size - 1)
    total = float(np.sum(masses * (xa[ia] - xb[ib]) ** 2))
    return math.sqrt(max(total, 0.0))


def wasserstein2_exact(alpha: DiscreteMeasure, beta: DiscreteMeasure) -> float:
    """Exact W2 in any dimension via the dense transport linear program.

    Brute force over the full n x m transport polytope; intended as a
    reference for desk-scale instances, independently of the 1D sweep.
    """
    if alpha.dim != beta.dim:
        raise DimensionMismatchError(
            f"measures live in R^{alpha.dim} and R^{beta.dim}"
        )
    n, m = alpha.n_atoms, beta.n_atoms
    cost = cdist(alpha.points, beta.points, "sqeuclidean").ravel()
    A_eq = np.zeros((n + m, n * m))
    for i in range(n):
        A_eq[i, i * m:(i + 1) * m] = 1.0
    for j in range(m):
        A_eq[n + j, j::m] = 1.0
    b_eq = np.concatenate([alpha.weights, beta.weights])
    res = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed with status {res.status}: {res.message}")
    return math.sqrt(max(float(res.fun), 0.0))


def empirical_sw(alpha: DiscreteMeasure, beta: DiscreteMeasure, dirs: DirectionSet) -> float:
    """Empirical sliced Wasserstein: sqrt of the mean squared 1D distance.

    Projections are inner products with each direction; the p directional
    distances are summed in canonical direction order for determinism.
    """
    if alpha.dim != beta.dim or alpha.dim != dirs.dim:
        raise DimensionMismatchError("measures and directions must share one dimension")
    total = 0.0
    for theta in dirs.thetas:
        w = wasserstein2_1d(pushforward(alpha, theta), pushforward(beta, theta))
        total += w * w
    return math.sqrt(total / dirs.n_directions)


def null_sw_witness(Z: DiscreteMeasure, dirs: DirectionSet, t: float = 1.0,
                    seed: int = 0, steps: int = 100) -> DiscreteMeasure:
    """A measure distinct from Z at empirical sliced distance zero.

    For p < d the atoms are translated by ``t`` along a unit vector of the
    common kernel of the directions, so every projection is untouched while
    the ambient distance equals |t| (and can be made arbitrarily large).
    For p = d the direction stack is critical: the candidate grid carries a
    polytope of valid weights, and a random non-diagonal coupling yields a
    measure with identical projections.  For p > d no witness exists.
    """
    if Z.dim != dirs.dim:
        raise DimensionMismatchError("measure and directions must share one dimension")
    p, d = dirs.n_directions, Z.dim
    if p > d:
        raise SupercriticalRegimeError(
            f"{p} directions in R^{d}: the empirical distance separates, no witness exists"
        )
    if p < d:
        kernel = scipy.linalg.null_space(dirs.thetas)
        shift = float(t) * kernel[:, 0]
        return new_discrete_measure(Z.points + shift, Z.weights)
    if Z.n_atoms == 1:
        raise DegenerateInstanceError(
            "single atom with p = d directions: the measure is genuinely unique"
        )
    stack = projection_stack([theta[None, :] for theta in dirs.thetas],
                             law=ProjectionLaw.SPHERE, seed=dirs.seed)
    support = candidate_support(Z, stack)
    grid = critical_grid(support, Z.n_atoms, p)
    coupling = sample_coupling(Z.weights, p, seed=seed, steps=steps)
    return measure_from_coupling(coupling, grid)


def directions_to_dict(dirs: DirectionSet) -> dict:
    return {"dim": dirs.dim, "thetas": dirs.thetas.tolist(), "seed": dirs.seed}


def directions_from_dict(d: dict) -> DirectionSet:
    return direction_set(d["thetas"], seed=int(d["seed"]))


def directions_to_json(dirs: DirectionSet) -> str:
    return json.dumps(directions_to_dict(dirs))


def directions_from_json(s: str) -> DirectionSet:
    return directions_from_dict(json.loads(s))
