"""Discrete probability measures on R^d and their linear pushforwards.

A measure is a weighted point cloud ``sum_l w_l * delta_{x_l}`` with strictly
positive weights summing to one and pairwise-distinct atoms.  Atoms are stored
in canonical (lexicographic) order, which makes serialization and atom
matching deterministic.  All values are immutable after construction and all
operations are pure functions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DimensionMismatchError,
    DuplicatePointsError,
    NonpositiveWeightError,
    WeightSumMismatchError,
)

DEFAULT_DEDUP_TOL = 1e-9
DEFAULT_MERGE_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _canonical_order(points: np.ndarray) -> np.ndarray:
    # lexsort treats its last key as primary, so feed coordinates reversed
    return np.lexsort(points.T[::-1])


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point cloud in R^dim with atoms in canonical order.

    Attributes
    ----------
    dim : int
        Ambient dimension.
    points : ndarray, shape (n, dim)
        Atom locations, pairwise distinct, lexicographically sorted.
    weights : ndarray, shape (n,)
        Strictly positive weights summing to one.
    """

    dim: int
    points: np.ndarray
    weights: np.ndarray

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]


def new_discrete_measure(points, weights, dedup_tol: float = DEFAULT_DEDUP_TOL) -> DiscreteMeasure:
    """Validate and build a :class:`DiscreteMeasure`.

    Weights are renormalized to sum exactly to one when their sum is within
    1e-9 of one; larger deviations are rejected rather than silently fixed.

    Raises
    ------
    DimensionMismatchError
        Empty input, ragged vectors, or mismatched lengths.
    NonpositiveWeightError
        Any weight <= 0 or not finite.
    WeightSumMismatchError
        |sum(weights) - 1| > 1e-9.
    DuplicatePointsError
        Two points closer than ``dedup_tol``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise DimensionMismatchError("points must be a nonempty list of equal-length vectors")
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.shape[0] != pts.shape[0]:
        raise DimensionMismatchError(
            f"{pts.shape[0]} points but {w.shape[0]} weights"
        )
    if not np.all(np.isfinite(pts)):
        raise DimensionMismatchError("points contain non-finite coordinates")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise NonpositiveWeightError("weights must be finite and strictly positive")
    total = float(np.sum(w))
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise WeightSumMismatchError(f"weights sum to {total!r}, expected 1 within {WEIGHT_SUM_TOL}")
    w = w / total

    if pts.shape[0] > 1:
        nearest = cKDTree(pts).query(pts, k=2)[0][:, 1]
        if float(np.min(nearest)) <= dedup_tol:
            raise DuplicatePointsError(
                f"minimum pairwise distance {float(np.min(nearest))!r} <= dedup_tol {dedup_tol}"
            )

    order = _canonical_order(pts)
    return DiscreteMeasure(int(pts.shape[1]), _readonly(pts[order]), _readonly(w[order]))


def _merge_close_atoms(points: np.ndarray, weights: np.ndarray, merge_tol: float):
    """Greedy cluster of atoms within ``merge_tol``, scanning in canonical order.

    The representative of each cluster is its first member in canonical
    order, so every output location is one of the input locations exactly.
    """
    order = _canonical_order(points)
    reps: list[np.ndarray] = []
    masses: list[float] = []
    for i in order:
        x = points[i]
        target = -1
        # reps are in ascending first-coordinate order; only a trailing
        # window can be within merge_tol
        for j in range(len(reps) - 1, -1, -1):
            if reps[j][0] < x[0] - merge_tol:
                break
            if np.linalg.norm(x - reps[j]) <= merge_tol:
                target = j
                break
        if target >= 0:
            masses[target] += weights[i]
        else:
            reps.append(x)
            masses.append(float(weights[i]))
    return np.array(reps), np.array(masses)


def pushforward(measure: DiscreteMeasure, P, merge_tol: float = DEFAULT_MERGE_TOL) -> DiscreteMeasure:
    """Image measure of ``measure`` under the linear map ``P``.

    Parameters
    ----------
    measure : DiscreteMeasure
    P : array_like, shape (h, dim) or (dim,)
        Matrix of the linear map; a 1-d array is treated as a single row.
    merge_tol : float
        Images closer than this are merged with summed weights.

    Returns
    -------
    DiscreteMeasure on R^h.  Every output atom equals ``P @ z`` for some
    input atom ``z`` exactly; total mass is preserved (no renormalization).
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.shape[1] != measure.dim:
        raise DimensionMismatchError(
            f"map with {P.shape[1]} columns applied to measure in R^{measure.dim}"
        )
    images = measure.points @ P.T
    pts, masses = _merge_close_atoms(images, measure.weights, merge_tol)
    order = _canonical_order(pts)
    return DiscreteMeasure(int(P.shape[0]), _readonly(pts[order]), _readonly(masses[order]))


def measures_equal(a: DiscreteMeasure, b: DiscreteMeasure, tol: float = 1e-9) -> bool:
    """Atom-by-atom equality up to ``tol`` in position and weight.

    Greedy nearest-atom matching after canonical sort; exact whenever the
    minimum atom separation is large compared to ``tol``.
    """
    if a.dim != b.dim or a.n_atoms != b.n_atoms:
        return False
    used = np.zeros(b.n_atoms, dtype=bool)
    for i in range(a.n_atoms):
        d = np.linalg.norm(b.points - a.points[i], axis=1)
        d[used] = np.inf
        j = int(np.argmin(d))
        if d[j] > tol or abs(a.weights[i] - b.weights[j]) > tol:
            return False
        used[j] = True
    return True


def measure_to_dict(m: DiscreteMeasure) -> dict:
    """JSON-ready dict ``{"dim", "points", "weights"}`` in canonical atom order."""
    return {"dim": m.dim, "points": m.points.tolist(), "weights": m.weights.tolist()}


def measure_from_dict(d: dict, dedup_tol: float = DEFAULT_DEDUP_TOL) -> DiscreteMeasure:
    """Parse and validate the JSON dict format (atoms accepted in any order)."""
    return new_discrete_measure(d["points"], d["weights"], dedup_tol=dedup_tol)


def measure_to_json(m: DiscreteMeasure) -> str:
    return json.dumps(measure_to_dict(m))


def measure_from_json(s: str, dedup_tol: float = DEFAULT_DEDUP_TOL) -> DiscreteMeasure:
    return measure_from_dict(json.loads(s), dedup_tol=dedup_tol)
