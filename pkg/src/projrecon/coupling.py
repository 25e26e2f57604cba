"""The critical-case weight polytope: nonnegative p-tensors with all axis
marginals equal to a fixed probability vector b.

A member ``a`` assigns weight ``a[l_1, ..., l_p]`` to the grid point generated
by the index tuple ``(l_1, ..., l_p)``; membership is exactly the condition
that every projected image of the reweighted grid reproduces the pushforwards
of the original measure.  Uniqueness of weights over a candidate support is
decided by probing coordinate bounds of the constraint polytope.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import linprog
from scipy.spatial.distance import cdist

from .errors import ConfigError, InfeasibleError, TupleBudgetExceededError
from .measure import (
    DEFAULT_MERGE_TOL,
    DiscreteMeasure,
    _merge_close_atoms,
    new_discrete_measure,
    pushforward,
)

if TYPE_CHECKING:  # pragma: no cover
    from .projection import ProjectionStack
    from .reconstruction import CandidateSupport

DEFAULT_TUPLE_BUDGET = 10**7
MARGINAL_TOL = 1e-10
FEASIBILITY_TOL = 1e-8
BOUND_TOL = 1e-8
DEFAULT_MATCH_TOL = 1e-6


@dataclass(frozen=True)
class CouplingTensor:
    """Flat nonnegative tensor of shape (n,)*p in row-major tuple order."""

    n: int
    p: int
    entries: np.ndarray  # (n**p,)

    def tensor(self) -> np.ndarray:
        return self.entries.reshape((self.n,) * self.p)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _make_tensor(n: int, p: int, entries: np.ndarray) -> CouplingTensor:
    entries = np.asarray(entries, dtype=float).reshape(-1)
    if entries.shape[0] != n**p:
        raise ConfigError(f"expected {n**p} entries, got {entries.shape[0]}")
    if float(entries.min(initial=0.0)) < -1e-12:
        raise ConfigError("coupling entries must be nonnegative")
    entries = np.maximum(entries, 0.0)
    total = float(entries.sum())
    if abs(total - 1.0) > 1e-12:
        raise ConfigError(f"coupling entries sum to {total!r}, expected 1 within 1e-12")
    return CouplingTensor(int(n), int(p), _readonly(entries))


def _check_budget(n: int, p: int, budget: int = DEFAULT_TUPLE_BUDGET) -> None:
    if n**p > budget:
        raise TupleBudgetExceededError(f"n^p = {n**p} exceeds budget {budget}")


def _validate_prob_vector(b) -> np.ndarray:
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size == 0 or np.any(b <= 0) or abs(float(b.sum()) - 1.0) > 1e-9:
        raise ConfigError("b must be a strictly positive probability vector")
    return b / float(b.sum())


def coupling_marginal(coupling: CouplingTensor, axis: int) -> np.ndarray:
    """Axis marginal: sum of entries over all tuple positions except ``axis``."""
    other = tuple(i for i in range(coupling.p) if i != axis)
    return coupling.tensor().sum(axis=other)


def independent_coupling(b, p: int) -> CouplingTensor:
    """Product tensor ``a[l_1,...,l_p] = b[l_1] * ... * b[l_p]``."""
    b = _validate_prob_vector(b)
    _check_budget(b.size, p)
    t = reduce(np.multiply.outer, [b] * p) if p > 1 else b.copy()
    return _make_tensor(b.size, p, np.asarray(t).ravel())


def diagonal_coupling(b, p: int) -> CouplingTensor:
    """All mass on the diagonal: ``a[l,...,l] = b[l]``, zero elsewhere."""
    b = _validate_prob_vector(b)
    n = b.size
    _check_budget(n, p)
    entries = np.zeros(n**p)
    flat = np.ravel_multi_index(tuple(np.arange(n) for _ in range(p)), (n,) * p)
    entries[flat] = b
    return _make_tensor(n, p, entries)


def sample_coupling(b, p: int, seed: int = 0, steps: int = 100) -> CouplingTensor:
    """Random member of the polytope, reachable from the independent coupling.

    Applies ``steps`` random 2x2 exchange moves: pick two axes, two indices
    per axis, fix the remaining coordinates, and shift mass around the
    resulting four-entry cycle.  Each move preserves every axis marginal
    identically; the shift magnitude is drawn uniformly within the bounds
    nonnegativity allows.
    """
    b = _validate_prob_vector(b)
    n = b.size
    if n < 2 or p < 2:
        raise ConfigError("sample_coupling needs n >= 2 atoms and p >= 2 axes")
    _check_budget(n, p)
    t = independent_coupling(b, p).tensor().copy()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    for _ in range(int(steps)):
        ax_i, ax_j = rng.choice(p, size=2, replace=False)
        ki, ki2 = rng.choice(n, size=2, replace=False)
        kj, kj2 = rng.choice(n, size=2, replace=False)
        rest = rng.integers(0, n, size=p)

        def cell(a, c):
            idx = rest.copy()
            idx[ax_i], idx[ax_j] = a, c
            return tuple(idx)

        plus1, plus2 = cell(ki, kj), cell(ki2, kj2)
        minus1, minus2 = cell(ki, kj2), cell(ki2, kj)
        lo = -min(t[plus1], t[plus2])
        hi = min(t[minus1], t[minus2])
        eps = rng.uniform(lo, hi)
        t[plus1] += eps
        t[plus2] += eps
        t[minus1] -= eps
        t[minus2] -= eps
        for c in (plus1, plus2, minus1, minus2):
            t[c] = max(t[c], 0.0)
    return _make_tensor(n, p, t.ravel())


def measure_from_coupling(coupling: CouplingTensor, grid: np.ndarray,
                          merge_tol: float = DEFAULT_MERGE_TOL) -> DiscreteMeasure:
    """Reweight the tuple grid by the coupling entries.

    ``grid`` holds the grid point for each flat tuple index, row-major.
    Zero-weight grid points are dropped; coincident survivors are merged.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.shape[0] != coupling.entries.shape[0]:
        raise ConfigError("grid size does not match the coupling tensor")
    mask = coupling.entries > 0.0
    pts, masses = _merge_close_atoms(grid[mask], coupling.entries[mask], merge_tol)
    return new_discrete_measure(pts, masses, dedup_tol=merge_tol / 2)


def _assemble_marginal_system(locations: np.ndarray, Z: DiscreteMeasure,
                              stack: "ProjectionStack", match_tol: float):
    """Equality system ``A a = c`` tying candidate weights to pushforward masses.

    One row per (block, pushforward atom): the candidates projecting onto
    that atom must carry exactly its mass.  A final row fixes total mass 1.
    Candidates whose image matches no atom of some pushforward cannot carry
    mass; they are reported in ``pinned`` and must be bounded to zero.
    """
    k = locations.shape[0]
    rows, rhs = [], []
    pinned = np.zeros(k, dtype=bool)
    for block in stack.blocks:
        beta = pushforward(Z, block)
        proj = locations @ block.T
        dist = cdist(proj, beta.points)
        nearest = np.argmin(dist, axis=1)
        ok = dist[np.arange(k), nearest] <= match_tol
        pinned |= ~ok
        for t in range(beta.n_atoms):
            row = np.zeros(k)
            row[(nearest == t) & ok] = 1.0
            rows.append(row)
            rhs.append(float(beta.weights[t]))
    rows.append(np.ones(k))
    rhs.append(1.0)
    return np.array(rows), np.array(rhs), pinned


def _solve_lp(c, A_eq, b_eq, bounds):
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status == 2:
        raise InfeasibleError(
            "weight polytope is empty; the original weights are always feasible, "
            "so a tolerance upstream has failed"
        )
    if res.status != 0:
        raise RuntimeError(f"linear program failed with status {res.status}: {res.message}")
    return res


def weight_polytope_uniqueness(candidates: "CandidateSupport", Z: DiscreteMeasure,
                               stack: "ProjectionStack",
                               match_tol: float = DEFAULT_MATCH_TOL,
                               bound_tol: float = BOUND_TOL):
    """Decide whether the candidate support admits a unique weight assignment.

    Solves 2k bound problems (minimize and maximize each coordinate over the
    polytope); weights are unique iff every coordinate has min == max within
    ``bound_tol``.  This handles nonnegativity correctly where a pure rank
    argument would not.

    Returns
    -------
    (unique, witness) : (bool, ndarray)
        ``witness`` is a feasible weight vector aligned with
        ``candidates.points`` order.
    """
    locations = np.array([cp.location for cp in candidates.points])
    if locations.size == 0:
        raise ConfigError("candidate support is empty")
    k = locations.shape[0]
    A_eq, b_eq, pinned = _assemble_marginal_system(locations, Z, stack, match_tol)
    bounds = [(0.0, 0.0) if pinned[j] else (0.0, None) for j in range(k)]

    witness = _solve_lp(np.zeros(k), A_eq, b_eq, bounds).x
    unique = True
    for j in range(k):
        c = np.zeros(k)
        c[j] = 1.0
        lo = _solve_lp(c, A_eq, b_eq, bounds).fun
        hi = -_solve_lp(-c, A_eq, b_eq, bounds).fun
        if hi - lo > bound_tol:
            unique = False
            break
    return unique, _readonly(witness)


def weight_vector_feasible(candidates: "CandidateSupport", Z: DiscreteMeasure,
                           stack: "ProjectionStack", weights,
                           match_tol: float = DEFAULT_MATCH_TOL,
                           tol: float = FEASIBILITY_TOL) -> bool:
    """Check whether a given weight vector over the candidates is a solution."""
    locations = np.array([cp.location for cp in candidates.points])
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.shape[0] != locations.shape[0]:
        raise ConfigError("weight vector length does not match the candidate count")
    A_eq, b_eq, pinned = _assemble_marginal_system(locations, Z, stack, match_tol)
    if np.any(w < -tol) or np.any(w[pinned] > tol):
        return False
    return bool(np.max(np.abs(A_eq @ w - b_eq)) <= tol)


def coupling_to_dict(c: CouplingTensor) -> dict:
    return {"n": c.n, "p": c.p, "entries": c.entries.tolist()}


def coupling_from_dict(d: dict) -> CouplingTensor:
    return _make_tensor(int(d["n"]), int(d["p"]), np.asarray(d["entries"], dtype=float))


def coupling_to_json(c: CouplingTensor) -> str:
    return json.dumps(coupling_to_dict(c))


def coupling_from_json(s: str) -> CouplingTensor:
    return coupling_from_dict(json.loads(s))
