"""Random projection stacks and the preimage algebra of full-rank linear maps.

A stack is an ordered list of full-row-rank blocks P_i of shape (d_i, dim)
with d_i < dim, sampled row-wise from a law that puts no mass on hyperplanes
(standard Gaussian, or uniform on the unit sphere).  The preimage of a point b
under such a P is the affine set ``lift @ b + Ker P`` where
``lift = P^T (P P^T)^{-1}``; this module computes both pieces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, RankDeficientError

RANK_RTOL = 1e-10
_MAX_RESAMPLES = 3


class ProjectionLaw(str, Enum):
    GAUSSIAN = "gaussian"
    SPHERE = "sphere"


@dataclass(frozen=True)
class ProjectionStack:
    """Ordered full-row-rank blocks sharing one ambient dimension.

    ``law`` and ``seed`` record sampling provenance; stacks built from
    explicit blocks (bisector constructions, direction sets) carry seed 0.
    """

    dim: int
    blocks: tuple[np.ndarray, ...]
    law: ProjectionLaw
    seed: int

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_dims(self) -> tuple[int, ...]:
        return tuple(int(b.shape[0]) for b in self.blocks)

    @property
    def total_dim(self) -> int:
        """D = sum of the block output dimensions."""
        return sum(self.block_dims)

    def stacked(self) -> np.ndarray:
        """All block rows stacked into a single (D, dim) matrix."""
        return np.vstack(self.blocks)


@dataclass(frozen=True)
class PreimageDecomposition:
    """The two pieces of ``P^{-1}(b) = lift @ b + span(kernel_basis)``."""

    lift: np.ndarray          # (dim, h), equals P^T (P P^T)^{-1}
    kernel_basis: np.ndarray  # (dim, dim - h), orthonormal columns


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _rank_ok(P: np.ndarray) -> bool:
    s = np.linalg.svd(P, compute_uv=False)
    return bool(s[-1] > RANK_RTOL * s[0])


def projection_stack(blocks, law: ProjectionLaw = ProjectionLaw.SPHERE, seed: int = 0) -> ProjectionStack:
    """Validate explicit blocks into a :class:`ProjectionStack`.

    Every block must be (d_i, dim) with 1 <= d_i < dim and full row rank.
    """
    mats = tuple(np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks)
    if not mats:
        raise DimensionMismatchError("a stack needs at least one block")
    dim = mats[0].shape[1]
    for i, b in enumerate(mats):
        if b.shape[1] != dim:
            raise DimensionMismatchError(f"block {i} has {b.shape[1]} columns, expected {dim}")
        if not 1 <= b.shape[0] < dim:
            raise DimensionMismatchError(
                f"block {i} maps to dimension {b.shape[0]}, must lie in [1, {dim - 1}]"
            )
        if not _rank_ok(b):
            raise RankDeficientError(f"block {i} is numerically rank deficient")
    return ProjectionStack(int(dim), tuple(_readonly(b) for b in mats), ProjectionLaw(law), int(seed))


def sample_stack(dim: int, block_dims, law: ProjectionLaw = ProjectionLaw.GAUSSIAN,
                 seed: int = 0) -> ProjectionStack:
    """Sample a stack with i.i.d. rows from ``law``, deterministically per seed.

    Stream splitting: block ``i`` at resampling attempt ``a`` draws from
    ``SeedSequence(seed, spawn_key=(i, a))``, so blocks are independent and
    reproducible in any order.  A block failing the rank check is resampled
    at most three times (this has probability ~0 and signals a broken RNG).

    Laws: ``gaussian`` draws standard normal rows in R^dim; ``sphere``
    normalizes those rows to unit length.
    """
    if dim < 2:
        raise DimensionMismatchError(f"ambient dimension must be >= 2, got {dim}")
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    block_dims = [int(k) for k in block_dims]
    law = ProjectionLaw(law)
    mats = []
    for i, d_i in enumerate(block_dims):
        if not 1 <= d_i < dim:
            raise DimensionMismatchError(
                f"block {i} output dimension {d_i} must lie in [1, {dim - 1}]"
            )
        block = None
        for attempt in range(1 + _MAX_RESAMPLES):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i, attempt)))
            rows = rng.standard_normal((d_i, dim))
            if law is ProjectionLaw.SPHERE:
                rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
            if _rank_ok(rows):
                block = rows
                break
        if block is None:
            raise RankDeficientError(f"block {i} rank-deficient after {_MAX_RESAMPLES} resamples")
        mats.append(block)
    return ProjectionStack(int(dim), tuple(_readonly(b) for b in mats), law, int(seed))


def preimage_decomposition(P) -> PreimageDecomposition:
    """Compute ``lift = P^T (P P^T)^{-1}`` and an orthonormal kernel basis.

    Together they parameterize the preimage of any b:
    ``P^{-1}(b) = {lift @ b + kernel_basis @ t : t free}``.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if not _rank_ok(P):
        raise RankDeficientError("matrix is numerically rank deficient")
    gram = P @ P.T
    lift = scipy.linalg.solve(gram, P, assume_a="pos").T
    kernel = scipy.linalg.null_space(P)
    return PreimageDecomposition(_readonly(lift), _readonly(kernel))


def orthogonal_projector(P) -> np.ndarray:
    """Orthogonal projector ``Q = P^T (P P^T)^{-1} P`` onto the row space of P."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = preimage_decomposition(P).lift @ P
    return _readonly(Q)


def stack_to_dict(stack: ProjectionStack) -> dict:
    return {
        "dim": stack.dim,
        "blocks": [b.tolist() for b in stack.blocks],
        "law": stack.law.value,
        "seed": stack.seed,
    }


def stack_from_dict(d: dict) -> ProjectionStack:
    return projection_stack(d["blocks"], law=ProjectionLaw(d["law"]), seed=int(d["seed"]))


def stack_to_json(stack: ProjectionStack) -> str:
    return json.dumps(stack_to_dict(stack))


def stack_from_json(s: str) -> ProjectionStack:
    return stack_from_dict(json.loads(s))
