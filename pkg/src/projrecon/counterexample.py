"""Symmetric configurations that defeat uniqueness despite redundant projections.

Place n atoms on every other vertex of a regular 2n-gon and project onto the
n bisector lines: the remaining n vertices carry a second measure with
exactly the same n pushforwards, even though the total projected dimension
n exceeds the ambient dimension 2.  Random stacks avoid this almost surely;
this construction shows the almost-sure qualifier is necessary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidOrderError
from .measure import DiscreteMeasure, measure_from_dict, measure_to_dict, new_discrete_measure
from .projection import ProjectionLaw, ProjectionStack, projection_stack, stack_from_dict, stack_to_dict


@dataclass(frozen=True)
class PolygonInstance:
    n: int
    Z: DiscreteMeasure          # odd vertices of the 2n-gon
    Y: DiscreteMeasure          # even vertices, same pushforwards
    stack: ProjectionStack      # n bisector directions as 1x2 blocks


def _unit_circle_points(angles: np.ndarray) -> np.ndarray:
    return np.column_stack([np.cos(angles), np.sin(angles)])


def polygon_counterexample(n: int) -> PolygonInstance:
    """Build the 2n-gon instance for n >= 3.

    Z sits at angles (2l+1)*pi/n for l = 1..n with uniform weights; the
    bisector directions sit at angles (2l+1)*pi/(2n).  Y is Z rotated by
    pi/n (one formula, one rounding path), which lands it on the remaining
    vertices of the polygon.
    """
    if n < 3:
        raise InvalidOrderError(f"polygon construction needs n >= 3, got {n}")
    l = np.arange(1, n + 1)
    angles_z = (2 * l + 1) * np.pi / n
    weights = np.full(n, 1.0 / n)
    Z = new_discrete_measure(_unit_circle_points(angles_z), weights)
    Y = new_discrete_measure(_unit_circle_points(angles_z + np.pi / n), weights)
    angles_p = (2 * l + 1) * np.pi / (2 * n)
    blocks = [np.array([[np.cos(a), np.sin(a)]]) for a in angles_p]
    stack = projection_stack(blocks, law=ProjectionLaw.SPHERE, seed=0)
    return PolygonInstance(int(n), Z, Y, stack)


def instance_to_dict(inst: PolygonInstance) -> dict:
    return {
        "n": inst.n,
        "Z": measure_to_dict(inst.Z),
        "Y": measure_to_dict(inst.Y),
        "stack": stack_to_dict(inst.stack),
    }


def instance_from_dict(d: dict) -> PolygonInstance:
    return PolygonInstance(
        int(d["n"]),
        measure_from_dict(d["Z"]),
        measure_from_dict(d["Y"]),
        stack_from_dict(d["stack"]),
    )


def instance_to_json(inst: PolygonInstance) -> str:
    return json.dumps(instance_to_dict(inst))


def instance_from_json(s: str) -> PolygonInstance:
    return instance_from_dict(json.loads(s))
