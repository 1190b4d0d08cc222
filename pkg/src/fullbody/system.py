from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .potential import (
    MIN_SEPARATION,
    BodyModel,
    PotentialEval,
    default_G,
    eval_inertial,
    eval_relative,
)


@dataclass(frozen=True, eq=False)
class BodySystem:
    """Bodies plus the gravitational coupling they interact through.

    ``G=None`` selects the normalized constant ``1 / sum(masses)``. Setting
    ``G=0`` switches gravity off, which turns every body into a free rigid
    body.
    """

    bodies: tuple[BodyModel, ...]
    G: float | None = None
    min_separation: float = MIN_SEPARATION

    def __post_init__(self):
        object.__setattr__(self, "bodies", tuple(self.bodies))
        if self.G is None:
            object.__setattr__(self, "G", default_G(self.bodies))

    @classmethod
    def pair(cls, b1: BodyModel, b2: BodyModel, **kw) -> "BodySystem":
        return cls((b1, b2), **kw)

    @property
    def n(self) -> int:
        return len(self.bodies)

    @cached_property
    def masses(self) -> np.ndarray:
        return np.array([b.mass for b in self.bodies])

    @property
    def reduced_mass(self) -> float:
        m1, m2 = self._two()
        return m1.mass * m2.mass / (m1.mass + m2.mass)

    def _two(self) -> tuple[BodyModel, BodyModel]:
        if self.n != 2:
            raise ValueError("relative coordinates are defined for exactly two bodies")
        return self.bodies

    def inertial_potential(self, xs, Rs):
        return eval_inertial(self.bodies, xs, Rs, G=self.G, min_separation=self.min_separation)

    def relative_potential(self, X, R) -> PotentialEval:
        b1, b2 = self._two()
        return eval_relative(b1, b2, X, R, G=self.G, min_separation=self.min_separation)


def as_system(bodies: BodySystem | Sequence[BodyModel]) -> BodySystem:
    return bodies if isinstance(bodies, BodySystem) else BodySystem(tuple(bodies))
