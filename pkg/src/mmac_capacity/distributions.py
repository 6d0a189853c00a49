"""Discrete amplitude laws and the passive-reflection constraint kinds.

A mass-point distribution sum_m p_m * delta(x - a_m) describes either the
primary amplitude (average-power constrained) or the secondary reflection
amplitude (confined to the unit disk).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError, DomainError

PROB_TOL = 1e-10
POWER_TOL = 1e-10


@dataclass(frozen=True)
class AveragePower:
    """E[A^2] <= limit."""

    limit: float

    def __post_init__(self):
        if self.limit <= 0 or not math.isfinite(self.limit):
            raise ConfigError("power limit must be strictly positive")


@dataclass(frozen=True)
class UnitDisk:
    """All mass-point locations within [0, 1]."""


Constraint = Union[AveragePower, UnitDisk]


@dataclass(frozen=True)
class MassPointDistribution:
    """Discrete law {(location, probability)} under a reflection/power constraint."""

    points: Tuple[Tuple[float, float], ...]
    constraint: Constraint

    def __post_init__(self):
        if not self.points:
            raise DomainError("mass-point distribution needs at least one point")
        locs = [float(l) for l, _ in self.points]
        probs = [float(p) for _, p in self.points]
        if any(not math.isfinite(l) or l < 0 for l in locs):
            raise DomainError("locations must be finite and nonnegative")
        if any(p < 0 or p > 1 for p in probs):
            raise DomainError("probabilities must lie in [0, 1]")
        if abs(math.fsum(probs) - 1.0) > PROB_TOL:
            raise DomainError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        if any(b <= a for a, b in zip(locs, locs[1:])):
            raise DomainError("locations must be strictly increasing")
        if isinstance(self.constraint, AveragePower):
            second_moment = math.fsum(p * l * l for l, p in zip(locs, probs))
            if second_moment > self.constraint.limit + POWER_TOL:
                raise DomainError(
                    f"average power {second_moment} exceeds {self.constraint.limit}")
        elif isinstance(self.constraint, UnitDisk):
            if locs[-1] > 1.0 + 1e-12:
                raise DomainError("disk locations must not exceed 1")
        else:
            raise ConfigError(f"unknown constraint {self.constraint!r}")
        object.__setattr__(self, "points",
                           tuple((float(l), float(p)) for l, p in self.points))

    @property
    def locations(self) -> np.ndarray:
        return np.array([l for l, _ in self.points])

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.points])

    @property
    def second_moment(self) -> float:
        return float(math.fsum(p * l * l for l, p in self.points))

    @classmethod
    def from_arrays(cls, locations: Sequence[float], probabilities: Sequence[float],
                    constraint: Constraint) -> "MassPointDistribution":
        if len(locations) != len(probabilities):
            raise DomainError("locations and probabilities must have equal length")
        return cls(points=tuple(zip(locations, probabilities)), constraint=constraint)

    @classmethod
    def single(cls, location: float, constraint: Constraint) -> "MassPointDistribution":
        return cls(points=((float(location), 1.0),), constraint=constraint)


def rayleigh_quantile_distribution(power: float, n_points: int) -> MassPointDistribution:
    """Equiprobable quantile discretization of a Rayleigh law with E[A^2] = power.

    Test fixture for near-maximum-sum-rate operation; locations are rescaled
    so the discrete second moment equals the power budget exactly.
    """
    if n_points < 1:
        raise DomainError("n_points must be >= 1")
    q = (np.arange(n_points) + 0.5) / n_points
    locs = np.sqrt(-power * np.log1p(-q))
    probs = np.full(n_points, 1.0 / n_points)
    locs *= math.sqrt(power / float(np.sum(probs * locs**2)))
    return MassPointDistribution.from_arrays(locs, probs, AveragePower(power))


@dataclass(frozen=True)
class BoundaryWeights:
    """Weights (mu1, mu2 = 1 - mu1) of the rate objective mu1*R1 + mu2*R2,
    restricted to the regime where the secondary rate carries more weight."""

    mu1: float

    def __post_init__(self):
        if not (0.0 < self.mu1 < 0.5):
            raise DomainError("mu1 must lie strictly inside (0, 0.5)")

    @property
    def mu2(self) -> float:
        return 1.0 - self.mu1
