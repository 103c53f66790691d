"""Uniform time grids with trapezoidal quadrature weights.

Every kernel decomposition, trajectory, and propagated state in this
package lives on a uniform grid over a finite horizon [0, T].  The grid
carries its own quadrature weights so that discrete L2 inner products
and time integrals are computed consistently everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = i*T/(N-1) on [0, T] with trapezoidal weights."""

    horizon: float
    n_points: int
    points: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.n_points < 2:
            raise ValueError("need at least two grid points")
        points = np.linspace(0.0, self.horizon, self.n_points)
        weights = np.full(self.n_points, self.step)
        weights[0] = weights[-1] = 0.5 * self.step
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def step(self) -> float:
        return self.horizon / (self.n_points - 1)

    def index_of(self, t: float) -> int:
        """Nearest grid index for a time in [0, T]."""
        if t < -1e-12 or t > self.horizon * (1 + 1e-12):
            raise ValueError("out of horizon")
        return int(round(t / self.step))

    def refined(self, factor: int = 2) -> "TimeGrid":
        """Grid with the same horizon and (N-1)*factor + 1 points."""
        return TimeGrid(self.horizon, (self.n_points - 1) * factor + 1)

    def integrate(self, values: np.ndarray, axis: int = -1):
        """Trapezoidal integral of sampled values over the full horizon."""
        values = np.asarray(values)
        return np.tensordot(values, self.weights, axes=(axis, 0))

    def cumulative(self, values: np.ndarray) -> np.ndarray:
        """Cumulative trapezoidal integral along the last axis."""
        values = np.asarray(values)
        avg = 0.5 * (values[..., 1:] + values[..., :-1]) * self.step
        out = np.zeros_like(values, dtype=np.result_type(values, float))
        np.cumsum(avg, axis=-1, out=out[..., 1:])
        return out
