"""Area function S(h) on a uniform height grid, and its difference series.

S(h) is the empirical CDF of point heights: the fraction of samples at or
below h, which estimates the normalized surface area below h when sampling
is uniform by area. Total (absolute) area is not recoverable from a
normalized cloud and is not needed: inference only reads the kink
structure, which the normalized series preserves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_STEP = 0.5


@dataclass(frozen=True)
class HeightGrid:
    """Uniform grid h_j = h_min + j*step, j = 0..n_nodes-1."""

    h_min: float
    step: float
    n_nodes: int

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        if self.n_nodes < 2:
            raise ValueError("grid needs at least 2 nodes")

    @property
    def h_max(self) -> float:
        return self.h_min + (self.n_nodes - 1) * self.step

    @property
    def n_intervals(self) -> int:
        return self.n_nodes - 1

    def nodes(self) -> np.ndarray:
        return self.h_min + self.step * np.arange(self.n_nodes)


@dataclass(frozen=True)
class AreaSeries:
    grid: HeightGrid
    s: np.ndarray  # fraction of points at height <= node, nondecreasing, ends at 1

    def __post_init__(self):
        if len(self.s) != self.grid.n_nodes:
            raise ValueError("series length does not match grid")


@dataclass(frozen=True)
class DerivSeries:
    grid: HeightGrid
    d: np.ndarray  # rate per grid-length, one value per node

    def __post_init__(self):
        if len(self.d) != self.grid.n_nodes:
            raise ValueError("series length does not match grid")


def height_grid(z: np.ndarray, step: float = DEFAULT_STEP) -> HeightGrid:
    """Grid from min(z) to max(z), last node padded up to cover the max.

    Interval count is ceil(range/step); a fp-tolerance guard keeps exact
    multiples of the step from gaining a spurious extra interval.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0:
        raise ValueError("empty cloud")
    if step <= 0:
        raise ValueError("grid step must be positive")
    z_min = float(z.min())
    z_max = float(z.max())
    span = z_max - z_min
    if span <= 0:
        raise ValueError("degenerate height range: all points at one height")
    n_int = math.ceil(span / step - 1e-9)
    return HeightGrid(z_min, float(step), n_int + 1)


def area_function(z: np.ndarray, grid: HeightGrid) -> AreaSeries:
    """s_j = (# points with z <= h_j) / N at every grid node."""
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0:
        raise ValueError("empty cloud")
    if float(z.min()) < grid.h_min - 1e-9 or float(z.max()) > grid.h_max + 1e-9:
        raise ValueError("grid does not cover the cloud height range")
    zs = np.sort(z)
    # small forward tolerance so a node that mathematically equals a data
    # height still counts it despite grid-arithmetic rounding
    counts = np.searchsorted(zs, grid.nodes() + 1e-9, side="right")
    return AreaSeries(grid, counts / z.size)


def first_derivative(series: AreaSeries) -> DerivSeries:
    """Central differences inside, one-sided first-order at the endpoints."""
    s = series.s
    if len(s) < 3:
        raise ValueError("need at least 3 grid nodes to differentiate")
    step = series.grid.step
    d = np.empty_like(s)
    d[1:-1] = (s[2:] - s[:-2]) / (2.0 * step)
    d[0] = (s[1] - s[0]) / step
    d[-1] = (s[-1] - s[-2]) / step
    return DerivSeries(series.grid, d)


def second_derivative(series: AreaSeries) -> DerivSeries:
    """Second central differences; emitted for plot data, not inference."""
    s = series.s
    if len(s) < 3:
        raise ValueError("need at least 3 grid nodes to differentiate")
    step = series.grid.step
    d = np.empty_like(s)
    d[1:-1] = (s[2:] - 2.0 * s[1:-1] + s[:-2]) / (step * step)
    d[0] = (s[2] - 2.0 * s[1] + s[0]) / (step * step)
    d[-1] = (s[-1] - 2.0 * s[-2] + s[-3]) / (step * step)
    return DerivSeries(series.grid, d)
