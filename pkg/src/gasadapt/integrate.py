"""Implicit-Euler integration of the discretized pipe models.

Each step solves the scalar implicit relation with Newton's method
(continuation from the previous gridpoint) and a bisection fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DrainedPipe,
    IncompatibleGrids,
    InvalidGrid,
    NewtonDivergence,
    NonPositivePressure,
)
from .models import ModelLevel, rhs, rhs_pressure_derivative
from .network import GasParameters, Pipe

NEWTON_RTOL = 1e-10
NEWTON_MAX_ITER = 50
BISECTION_FLOOR = 1.0  # Pa
GRID_RTOL = 1e-9


@dataclass(frozen=True)
class Grid:
    stepsize: float  # m
    n_intervals: int

    def __post_init__(self):
        if self.n_intervals <= 0:
            raise InvalidGrid(f"n_intervals {self.n_intervals} must be positive")
        if self.stepsize <= 0.0:
            raise InvalidGrid(f"stepsize {self.stepsize} must be positive")

    @classmethod
    def for_pipe(cls, length: float, n_intervals: int) -> "Grid":
        """Primary pipe grid; the interval count must allow the 2h and 4h
        subgrids used by the error estimators."""
        if n_intervals % 4 != 0:
            raise InvalidGrid(f"n_intervals {n_intervals} is not a multiple of 4")
        return cls(stepsize=length / n_intervals, n_intervals=n_intervals)

    @property
    def length(self) -> float:
        return self.stepsize * self.n_intervals

    def positions(self) -> np.ndarray:
        return np.arange(self.n_intervals + 1) * self.stepsize

    def coarsened(self, factor: int) -> "Grid":
        if self.n_intervals % factor != 0:
            raise InvalidGrid(
                f"cannot coarsen {self.n_intervals} intervals by factor {factor}"
            )
        return Grid(self.stepsize * factor, self.n_intervals // factor)


@dataclass(frozen=True)
class PressureProfile:
    grid: Grid
    values: np.ndarray  # Pa, one per gridpoint
    level: ModelLevel
    flow: float  # kg/s

    def endpoint(self) -> float:
        return float(self.values[-1])


def _newton_step_root(level, p_prev, q, pipe, gas, slope, h):
    """Solve p - p_prev - h * rhs(p) = 0 for the next gridpoint pressure."""

    def residual(p):
        return p - p_prev - h * rhs(level, p, q, pipe, gas, slope)

    p = p_prev
    for _ in range(NEWTON_MAX_ITER):
        try:
            f = residual(p)
            fprime = 1.0 - h * rhs_pressure_derivative(level, p, q, pipe, gas, slope)
        except NonPositivePressure:
            break
        if abs(f) <= NEWTON_RTOL * abs(p):
            return p
        if fprime == 0.0:
            break
        p_next = p - f / fprime
        if not math.isfinite(p_next) or p_next <= 0.0:
            break
        p = p_next

    return _bisection_fallback(residual, p_prev)


def _bisection_fallback(residual, p_prev):
    """Scan [1 Pa, 2 p_prev] for a sign change, then bisect."""
    lo_candidates = np.geomspace(BISECTION_FLOOR, 2.0 * p_prev, 64)
    values = []
    for p in lo_candidates:
        try:
            values.append(residual(p))
        except (NonPositivePressure, DrainedPipe):
            values.append(math.nan)
    bracket = None
    for (a, fa), (b, fb) in zip(
        zip(lo_candidates, values), zip(lo_candidates[1:], values[1:])
    ):
        if math.isnan(fa) or math.isnan(fb):
            continue
        if fa == 0.0:
            return a
        if fa * fb < 0.0:
            bracket = (a, b, fa)
            break
    if bracket is None:
        finite = [v for v in values if not math.isnan(v)]
        if finite and min(finite) > 0.0:
            raise DrainedPipe("implicit step has no positive-pressure root")
        raise NewtonDivergence("no bracketing interval for the implicit step")
    a, b, fa = bracket
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = residual(mid)
        if abs(fm) <= NEWTON_RTOL * abs(mid) or (b - a) <= 1e-14 * mid:
            return mid
        if fa * fm < 0.0:
            b = mid
        else:
            a, fa = mid, fm
    raise NewtonDivergence("bisection did not converge")


def integrate(
    level: ModelLevel,
    pipe: Pipe,
    gas: GasParameters,
    p0: float,
    q: float,
    grid: Grid,
    slope: float = 0.0,
) -> PressureProfile:
    """March the implicit Euler scheme along the pipe from p(0) = p0."""
    if p0 <= 0.0:
        raise NonPositivePressure(f"initial pressure {p0} <= 0")
    if not math.isclose(grid.length, pipe.length, rel_tol=GRID_RTOL):
        raise InvalidGrid(
            f"grid length {grid.length} does not match pipe length {pipe.length}"
        )
    values = np.empty(grid.n_intervals + 1)
    values[0] = p0
    p = p0
    if q == 0.0 and slope == 0.0:
        values[:] = p0
        return PressureProfile(grid, values, level, q)
    for k in range(1, grid.n_intervals + 1):
        p = _newton_step_root(level, p, q, pipe, gas, slope, grid.stepsize)
        values[k] = p
    return PressureProfile(grid, values, level, q)


def restrict_to_grid(profile: PressureProfile, target: Grid) -> PressureProfile:
    """Exact subsampling of a profile onto a coarser, aligned grid."""
    ratio = target.stepsize / profile.grid.stepsize
    factor = round(ratio)
    if factor < 1 or not math.isclose(ratio, factor, rel_tol=GRID_RTOL):
        raise IncompatibleGrids(
            f"target stepsize {target.stepsize} is not an integer multiple "
            f"of {profile.grid.stepsize}"
        )
    if target.n_intervals * factor != profile.grid.n_intervals:
        raise IncompatibleGrids("target gridpoints do not align with the profile")
    return PressureProfile(
        target, profile.values[::factor].copy(), profile.level, profile.flow
    )
