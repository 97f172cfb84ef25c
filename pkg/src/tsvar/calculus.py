"""Delta and nabla calculus for functions sampled on a discretized time scale.

The sampled grid is treated as a purely discrete scale: forward and backward
difference quotients are the exact delta and nabla derivatives at scattered
points and O(h) one-sided approximations at approximation points. Integrals
are rectangle sums, which coincide with the antiderivative definition
whenever the grid is the whole scale.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable, Iterable, TextIO

from .errors import DomainError, InputFormatError, ParameterError
from .timescale import SampleGrid, TimeScale, grid_from_points

__all__ = [
    "GridFunction",
    "delta_deriv",
    "nabla_deriv",
    "shift_sigma",
    "shift_rho",
    "delta_integral",
    "nabla_integral",
    "write_grid_csv",
    "read_grid_csv",
]


@dataclass(frozen=True)
class GridFunction:
    """Real values sampled at the points of a grid."""

    grid: SampleGrid
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != len(self.grid.points):
            raise ParameterError(
                f"value count {len(self.values)} does not match grid size "
                f"{len(self.grid.points)}")
        for v in self.values:
            if not math.isfinite(v):
                raise ParameterError(f"grid values must be finite, got {v!r}")

    @classmethod
    def sample(cls, grid: SampleGrid, fn: Callable[[float], float]) -> "GridFunction":
        return cls(grid, tuple(float(fn(t)) for t in grid.points))

    def __len__(self) -> int:
        return len(self.values)


def _require_points(f: GridFunction, n: int, what: str) -> None:
    if len(f.grid.points) < n:
        raise DomainError(f"{what} needs at least {n} grid points")


def _head(grid: SampleGrid) -> SampleGrid:
    return SampleGrid(grid.points[:-1], grid.dense_flags[:-1])


def _tail(grid: SampleGrid) -> SampleGrid:
    return SampleGrid(grid.points[1:], grid.dense_flags[1:])


def delta_deriv(f: GridFunction) -> GridFunction:
    """Forward difference quotient, defined on all grid points but the last."""
    _require_points(f, 2, "the delta derivative")
    pts, vals = f.grid.points, f.values
    out = tuple((vals[i + 1] - vals[i]) / (pts[i + 1] - pts[i])
                for i in range(len(pts) - 1))
    return GridFunction(_head(f.grid), out)


def nabla_deriv(f: GridFunction) -> GridFunction:
    """Backward difference quotient, defined on all grid points but the first."""
    _require_points(f, 2, "the nabla derivative")
    pts, vals = f.grid.points, f.values
    out = tuple((vals[i] - vals[i - 1]) / (pts[i] - pts[i - 1])
                for i in range(1, len(pts)))
    return GridFunction(_tail(f.grid), out)


def shift_sigma(f: GridFunction) -> GridFunction:
    """Composition with the forward jump: value at t_i is f(t_{i+1})."""
    _require_points(f, 2, "the sigma shift")
    return GridFunction(_head(f.grid), f.values[1:])


def shift_rho(f: GridFunction) -> GridFunction:
    """Composition with the backward jump: value at t_i is f(t_{i-1})."""
    _require_points(f, 2, "the rho shift")
    return GridFunction(_tail(f.grid), f.values[:-1])


def _grid_index(pts: tuple[float, ...], x: float, what: str) -> int:
    i = bisect_left(pts, x)
    if i < len(pts) and pts[i] == x:
        return i
    raise DomainError(f"{what}={x!r} is not a grid point")


def delta_integral(f: GridFunction, c: float, d: float) -> float:
    """Left-rectangle sum of f over [c, d): sum of f(t_i) * (t_{i+1} - t_i)."""
    ic = _grid_index(f.grid.points, c, "lower bound c")
    id_ = _grid_index(f.grid.points, d, "upper bound d")
    if ic > id_:
        raise DomainError(f"integration bounds out of order: c={c!r} > d={d!r}")
    pts, vals = f.grid.points, f.values
    return math.fsum(vals[i] * (pts[i + 1] - pts[i]) for i in range(ic, id_))


def nabla_integral(f: GridFunction, c: float, d: float) -> float:
    """Right-rectangle sum of f over (c, d]: sum of f(t_i) * (t_i - t_{i-1})."""
    ic = _grid_index(f.grid.points, c, "lower bound c")
    id_ = _grid_index(f.grid.points, d, "upper bound d")
    if ic > id_:
        raise DomainError(f"integration bounds out of order: c={c!r} > d={d!r}")
    pts, vals = f.grid.points, f.values
    return math.fsum(vals[i] * (pts[i] - pts[i - 1]) for i in range(ic + 1, id_ + 1))


def write_grid_csv(f: GridFunction, stream: TextIO) -> None:
    """Write the `t,value` CSV form with lossless 17-significant-digit floats."""
    stream.write("t,value\n")
    for t, v in zip(f.grid.points, f.values):
        stream.write(f"{t:.17g},{v:.17g}\n")


def read_grid_csv(stream: Iterable[str], scale: TimeScale | None = None) -> GridFunction:
    """Read the `t,value` CSV form.

    With a scale, sample points are validated against it and approximation
    points are re-flagged; without one, all points are taken as exact.
    """
    lines = iter(enumerate(stream, start=1))
    try:
        _, header = next(lines)
    except StopIteration:
        raise InputFormatError("empty CSV: expected a `t,value` header", line=1) from None
    if header.strip() != "t,value":
        raise InputFormatError(
            f"bad CSV header {header.strip()!r}: expected 't,value'", line=1)
    points: list[float] = []
    values: list[float] = []
    for lineno, raw in lines:
        line = raw.strip()
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != 2:
            raise InputFormatError(
                f"line {lineno}: expected two comma-separated fields", line=lineno)
        try:
            points.append(float(cells[0]))
            values.append(float(cells[1]))
        except ValueError:
            raise InputFormatError(
                f"line {lineno}: not a number in {line!r}", line=lineno) from None
    if not points:
        raise InputFormatError("CSV contains a header but no rows")
    if scale is not None:
        grid = grid_from_points(scale, points)
    else:
        grid = SampleGrid(tuple(points), tuple(False for _ in points))
    return GridFunction(grid, tuple(values))
