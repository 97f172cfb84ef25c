"""Bounded time scales: finite unions of closed intervals and isolated points.

A scale owns the jump operators sigma/rho, the graininess functions mu/nu,
point classification, the kappa truncations and grid discretization. All
endpoint comparisons are exact float comparisons; scattered structure is
never blurred by tolerances.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    DegenerateScaleError,
    DomainError,
    InputFormatError,
    ParameterError,
)

__all__ = [
    "Segment",
    "PointClass",
    "TimeScale",
    "SampleGrid",
    "grid_from_points",
    "parse_timescale",
]


@dataclass(frozen=True)
class Segment:
    """Closed interval [left, right]; left == right is an isolated point."""

    left: float
    right: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "left", float(self.left))
        object.__setattr__(self, "right", float(self.right))
        if not (math.isfinite(self.left) and math.isfinite(self.right)):
            raise ParameterError(
                f"segment endpoints must be finite, got [{self.left}, {self.right}]")
        if self.left > self.right:
            raise ParameterError(
                f"segment endpoints out of order: [{self.left}, {self.right}]")

    @property
    def is_point(self) -> bool:
        return self.left == self.right


@dataclass(frozen=True)
class PointClass:
    """Scatteredness of a point on each side; dense/isolated are derived."""

    right_scattered: bool
    left_scattered: bool

    @property
    def right_dense(self) -> bool:
        return not self.right_scattered

    @property
    def left_dense(self) -> bool:
        return not self.left_scattered

    @property
    def isolated(self) -> bool:
        return self.right_scattered and self.left_scattered

    @property
    def dense(self) -> bool:
        return not (self.right_scattered or self.left_scattered)


@dataclass(frozen=True)
class TimeScale:
    """Sorted union of closed segments with strictly positive gaps.

    A single degenerate segment (one isolated point) is allowed so the
    kappa truncations are total; variational problems additionally require
    a < b.
    """

    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ParameterError("a time scale needs at least one segment")
        for prev, cur in zip(self.segments, self.segments[1:]):
            if not prev.right < cur.left:
                raise ParameterError(
                    "segments must be sorted with positive gaps "
                    "(use TimeScale.from_segments to normalize overlaps)")
        object.__setattr__(self, "_lefts", tuple(s.left for s in self.segments))

    # -- construction -----------------------------------------------------

    @classmethod
    def from_segments(cls, segments: Iterable[Segment]) -> "TimeScale":
        """Normalize an arbitrary collection: sort and merge touching segments."""
        segs = sorted(segments, key=lambda s: (s.left, s.right))
        if not segs:
            raise ParameterError("a time scale needs at least one segment")
        merged: list[Segment] = [segs[0]]
        for seg in segs[1:]:
            last = merged[-1]
            if seg.left <= last.right:
                if seg.right > last.right:
                    merged[-1] = Segment(last.left, seg.right)
            else:
                merged.append(seg)
        return cls(tuple(merged))

    @classmethod
    def interval(cls, left: float, right: float) -> "TimeScale":
        return cls((Segment(left, right),))

    @classmethod
    def of_points(cls, *points: float) -> "TimeScale":
        pts = sorted(set(points))
        if not pts:
            raise ParameterError("a discrete scale needs at least one point")
        return cls(tuple(Segment(p, p) for p in pts))

    # -- basic queries -----------------------------------------------------

    @property
    def a(self) -> float:
        return self.segments[0].left

    @property
    def b(self) -> float:
        return self.segments[-1].right

    def _segment_index(self, t: float) -> int | None:
        i = bisect_right(self._lefts, t) - 1  # type: ignore[attr-defined]
        if i >= 0 and t <= self.segments[i].right:
            return i
        return None

    def contains(self, t: float) -> bool:
        return self._segment_index(t) is not None

    def _locate(self, t: float) -> int:
        i = self._segment_index(t)
        if i is None:
            raise DomainError(f"t={t!r} does not belong to the time scale")
        return i

    # -- jump operators and graininess --------------------------------------

    def sigma(self, t: float) -> float:
        """Forward jump: the nearest point strictly after t, or t at the top."""
        i = self._locate(t)
        seg = self.segments[i]
        if t < seg.right:
            return t
        if i + 1 < len(self.segments):
            return self.segments[i + 1].left
        return t

    def rho(self, t: float) -> float:
        """Backward jump: the nearest point strictly before t, or t at the bottom."""
        i = self._locate(t)
        seg = self.segments[i]
        if t > seg.left:
            return t
        if i > 0:
            return self.segments[i - 1].right
        return t

    def mu(self, t: float) -> float:
        return self.sigma(t) - t

    def nu(self, t: float) -> float:
        return t - self.rho(t)

    def classify(self, t: float) -> PointClass:
        return PointClass(right_scattered=self.sigma(t) > t,
                          left_scattered=self.rho(t) < t)

    # -- kappa truncations ---------------------------------------------------

    def truncate_kappa(self) -> "TimeScale":
        """Drop the maximum when it is left-scattered, else return self."""
        return TimeScale(tuple(_drop_max(list(self.segments))))

    def truncate_kappa_sub(self) -> "TimeScale":
        """Drop the minimum when it is right-scattered, else return self."""
        return TimeScale(tuple(_drop_min(list(self.segments))))

    def interior_kk2(self) -> "TimeScale":
        """Doubly truncated interior: two kappa cuts at the top and the bottom."""
        upper = _drop_max(_drop_max(list(self.segments)))
        lower = _drop_min(_drop_min(list(self.segments)))
        inter = _intersect(upper, lower)
        if not inter:
            raise DegenerateScaleError(
                "doubly truncated interior is empty: the scale has too few points")
        return TimeScale(tuple(inter))

    # -- discretization --------------------------------------------------------

    def discretize(self, h: float) -> "SampleGrid":
        """Sample the scale: keep every endpoint, split intervals into steps <= h.

        An interval of length ell is divided into ceil(ell/h) equal steps;
        when ell/h sits within a relative 1e-12 of an integer the count is
        rounded down so no step degenerates. Subdivision points are flagged
        as approximation points, endpoints are exact.
        """
        if not h > 0:
            raise ParameterError(f"step h must be positive, got {h!r}")
        pts: list[float] = []
        flags: list[bool] = []
        for seg in self.segments:
            pts.append(seg.left)
            flags.append(False)
            if seg.is_point:
                continue
            span = seg.right - seg.left
            ratio = span / h
            n = math.ceil(ratio)
            if n > 1 and (n - 1) >= ratio * (1.0 - 1e-12):
                n -= 1
            for k in range(1, n):
                pts.append(seg.left + span * (k / n))
                flags.append(True)
            pts.append(seg.right)
            flags.append(False)
        return SampleGrid(tuple(pts), tuple(flags))


def _drop_max(segs: list[Segment]) -> list[Segment]:
    # The maximum is left-scattered exactly when the last segment is a point
    # with something before it; a lone point has rho(b) = b.
    if len(segs) >= 2 and segs[-1].is_point:
        return segs[:-1]
    return segs


def _drop_min(segs: list[Segment]) -> list[Segment]:
    if len(segs) >= 2 and segs[0].is_point:
        return segs[1:]
    return segs


def _intersect(a: Sequence[Segment], b: Sequence[Segment]) -> list[Segment]:
    out: list[Segment] = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i].left, b[j].left)
        hi = min(a[i].right, b[j].right)
        if lo <= hi:
            out.append(Segment(lo, hi))
        if a[i].right < b[j].right:
            i += 1
        else:
            j += 1
    return out


@dataclass(frozen=True)
class SampleGrid:
    """Strictly increasing sample points; dense_flags marks approximation points
    introduced by subdividing an interval (segment endpoints are never flagged)."""

    points: tuple[float, ...]
    dense_flags: tuple[bool, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(float(p) for p in self.points))
        if not self.points:
            raise ParameterError("a sample grid needs at least one point")
        if len(self.points) != len(self.dense_flags):
            raise ParameterError("points and dense_flags must have equal length")
        for p in self.points:
            if not math.isfinite(p):
                raise ParameterError(f"grid points must be finite, got {p!r}")
        for p, q in zip(self.points, self.points[1:]):
            if not p < q:
                raise ParameterError("grid points must be strictly increasing")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def a(self) -> float:
        return self.points[0]

    @property
    def b(self) -> float:
        return self.points[-1]


def grid_from_points(scale: TimeScale, points: Sequence[float]) -> SampleGrid:
    """Build a grid from explicit sample points, validating them against a scale.

    Every point must belong to the scale and every segment endpoint must be
    present exactly. Points strictly inside an interval are flagged as
    approximation points.
    """
    present = set(points)
    for seg in scale.segments:
        if seg.left not in present or seg.right not in present:
            raise DomainError(
                f"grid must contain every segment endpoint; "
                f"[{seg.left}, {seg.right}] is not fully represented")
    flags: list[bool] = []
    for p in points:
        i = scale._segment_index(p)
        if i is None:
            raise DomainError(f"grid point {p!r} does not belong to the time scale")
        seg = scale.segments[i]
        flags.append(seg.left < p < seg.right)
    return SampleGrid(tuple(points), tuple(flags))


def parse_timescale(text: str) -> TimeScale:
    """Parse the scale literal syntax: `interval l r` and `points p1 p2 ...` lines.

    Lines may be separated by newlines or semicolons; blank lines and lines
    starting with '#' are ignored. The scale is the union of all lines.
    """
    segments: list[Segment] = []
    for lineno, raw in enumerate(text.replace(";", "\n").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        segments.extend(parse_scale_line(line, lineno))
    if not segments:
        raise InputFormatError("time scale description is empty")
    return TimeScale.from_segments(segments)


def parse_scale_line(line: str, lineno: int | None = None) -> list[Segment]:
    """Parse one scale literal line into segments."""
    where = f"line {lineno}: " if lineno is not None else ""
    parts = line.split()
    kind = parts[0]
    if kind == "interval":
        if len(parts) != 3:
            raise InputFormatError(
                f"{where}'interval' takes exactly two numbers", line=lineno)
        left, right = (_parse_number(p, lineno) for p in parts[1:])
        if left > right:
            raise InputFormatError(
                f"{where}interval endpoints out of order: {line!r}", line=lineno)
        return [Segment(left, right)]
    if kind == "points":
        if len(parts) < 2:
            raise InputFormatError(
                f"{where}'points' needs at least one number", line=lineno)
        return [Segment(p, p) for p in (_parse_number(x, lineno) for x in parts[1:])]
    raise InputFormatError(
        f"{where}unknown directive {kind!r} (expected 'interval' or 'points')",
        line=lineno)


def _parse_number(text: str, lineno: int | None) -> float:
    try:
        value = float(text)
    except ValueError:
        where = f"line {lineno}: " if lineno is not None else ""
        raise InputFormatError(f"{where}not a number: {text!r}", line=lineno) from None
    if not math.isfinite(value):
        where = f"line {lineno}: " if lineno is not None else ""
        raise InputFormatError(f"{where}numbers must be finite: {text!r}", line=lineno)
    return value
