"""Shared oracles and strategies for the test suite."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from tsvar import PLFunction, Segment, TimeScale

EXPRESSION_SUITE = [
    "v^2",
    "t*y",
    "sin(t)*v",
    "cos(t*y)",
    "exp(y/2)",
    "t^3 - 2*t*y + v^2/2",
    "sqrt(1 + v^2)",
    "log(3 + y)",
    "y/(1 + t^2)",
    "exp(-(t^2)) * sin(y) + cos(v)",
]


def probe_points(scale: TimeScale, per_segment: int = 97) -> list[float]:
    """Dense probe sample of a scale, always containing every endpoint."""
    pts: set[float] = set()
    for seg in scale.segments:
        pts.add(seg.left)
        pts.add(seg.right)
        if not seg.is_point:
            for k in range(1, per_segment):
                pts.add(seg.left + (seg.right - seg.left) * k / per_segment)
    return sorted(pts)


def sigma_oracle(probe: list[float], t: float) -> float:
    """Nearest probe point strictly after t (resolution-limited oracle)."""
    later = [p for p in probe if p > t]
    return min(later) if later else t


def rho_oracle(probe: list[float], t: float) -> float:
    earlier = [p for p in probe if p < t]
    return max(earlier) if earlier else t


def random_increasing(rng: random.Random, n: int, start_lo: float = -2.0,
                      start_hi: float = 0.0, gap_lo: float = 0.2,
                      gap_hi: float = 1.0) -> list[float]:
    """n strictly increasing points with bounded gaps."""
    x = rng.uniform(start_lo, start_hi)
    pts = [x]
    for _ in range(n - 1):
        x += rng.uniform(gap_lo, gap_hi)
        pts.append(x)
    return pts


def central_diff(fn, x: float, h: float = 1e-5) -> float:
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def random_pl(rng: random.Random, max_breakpoints: int = 10) -> PLFunction:
    """Random piecewise-linear function with well-separated breakpoints."""
    n = rng.randint(2, max_breakpoints)
    bps = random_increasing(rng, n, start_lo=0.0, start_hi=0.1,
                            gap_lo=0.05, gap_hi=0.4)
    vals = [rng.uniform(-1.0, 1.0) for _ in range(n)]
    return PLFunction(tuple(bps), tuple(vals))


@st.composite
def scales(draw, max_segments: int = 4) -> TimeScale:
    """Random bounded scales mixing intervals and isolated points."""
    n = draw(st.integers(min_value=1, max_value=max_segments))
    x = draw(st.floats(min_value=-5.0, max_value=5.0))
    segments: list[Segment] = []
    for _ in range(n):
        if draw(st.booleans()):
            segments.append(Segment(x, x))
        else:
            length = draw(st.floats(min_value=0.25, max_value=2.0))
            segments.append(Segment(x, x + length))
            x += length
        x += draw(st.floats(min_value=0.25, max_value=2.0))
    if len(segments) == 1 and segments[0].is_point:
        segments.append(Segment(x, x))
    return TimeScale(tuple(segments))


@st.composite
def discrete_scales(draw, min_points: int = 3, max_points: int = 8) -> TimeScale:
    """Purely discrete scales with well-separated points."""
    n = draw(st.integers(min_value=min_points, max_value=max_points))
    x = draw(st.floats(min_value=-3.0, max_value=0.0))
    pts = [x]
    for _ in range(n - 1):
        x += draw(st.floats(min_value=0.2, max_value=1.5))
        pts.append(x)
    return TimeScale.of_points(*pts)


@st.composite
def grid_values(draw, n: int) -> tuple[float, ...]:
    return tuple(draw(st.lists(
        st.floats(min_value=-2.0, max_value=2.0), min_size=n, max_size=n)))
