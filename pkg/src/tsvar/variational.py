"""Unified variational problems on time scales.

The sign of the direction u selects the machinery: u > 0 drives the forward
(delta) calculus with sigma-shifted arguments, u < 0 the backward (nabla)
calculus with rho-shifted arguments; in both cases the integrand receives
the scaled arguments (t, u*shifted y, u*one-sided derivative). Dense
intervals are handled by refinement: the discretized grid is treated as a
purely discrete scale throughout, so the discrete stationarity conditions
are exact on discrete scales and first-order accurate on dense parts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import GridFunction
from .errors import (
    BoundaryMismatchError,
    DegenerateScaleError,
    EvaluationError,
    GridMismatchError,
    InfeasibleConstraintError,
    IterationLimitError,
    ParameterError,
    SingularSystemError,
)
from .lagrangian import Expr, Lagrangian, differentiate, evaluate, evaluate_array
from .timescale import SampleGrid, TimeScale

__all__ = [
    "Problem",
    "IsoProblem",
    "Solution",
    "VerifyReport",
    "functional_value",
    "el_residual",
    "residual_column",
    "solve",
    "solve_iso",
    "verify",
]


@dataclass(frozen=True, kw_only=True)
class Problem:
    """Boundary value problem data for one direction u."""

    scale: TimeScale
    u: float
    L: Lagrangian
    alpha: float
    beta: float
    h: float = 1e-3

    def __post_init__(self) -> None:
        if self.u == 0:
            raise ParameterError(
                "direction u must be nonzero: with u = 0 every admissible "
                "trajectory gives the same value, so there is nothing to solve")
        if not self.h > 0:
            raise ParameterError(f"step h must be positive, got {self.h!r}")
        if not self.scale.a < self.scale.b:
            raise ParameterError("variational problems need a scale with a < b")

    def discretized(self) -> SampleGrid:
        return self.scale.discretize(self.h)


@dataclass(frozen=True, kw_only=True)
class IsoProblem(Problem):
    """Problem with one integral constraint K[y] = K in its own direction w."""

    G: Lagrangian
    w: float
    K: float

    def __post_init__(self) -> None:
        Problem.__post_init__(self)
        if self.w == 0:
            raise ParameterError("constraint direction w must be nonzero")

    def constraint_problem(self) -> Problem:
        return Problem(scale=self.scale, u=self.w, L=self.G,
                       alpha=self.alpha, beta=self.beta, h=self.h)


@dataclass(frozen=True)
class Solution:
    """Solver output; lam0/lam/normal_flag are set for isoperimetric problems."""

    y: GridFunction
    functional_value: float
    residual_max: float
    iterations: int
    lam: float | None = None
    lam0: float | None = None
    normal_flag: bool | None = None


@dataclass(frozen=True)
class VerifyReport:
    boundary_ok: bool
    residual_max: float
    functional_value: float
    passed: bool


# -- argument packing and checked evaluation -----------------------------------

def _pack(u: float, ts: np.ndarray, ys: np.ndarray):
    """Integrand arguments per term: base points, scaled y slot, scaled v slot,
    and the step weights, in the direction selected by the sign of u."""
    steps = np.diff(ts)
    slopes = np.diff(ys) / steps
    if u > 0:
        return ts[:-1], u * ys[1:], u * slopes, steps
    return ts[1:], u * ys[:-1], u * slopes, steps


def _eval_soft(expr: Expr, t: np.ndarray, y: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = np.asarray(evaluate_array(expr, t, y, v), dtype=float)
    if out.ndim == 0:
        out = np.full(t.shape, float(out))
    return out


def _eval_checked(expr: Expr, t: np.ndarray, y: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = _eval_soft(expr, t, y, v)
    bad = ~np.isfinite(out)
    if bad.any():
        i = int(np.argmax(bad))
        evaluate(expr, float(t[i]), float(y[i]), float(v[i]))  # raises with context
        raise EvaluationError(
            "expression produced a non-finite value",
            t=float(t[i]), y=float(y[i]), v=float(v[i]))
    return out


def _functional_raw(lag: Lagrangian, u: float, ts: np.ndarray, ys: np.ndarray,
                    checked: bool = True) -> float:
    tA, Y, V, wts = _pack(u, ts, ys)
    ev = _eval_checked if checked else _eval_soft
    vals = ev(lag.L, tA, Y, V)
    return u * float(np.sum(vals * wts))


def _grad_raw(lag: Lagrangian, u: float, ts: np.ndarray, ys: np.ndarray,
              checked: bool = True) -> np.ndarray:
    """Gradient of the discretized functional with respect to interior values."""
    tA, Y, V, wts = _pack(u, ts, ys)
    ev = _eval_checked if checked else _eval_soft
    p2 = ev(lag.dL_dy, tA, Y, V)
    p3 = ev(lag.dL_dv, tA, Y, V)
    uu = u * u
    if u > 0:
        return uu * (wts[:-1] * p2[:-1] + p3[:-1] - p3[1:])
    return uu * (wts[1:] * p2[1:] - p3[1:] + p3[:-1])


_SecondPartials = tuple[Expr, Expr, Expr]


def _second_partials(lag: Lagrangian) -> _SecondPartials:
    return (differentiate(lag.dL_dy, "y"),
            differentiate(lag.dL_dy, "v"),
            differentiate(lag.dL_dv, "v"))


def _hess_raw(second: _SecondPartials, u: float, ts: np.ndarray,
              ys: np.ndarray) -> np.ndarray:
    """Tridiagonal Hessian of the discretized functional, as a dense matrix."""
    tA, Y, V, wts = _pack(u, ts, ys)
    A = _eval_checked(second[0], tA, Y, V)
    B = _eval_checked(second[1], tA, Y, V)
    C = _eval_checked(second[2], tA, Y, V)
    u3 = u ** 3
    if u > 0:
        diag = u3 * (wts[:-1] * A[:-1] + 2.0 * B[:-1]
                     + C[:-1] / wts[:-1] + C[1:] / wts[1:])
        off = -u3 * (B[1:-1] + C[1:-1] / wts[1:-1])
    else:
        diag = u3 * (wts[1:] * A[1:] - 2.0 * B[1:]
                     + C[1:] / wts[1:] + C[:-1] / wts[:-1])
        off = u3 * (B[1:-1] - C[1:-1] / wts[1:-1])
    m = diag.size
    H = np.zeros((m, m))
    idx = np.arange(m)
    H[idx, idx] = diag
    H[idx[:-1], idx[:-1] + 1] = off
    H[idx[:-1] + 1, idx[:-1]] = off
    return H


def _residual_raw(lag: Lagrangian, u: float, ts: np.ndarray, ys: np.ndarray,
                  checked: bool = True) -> np.ndarray:
    """Stationarity residual at every point where the shifted indices exist:
    grid indices 0..N-2 for u > 0, and 2..N for u < 0."""
    tA, Y, V, wts = _pack(u, ts, ys)
    ev = _eval_checked if checked else _eval_soft
    p2 = ev(lag.dL_dy, tA, Y, V)
    g = ev(lag.dL_dv, tA, Y, V)
    if u > 0:
        return u * ((g[1:] - g[:-1]) / wts[:-1] - p2[:-1])
    return u * ((g[1:] - g[:-1]) / wts[1:] - p2[1:])


def _interior_range(n: int) -> range:
    """Grid indices in the doubly truncated interior of an n-point grid."""
    return range(2, n - 2)


def _residual_at(u: float, values: np.ndarray, grid_index: int) -> float:
    # values are aligned to grid index 0 for u > 0 and to grid index 2 for u < 0
    return float(values[grid_index] if u > 0 else values[grid_index - 2])


# -- structural checks ------------------------------------------------------------

def _require_grid(problem: Problem, y: GridFunction) -> SampleGrid:
    grid = problem.discretized()
    if y.grid.points != grid.points:
        raise GridMismatchError(
            "trajectory grid does not match the problem's discretized grid "
            f"({len(y.grid.points)} vs {len(grid.points)} points)")
    return grid


def _require_boundaries(problem: Problem, y: GridFunction) -> None:
    if y.values[0] != problem.alpha or y.values[-1] != problem.beta:
        raise BoundaryMismatchError(
            f"boundary values ({y.values[0]!r}, {y.values[-1]!r}) do not match "
            f"the prescribed ({problem.alpha!r}, {problem.beta!r})")


# -- public operations ---------------------------------------------------------------

def functional_value(problem: Problem, y: GridFunction) -> float:
    """Value of the direction-scaled functional along a trajectory."""
    _require_grid(problem, y)
    _require_boundaries(problem, y)
    ts = np.asarray(y.grid.points)
    ys = np.asarray(y.values)
    return _functional_raw(problem.L, problem.u, ts, ys)


def el_residual(problem: Problem, y: GridFunction) -> GridFunction:
    """Stationarity residual along a trajectory, on its computable subgrid.

    For u > 0 the residual lives on all grid points except the last two,
    for u < 0 on all except the first two. Zeros of the residual are the
    necessary optimality condition.
    """
    grid = _require_grid(problem, y)
    _require_boundaries(problem, y)
    n = len(grid.points)
    if n < 3:
        raise DegenerateScaleError("the residual needs at least three grid points")
    ts = np.asarray(grid.points)
    ys = np.asarray(y.values)
    res = _residual_raw(problem.L, problem.u, ts, ys)
    if problem.u > 0:
        sub = SampleGrid(grid.points[:-2], grid.dense_flags[:-2])
    else:
        sub = SampleGrid(grid.points[2:], grid.dense_flags[2:])
    return GridFunction(sub, tuple(float(r) for r in res))


def residual_column(problem: Problem, y: GridFunction,
                    lam0: float | None = None, lam: float | None = None,
                    enforce_boundaries: bool = True) -> list[float | None]:
    """Residual aligned to the full grid: values on the doubly truncated
    interior, None elsewhere. With multipliers the column is the combined
    residual lam0 * (L side) - lam * (constraint side)."""
    grid = _require_grid(problem, y)
    if enforce_boundaries:
        _require_boundaries(problem, y)
    n = len(grid.points)
    ts = np.asarray(grid.points)
    ys = np.asarray(y.values)
    col: list[float | None] = [None] * n
    interior = _interior_range(n)
    if lam is None:
        res = _residual_raw(problem.L, problem.u, ts, ys)
        for i in interior:
            col[i] = _residual_at(problem.u, res, i)
        return col
    if not isinstance(problem, IsoProblem):
        raise ParameterError("multipliers are only meaningful for IsoProblem")
    res_l = _residual_raw(problem.L, problem.u, ts, ys)
    res_g = _residual_raw(problem.G, problem.w, ts, ys)
    l0 = 1.0 if lam0 is None else lam0
    for i in interior:
        col[i] = (l0 * _residual_at(problem.u, res_l, i)
                  - lam * _residual_at(problem.w, res_g, i))
    return col


def _interior_max(col: list[float | None]) -> float:
    vals = [abs(v) for v in col if v is not None]
    if not vals:
        raise DegenerateScaleError(
            "doubly truncated interior is empty after discretization")
    return max(vals)


def verify(problem: Problem, y: GridFunction, tol: float) -> VerifyReport:
    """Check boundary conditions and the stationarity residual against tol."""
    grid = _require_grid(problem, y)
    boundary_ok = (y.values[0] == problem.alpha and y.values[-1] == problem.beta)
    ts = np.asarray(grid.points)
    ys = np.asarray(y.values)
    col = residual_column(problem, y, enforce_boundaries=False)
    residual_max = _interior_max(col)
    value = _functional_raw(problem.L, problem.u, ts, ys)
    return VerifyReport(
        boundary_ok=boundary_ok,
        residual_max=residual_max,
        functional_value=value,
        passed=boundary_ok and residual_max <= tol,
    )


# -- solvers ----------------------------------------------------------------------------

def _affine_start(problem: Problem, ts: np.ndarray) -> np.ndarray:
    span = ts[-1] - ts[0]
    ys = problem.alpha + (problem.beta - problem.alpha) * (ts - ts[0]) / span
    ys[0] = problem.alpha
    ys[-1] = problem.beta
    return ys


def _prepared_grid(problem: Problem) -> tuple[SampleGrid, np.ndarray]:
    grid = problem.discretized()
    if len(grid.points) < 5:
        raise DegenerateScaleError(
            "doubly truncated interior is empty after discretization; "
            "use a finer step or a larger scale")
    return grid, np.asarray(grid.points)


def solve(problem: Problem, tol: float = 1e-10, max_iter: int = 100) -> Solution:
    """Newton iteration with backtracking on the gradient of the discretized
    functional, starting from the affine interpolant between the boundary
    values. Boundary values are eliminated variables and are met exactly."""
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol!r}")
    if max_iter < 0:
        raise ParameterError(f"max_iter must be nonnegative, got {max_iter!r}")
    grid, ts = _prepared_grid(problem)
    lag, u = problem.L, problem.u
    second = _second_partials(lag)
    ys = _affine_start(problem, ts)

    g = _grad_raw(lag, u, ts, ys)
    iterations = 0
    while float(np.max(np.abs(g))) > tol:
        if iterations >= max_iter:
            raise IterationLimitError(
                f"no convergence after {max_iter} Newton steps "
                f"(stationarity norm {float(np.max(np.abs(g))):.3e})",
                last=tuple(float(v) for v in ys))
        H = _hess_raw(second, u, ts, ys)
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(
                "Newton matrix is singular at the current iterate") from exc
        if not np.all(np.isfinite(step)):
            raise SingularSystemError("Newton step is not finite")
        ys, g = _backtrack(lambda z: _grad_raw(lag, u, ts, z, checked=False),
                           ys, step, g, tol)
        iterations += 1

    yfn = GridFunction(grid, tuple(float(v) for v in ys))
    col = residual_column(problem, yfn)
    return Solution(
        y=yfn,
        functional_value=_functional_raw(lag, u, ts, ys),
        residual_max=_interior_max(col),
        iterations=iterations,
    )


def _backtrack(grad_of, ys: np.ndarray, step: np.ndarray, g: np.ndarray,
               tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Halve the step until the squared gradient norm decreases."""
    phi0 = 0.5 * float(g @ g)
    alpha = 1.0
    while alpha >= 1e-12:
        trial = ys.copy()
        trial[1:-1] += alpha * step
        gt = grad_of(trial)
        if np.all(np.isfinite(gt)):
            phi1 = 0.5 * float(gt @ gt)
            if phi1 <= phi0 * (1.0 - 1e-4 * alpha) or float(np.max(np.abs(gt))) <= tol:
                return trial, gt
        alpha *= 0.5
    raise IterationLimitError(
        "line search stalled before reaching the tolerance",
        last=tuple(float(v) for v in ys))


def solve_iso(iso: IsoProblem, tol: float = 1e-10, max_iter: int = 100) -> Solution:
    """Newton iteration on the augmented stationarity system.

    Unknowns are the interior values and one multiplier; the system couples
    the combined stationarity condition with the constraint K[y] = K. The
    reported multiplier pair follows the convention
    lam0 * (L-side residual) = lam * (constraint-side residual):
    a normal extremizer gets lam0 = 1, an abnormal one (0, 1).
    """
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol!r}")
    if max_iter < 0:
        raise ParameterError(f"max_iter must be nonnegative, got {max_iter!r}")
    grid, ts = _prepared_grid(iso)
    u, w = iso.u, iso.w
    second_l = _second_partials(iso.L)
    second_g = _second_partials(iso.G)
    ys = _affine_start(iso, ts)
    lam_g = 0.0
    m = len(grid.points) - 2

    def system(z: np.ndarray, lam_val: float, checked: bool) -> np.ndarray:
        gl = _grad_raw(iso.L, u, ts, z, checked=checked)
        gg = _grad_raw(iso.G, w, ts, z, checked=checked)
        cons = _functional_raw(iso.G, w, ts, z, checked=checked) - iso.K
        return np.concatenate([gl - lam_val * gg, [cons]])

    phi = system(ys, lam_g, checked=True)
    iterations = 0
    while float(np.max(np.abs(phi))) > tol:
        if iterations >= max_iter:
            raise IterationLimitError(
                f"no convergence after {max_iter} Newton steps "
                f"(system norm {float(np.max(np.abs(phi))):.3e})",
                last=tuple(float(v) for v in ys))
        gg = _grad_raw(iso.G, w, ts, ys)
        J = np.zeros((m + 1, m + 1))
        J[:m, :m] = (_hess_raw(second_l, u, ts, ys)
                     - lam_g * _hess_raw(second_g, w, ts, ys))
        J[:m, m] = -gg
        J[m, :m] = gg
        try:
            step = np.linalg.solve(J, -phi)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(J, -phi, rcond=None)
        if not np.all(np.isfinite(step)):
            raise SingularSystemError("Newton step is not finite")
        accepted = False
        phi0 = 0.5 * float(phi @ phi)
        alpha = 1.0
        while alpha >= 1e-12:
            trial = ys.copy()
            trial[1:-1] += alpha * step[:m]
            lam_try = lam_g + alpha * step[m]
            phit = system(trial, lam_try, checked=False)
            if np.all(np.isfinite(phit)):
                phi1 = 0.5 * float(phit @ phit)
                if (phi1 <= phi0 * (1.0 - 1e-4 * alpha)
                        or float(np.max(np.abs(phit))) <= tol):
                    ys, lam_g, phi = trial, lam_try, phit
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            cons_gap = abs(float(phi[m]))
            if cons_gap > tol and float(np.max(np.abs(gg))) <= max(tol, 1e-12):
                raise InfeasibleConstraintError(
                    f"constraint value is insensitive to the trajectory but "
                    f"misses its target by {cons_gap:.3e}")
            raise IterationLimitError(
                "line search stalled before reaching the tolerance",
                last=tuple(float(v) for v in ys))
        iterations += 1

    yfn = GridFunction(grid, tuple(float(v) for v in ys))
    g_col = residual_column(iso.constraint_problem(), yfn)
    g_side_max = _interior_max(g_col)
    if g_side_max <= tol:
        lam0, lam_out, normal = 0.0, 1.0, False
    else:
        # the augmented system solves in gradient scaling; convert to the
        # residual convention, which differs by the factor w/u
        lam0, lam_out, normal = 1.0, lam_g * w / u, True
    col = residual_column(iso, yfn, lam0=lam0, lam=lam_out)
    return Solution(
        y=yfn,
        functional_value=_functional_raw(iso.L, u, ts, ys),
        residual_max=_interior_max(col),
        iterations=iterations,
        lam=lam_out,
        lam0=lam0,
        normal_flag=normal,
    )
