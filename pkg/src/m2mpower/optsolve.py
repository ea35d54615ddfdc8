"""Separable convex minimization over a budget simplex with per-variable floors.

    minimize    sum_i cost_i(s_i)
    subject to  sum_i s_i <= budget,   s_i >= floor_i

with every cost_i strictly convex and strictly decreasing on (0, budget].
Because the costs are decreasing the budget always binds, and the KKT
conditions reduce to a single dual variable nu >= 0:

    s_i = floor_i            where |cost_i'(floor_i)| <= nu
    |cost_i'(s_i)| = nu      otherwise,  with  sum_i s_i = budget.

The solver bisects on nu. Per-index inversion of the monotone slope uses
an attached ``slope_inverse`` when the problem provides one (the
scheduling cost families do) and a safeguarded inner bisection otherwise.

``brute_force_oracle`` is an independent validation path: exhaustive
simplex grid search plus pairwise line-search refinement, deliberately
sharing no code with the dual solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConvergenceError, InfeasibleError, UnsupportedError

OUTER_CAP = 200
INNER_CAP = 100
DEFAULT_TOL = 1e-10

VecFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SeparableProblem:
    """One budget-constrained separable instance.

    ``cost`` and ``cost_slope`` act elementwise on a share vector of
    length k and return per-index values; ``cost_slope`` is the true
    (negative) derivative. ``slope_inverse``, when given, maps a scalar
    nu > 0 to the share vector solving |cost_i'(s_i)| = nu per index.
    """

    k: int
    cost: VecFn
    cost_slope: VecFn
    floors: np.ndarray
    budget: float
    slope_inverse: Optional[Callable[[float], np.ndarray]] = None

    def __post_init__(self) -> None:
        floors = np.asarray(self.floors, dtype=float)
        object.__setattr__(self, "floors", floors)
        if floors.shape != (self.k,):
            raise ValueError(f"floors must have shape ({self.k},)")
        if np.any(floors <= 0.0):
            raise ValueError("floors must be strictly positive")
        if self.budget <= 0.0:
            raise ValueError("budget must be strictly positive")

    def total_cost(self, shares: Sequence[float]) -> float:
        return float(np.sum(self.cost(np.asarray(shares, dtype=float))))


def _slope_mag(p: SeparableProblem, s: np.ndarray) -> np.ndarray:
    return np.abs(p.cost_slope(s))


def _invert_generic(p: SeparableProblem, nu: float,
                    lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Bisection inverse of the per-index slope magnitude on [lo, hi].

    |cost'| is decreasing in the share, so slope(m) > nu means the share
    must grow.
    """
    a = lo.copy()
    b = hi.copy()
    for _ in range(INNER_CAP):
        m = 0.5 * (a + b)
        grow = _slope_mag(p, m) > nu
        a = np.where(grow, m, a)
        b = np.where(grow, b, m)
    return 0.5 * (a + b)


def solve_dual_bisection(p: SeparableProblem, tol: float = DEFAULT_TOL) -> np.ndarray:
    """KKT solution of ``p`` by outer bisection on the dual variable.

    Raises InfeasibleError when the floors alone exceed the budget, and
    ConvergenceError when the final stationarity residual is above
    ``tol`` (relative to nu), which indicates a malformed cost family.
    """
    floors = p.floors
    total_floor = float(floors.sum())
    if total_floor > p.budget * (1.0 + 1e-12):
        raise InfeasibleError(
            f"sum of floors {total_floor:.6g} exceeds budget {p.budget:.6g}")
    if total_floor >= p.budget * (1.0 - 1e-12):
        return floors.copy()

    slope_at_floor = _slope_mag(p, floors)
    nu_lo, nu_hi = 0.0, float(np.max(slope_at_floor))
    # share envelopes at the current bracket ends (monotone in nu)
    env_hi = np.full(p.k, float(p.budget))   # shares at nu_lo
    env_lo = floors.copy()                   # shares at nu_hi

    def shares_at(nu: float) -> np.ndarray:
        if p.slope_inverse is not None:
            s = np.asarray(p.slope_inverse(nu), dtype=float)
        else:
            s = _invert_generic(p, nu, env_lo, env_hi)
        s = np.clip(s, floors, p.budget)
        return np.where(slope_at_floor <= nu, floors, s)

    s_best = env_hi
    for _ in range(OUTER_CAP):
        nu = 0.5 * (nu_lo + nu_hi)
        if not (nu_lo < nu < nu_hi):
            break  # dual bracket exhausted at float resolution
        s = shares_at(nu)
        if float(s.sum()) > p.budget:
            nu_lo, env_hi = nu, s
        else:
            nu_hi, env_lo, s_best = nu, s, s

    shares = s_best
    resid = kkt_residual(p, shares)
    if resid > max(tol, 1e-12):
        raise ConvergenceError(
            f"stationarity residual {resid:.3e} above tolerance {tol:.1e}")
    return shares


def kkt_residual(p: SeparableProblem, shares: Sequence[float]) -> float:
    """Max relative KKT violation of ``shares`` for problem ``p``.

    Stationarity spread of unfloored slopes, complementarity of floored
    ones, and budget exactness, all normalized by the dual value
    (respectively the budget).
    """
    s = np.asarray(shares, dtype=float)
    mags = _slope_mag(p, s)
    floored = s <= p.floors * (1.0 + 1e-9)
    free = ~floored
    residuals = []
    if np.any(free):
        nu = float(np.median(mags[free]))
        scale = max(nu, 1e-300)
        residuals.append(float(np.max(np.abs(mags[free] - nu))) / scale)
        if np.any(floored):
            # floored indices must not want more share than the dual price allows
            residuals.append(float(np.max(np.maximum(mags[floored] - nu, 0.0))) / scale)
        residuals.append(abs(float(s.sum()) - p.budget) / p.budget)
    else:
        residuals.append(max(0.0, float(s.sum()) - p.budget) / p.budget)
    return max(residuals)


def _refine_pairwise(p: SeparableProblem, x: np.ndarray, passes: int = 40) -> np.ndarray:
    """Golden-section transfers between coordinate pairs, budget preserved."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x = x.copy()
    for _ in range(passes):
        improved = False
        for i in range(p.k):
            for j in range(p.k):
                if i == j:
                    continue
                lo = -(x[i] - p.floors[i])
                hi = x[j] - p.floors[j]
                if hi - lo <= 0.0:
                    continue

                def moved(d: float) -> np.ndarray:
                    y = x.copy()
                    y[i] += d
                    y[j] -= d
                    return y

                a, b = lo, hi
                for _ in range(60):
                    d1 = b - invphi * (b - a)
                    d2 = a + invphi * (b - a)
                    if p.total_cost(moved(d1)) < p.total_cost(moved(d2)):
                        b = d2
                    else:
                        a = d1
                d = 0.5 * (a + b)
                y = moved(d)
                if p.total_cost(y) < p.total_cost(x) - 1e-18:
                    x = y
                    improved = True
        if not improved:
            break
    return x


def brute_force_oracle(p: SeparableProblem, grid: int = 24) -> np.ndarray:
    """Exhaustive simplex grid search plus local refinement, k <= 4 only."""
    if p.k > 4:
        raise UnsupportedError("brute-force oracle supports k <= 4")
    total_floor = float(p.floors.sum())
    if total_floor > p.budget * (1.0 + 1e-12):
        raise InfeasibleError(
            f"sum of floors {total_floor:.6g} exceeds budget {p.budget:.6g}")
    free = p.budget - total_floor
    if p.k == 1:
        return np.array([p.budget])

    best_cost = np.inf
    best = None
    for comb in product(range(grid + 1), repeat=p.k - 1):
        ssum = sum(comb)
        if ssum > grid:
            continue
        x = np.empty(p.k)
        x[: p.k - 1] = p.floors[: p.k - 1] + free * np.asarray(comb) / grid
        x[p.k - 1] = p.floors[p.k - 1] + free * (grid - ssum) / grid
        c = p.total_cost(x)
        if c < best_cost:
            best_cost, best = c, x
    return _refine_pairwise(p, best)
