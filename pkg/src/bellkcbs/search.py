"""Scans over the state family and re-optimization of its two angles."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError
from .inequalities import ALPHA_BOUND, BETA_BOUND, BOTH, evaluate, functional_operators, region_of
from .quantum import THETA_U, THETA_V, QuantumModel, state_psi

TABULATED_PHIS = (0.0, 0.096, 0.192, 0.288, 0.351, 0.421, 0.487, 0.553, 0.631, 0.708, 0.785)
RESTART_GRID = (0.5, 1.2, 1.9, 2.6, 3.0)
MAX_ITER = 300
WINDOW_RESOLUTION = 1e-4
CONSTRAINT_PENALTY = 100.0


@dataclass(frozen=True)
class ScanPoint:
    phi: float
    alpha: float
    beta: float
    region: str


def phi_scan(
    phi_min: float = 0.0,
    phi_max: float = math.pi / 4,
    steps: int = 101,
    theta_u: float = THETA_U,
    theta_v: float = THETA_V,
    phis=None,
) -> list[ScanPoint]:
    """Evaluate the family on an even grid (endpoints included) or on explicit ``phis``."""
    if phis is None:
        if steps < 2:
            raise DomainError("a scan needs at least two points")
        phis = np.linspace(phi_min, phi_max, steps)
    out = []
    for phi in phis:
        r = evaluate(QuantumModel(float(phi), theta_u, theta_v))
        out.append(ScanPoint(float(phi), r.alpha, r.beta, r.region))
    return out


def alpha_beta_at(phi: float, theta_u: float, theta_v: float) -> tuple[float, float]:
    a_op, b_op = functional_operators()
    psi = state_psi(phi, theta_u, theta_v)
    return float(np.vdot(psi, a_op @ psi).real), float(np.vdot(psi, b_op @ psi).real)


def _jointly_violating(phi: float, theta_u: float, theta_v: float) -> bool:
    a, b = alpha_beta_at(phi, theta_u, theta_v)
    return a > ALPHA_BOUND and b > BETA_BOUND


def _bisect(lo: float, hi: float, inside_at_hi: bool, pred, resolution: float) -> float:
    # invariant: pred(hi) == inside_at_hi, pred(lo) != inside_at_hi
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if pred(mid) == inside_at_hi:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def joint_violation_window(
    theta_u: float = THETA_U,
    theta_v: float = THETA_V,
    resolution: float = WINDOW_RESOLUTION,
    phi_range: tuple[float, float] = (0.0, math.pi / 2),
    grid: int = 400,
) -> tuple[float, float] | None:
    """Largest contiguous phi interval with alpha > 2 and beta > 3, or None.

    Located on a coarse grid, then each edge is bisected to ``resolution``.
    """
    if resolution <= 0:
        raise DomainError("resolution must be positive")
    phis = np.linspace(*phi_range, grid)
    inside = [_jointly_violating(p, theta_u, theta_v) for p in phis]

    best = None
    start = None
    for i, flag in enumerate(inside + [False]):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if best is None or i - start > best[1] - best[0]:
                best = (start, i)
            start = None
    if best is None:
        return None
    i0, i1 = best[0], best[1] - 1

    def pred(p):
        return _jointly_violating(p, theta_u, theta_v)

    lo = phis[i0] if i0 == 0 else _bisect(phis[i0 - 1], phis[i0], True, pred, resolution)
    if i1 == grid - 1:
        hi = phis[i1]
    else:
        # reversed orientation: inside at the left end
        hi = _bisect(phis[i1], phis[i1 + 1], False, pred, resolution)
    return float(lo), float(hi)


# -- optimization -------------------------------------------------------------

OBJECTIVES = ("max_min_margin", "weighted_sum", "max_beta_given_alpha_above")


@dataclass(frozen=True)
class OptimizationResult:
    phi: float
    theta_u: float
    theta_v: float
    objective_value: float
    objective_id: str
    iterations: int
    alpha: float
    beta: float
    feasible: bool
    witness_value: float

    def as_dict(self) -> dict:
        return asdict(self)


def objective_function(objective: str, weight: float = 0.5, delta: float = 0.0) -> Callable[[float, float], float]:
    """Map (alpha, beta) to the score being maximized."""
    if objective == "max_min_margin":
        return lambda a, b: min(a - ALPHA_BOUND, b - BETA_BOUND)
    if objective == "weighted_sum":
        return lambda a, b: weight * a + (1 - weight) * b
    if objective == "max_beta_given_alpha_above":
        return lambda a, b: b - CONSTRAINT_PENALTY * max(0.0, ALPHA_BOUND + delta - a)
    raise DomainError(f"unknown objective {objective!r}; choose from {OBJECTIVES}")


def _objective_id(objective: str, weight: float, delta: float) -> str:
    if objective == "weighted_sum":
        return f"weighted_sum(w={weight:g})"
    if objective == "max_beta_given_alpha_above":
        return f"max_beta_given_alpha_above(delta={delta:g})"
    return objective


def _feasible(objective: str, alpha: float, beta: float, value: float, delta: float) -> bool:
    if objective == "max_min_margin":
        return value > 0
    if objective == "max_beta_given_alpha_above":
        return alpha >= ALPHA_BOUND + delta
    return True


def optimize_state_params(
    phi: float,
    objective: str = "max_min_margin",
    weight: float = 0.5,
    delta: float = 0.0,
    witness: tuple[float, float] = (THETA_U, THETA_V),
    restart_grid=RESTART_GRID,
    max_iter: int = MAX_ITER,
) -> OptimizationResult:
    """Maximize an objective over (theta_u, theta_v) in [0, pi]^2 at fixed phi.

    Nelder-Mead is restarted from every point of ``restart_grid`` squared and
    from ``witness``; the witness value itself is the floor of the result.
    """
    f = objective_function(objective, weight, delta)

    def loss(t):
        return -f(*alpha_beta_at(phi, t[0], t[1]))

    best_t = np.array(witness, dtype=float)
    best_val = -loss(best_t)
    witness_value = best_val
    best_iter = 0
    starts = [witness] + [(u, v) for u in restart_grid for v in restart_grid]
    for start in starts:
        res = minimize(
            loss, np.array(start, dtype=float), method="Nelder-Mead",
            bounds=[(0.0, math.pi), (0.0, math.pi)],
            options={"maxiter": max_iter, "xatol": 1e-9, "fatol": 1e-12},
        )
        val = -float(res.fun)
        if val > best_val:
            best_t, best_val, best_iter = res.x, val, int(res.nit)

    tu, tv = float(best_t[0]), float(best_t[1])
    a, b = alpha_beta_at(phi, tu, tv)
    value = f(a, b)
    return OptimizationResult(
        phi=float(phi), theta_u=tu, theta_v=tv, objective_value=value,
        objective_id=_objective_id(objective, weight, delta), iterations=best_iter,
        alpha=a, beta=b, feasible=_feasible(objective, a, b, value, delta),
        witness_value=witness_value,
    )


def window_is_consistent(points: list[ScanPoint], window: tuple[float, float] | None) -> bool:
    """Every scan point strictly inside the window classifies as jointly violating."""
    if window is None:
        return True
    lo, hi = window
    return all(region_of(p.alpha, p.beta) == BOTH for p in points if lo < p.phi < hi)
