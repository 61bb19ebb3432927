import math
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.config.config import settings
from app.config.logging import logger
from app.schemas.optimize_schemas import (
    ObjectiveKind,
    OptimizationResult,
    SourceKind,
    SweepCurve,
)
from app.services.information_service import (
    mutual_information_poisson_array,
    mutual_information_thermal,
)
from app.utils.errors import DomainError, OptimizationError
from app.utils.parallel import run_ordered

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0  # 1/phi^2


# ───────────────────────────────────────────────
# Objectives
# ───────────────────────────────────────────────
def evaluate_objective(
    source_kind: SourceKind,
    lam: ArrayLike,
    eta: float,
    q: float,
    objective: ObjectiveKind,
) -> NDArray:
    """Objective values at one or more mean pair numbers ``lam``."""
    lam = np.asarray(lam, dtype=float)
    match source_kind:
        case SourceKind.POISSONIAN:
            h = mutual_information_poisson_array(lam, eta, q)
        case SourceKind.THERMAL:
            h = np.array(
                [mutual_information_thermal(float(x), eta, q) for x in lam.ravel()]
            ).reshape(lam.shape)
        case _:
            raise DomainError(
                "only poissonian and thermal sources have a scalar brightness to tune"
            )

    if objective is ObjectiveKind.MUTUAL_INFO:
        return h
    if np.any(lam <= 0.0):
        raise DomainError("per-photon objectives need lambda > 0")
    if objective is ObjectiveKind.PER_GENERATED:
        return h / lam
    return h / (eta * eta * lam + q * q)


def objective_at_log10(
    source_kind: SourceKind,
    eta: float,
    q: float,
    objective: ObjectiveKind,
    log10_lam: float,
) -> float:
    return float(evaluate_objective(source_kind, 10.0**log10_lam, eta, q, objective))


def _checked(fn: Callable[[float], float], x: float) -> float:
    y = fn(x)
    if not math.isfinite(y):
        logger.warning("objective_not_finite", log10_lambda=x, value=y)
        raise OptimizationError(f"objective is not finite at log10(lambda) = {x!r}")
    return y


def _resolve_bracket(
    bracket: Optional[tuple[float, float]],
) -> tuple[float, float]:
    low, high = bracket or (settings.DEFAULT_LOG10_LOW, settings.DEFAULT_LOG10_HIGH)
    if not low < high:
        raise OptimizationError(f"bracket must satisfy low < high, got ({low}, {high})")
    return low, high


# ───────────────────────────────────────────────
# Golden-section search in log10(lambda)
# ───────────────────────────────────────────────
def golden_section_maximize(
    fn: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, int]:
    """
    Maximise a unimodal ``fn`` on [a, b]; returns (x, iterations).

    x is the midpoint of the final interval, whose width is below ``tol``.
    """
    _checked(fn, a)
    _checked(fn, b)

    dist = b - a
    if dist <= tol:
        return (a + b) / 2.0, 0

    n = int(math.ceil(math.log(tol / dist) / math.log(INV_PHI)))

    c = a + INV_PHI_SQ * dist
    d = a + INV_PHI * dist
    yc = _checked(fn, c)
    yd = _checked(fn, d)

    for _ in range(n - 1):
        if yc > yd:
            b = d
            d = c
            yd = yc
            dist = INV_PHI * dist
            c = a + INV_PHI_SQ * dist
            yc = _checked(fn, c)
        else:
            a = c
            c = d
            yc = yd
            dist = INV_PHI * dist
            d = a + INV_PHI * dist
            yd = _checked(fn, d)

    if yc > yd:
        return (a + d) / 2.0, n
    return (c + b) / 2.0, n


def maximize_lambda(
    source_kind: SourceKind,
    eta: float,
    q: float,
    objective: ObjectiveKind,
    log10_bracket: Optional[tuple[float, float]] = None,
    tol: Optional[float] = None,
) -> OptimizationResult:
    """Brightness lambda* that maximises ``objective`` for fixed eta and q."""
    low, high = _resolve_bracket(log10_bracket)
    fn = partial(objective_at_log10, source_kind, eta, q, objective)
    x, iterations = golden_section_maximize(
        fn, low, high, settings.GOLDEN_SECTION_TOL if tol is None else tol
    )
    value = _checked(fn, x)

    logger.info(
        "optimization_completed",
        source=source_kind.value,
        objective=objective.value,
        eta=eta,
        q=q,
        lambda_star=10.0**x,
        value=value,
        iterations=iterations,
    )
    return OptimizationResult(
        lambda_star=10.0**x,
        objective_value=value,
        objective_kind=objective,
        iterations=iterations,
        bracket=(low, high),
    )


# ───────────────────────────────────────────────
# Sweeps
# ───────────────────────────────────────────────
def sweep_lambda(
    source_kind: SourceKind,
    eta: float,
    q: float,
    objective: ObjectiveKind,
    log10_range: tuple[float, float],
    points: int,
    jobs: Optional[int] = None,
) -> SweepCurve:
    """Objective on ``points`` log-spaced brightness values."""
    low, high = log10_range
    if points < 2:
        raise DomainError(f"a sweep needs at least 2 points, got {points}")
    if not low < high:
        raise DomainError(f"sweep range must satisfy low < high, got ({low}, {high})")

    exponents = np.linspace(low, high, points)
    values = run_ordered(
        partial(objective_at_log10, source_kind, eta, q, objective),
        [float(x) for x in exponents],
        jobs,
    )
    return SweepCurve(
        parameter_name="lambda",
        points=tuple(zip((10.0**exponents).tolist(), values)),
    )


def _optimum_for_eta(
    source_kind: SourceKind,
    q: float,
    objective: ObjectiveKind,
    log10_bracket: Optional[tuple[float, float]],
    eta: float,
) -> float:
    return maximize_lambda(source_kind, eta, q, objective, log10_bracket).objective_value


def _optimum_for_q(
    source_kind: SourceKind,
    eta: float,
    objective: ObjectiveKind,
    log10_bracket: Optional[tuple[float, float]],
    q: float,
) -> float:
    return maximize_lambda(source_kind, eta, q, objective, log10_bracket).objective_value


def _require_increasing(name: str, grid: Sequence[float], low_open: bool) -> None:
    if not grid:
        raise DomainError(f"{name} grid is empty")
    for value in grid:
        if not (0.0 < value <= 1.0 if low_open else 0.0 <= value <= 1.0):
            raise DomainError(f"{name} grid value {value!r} out of range")
    if any(not b > a for a, b in zip(grid, grid[1:])):
        raise DomainError(f"{name} grid must be strictly increasing")


def sweep_efficiency_optimum(
    q: float,
    eta_grid: Sequence[float],
    objective: ObjectiveKind,
    source_kind: SourceKind = SourceKind.POISSONIAN,
    log10_bracket: Optional[tuple[float, float]] = None,
    jobs: Optional[int] = None,
) -> SweepCurve:
    """Best achievable objective (over lambda) as a function of the efficiency."""
    eta_grid = [float(e) for e in eta_grid]
    _require_increasing("eta", eta_grid, low_open=True)
    values = run_ordered(
        partial(_optimum_for_eta, source_kind, q, objective, log10_bracket),
        eta_grid,
        jobs,
    )
    return SweepCurve(parameter_name="eta", points=tuple(zip(eta_grid, values)))


def sweep_dark_count_optimum(
    eta: float,
    q_grid: Sequence[float],
    objective: ObjectiveKind,
    source_kind: SourceKind = SourceKind.POISSONIAN,
    log10_bracket: Optional[tuple[float, float]] = None,
    jobs: Optional[int] = None,
) -> SweepCurve:
    """Best achievable objective (over lambda) as a function of the dark-count probability."""
    q_grid = [float(v) for v in q_grid]
    _require_increasing("q", q_grid, low_open=False)
    values = run_ordered(
        partial(_optimum_for_q, source_kind, eta, objective, log10_bracket),
        q_grid,
        jobs,
    )
    return SweepCurve(parameter_name="q", points=tuple(zip(q_grid, values)))
