"""Total-power budgets per scheme and throughput maximisation over the power split."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

from .errors import ConfigError, DomainError
from .protocols import ProtocolKind, ThroughputEstimate

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PowerBudget:
    """Linear total power ``snr_total`` shared by the source and ``L`` relays.

    ADB:       p_s + (L/2) p_r <= snr
    SFD-MMRS:  p_s + L p_r     <= snr
    CRS, DF:   (p_s + L p_r)/2 <= snr
    """

    snr_total: float
    scheme: ProtocolKind
    L: int

    def __post_init__(self):
        object.__setattr__(self, "scheme", ProtocolKind(self.scheme))
        if not self.snr_total > 0:
            raise ConfigError(f"total power must be positive, got {self.snr_total}", key="snr_total")
        if int(self.L) != self.L or self.L < 1:
            raise ConfigError(f"relay count must be an integer >= 1, got {self.L}", key="L")

    @property
    def ps_cap(self) -> float:
        if self.scheme in (ProtocolKind.ADB, ProtocolKind.SFD_MMRS):
            return self.snr_total
        return 2.0 * self.snr_total

    @property
    def relay_weight(self) -> float:
        """Coefficient of p_r in ``p_s + w * p_r <= ps_cap``."""
        return self.L / 2.0 if self.scheme is ProtocolKind.ADB else float(self.L)

    def used(self, p_s: float, p_r: float) -> float:
        """Power spent, on the same scale as ``ps_cap``."""
        return p_s + self.relay_weight * p_r

    def satisfied(self, p_s: float, p_r: float, rtol: float = 1e-12) -> bool:
        return self.used(p_s, p_r) <= self.ps_cap * (1.0 + rtol)

    def tight(self, p_s: float, p_r: float, rtol: float = 1e-12) -> bool:
        return abs(self.used(p_s, p_r) - self.ps_cap) <= rtol * self.ps_cap


def pr_from_ps(budget: PowerBudget, p_s: float) -> float:
    cap = budget.ps_cap
    if not 0 <= p_s <= cap:
        raise DomainError(f"p_s must lie in [0, {cap}] for {budget.scheme.value}, got {p_s}")
    return (cap - p_s) / budget.relay_weight


def powers_from_ratio(budget: PowerBudget, ratio: float) -> tuple[float, float]:
    """Point on the tight budget line with ``p_s / p_r = ratio``."""
    if not ratio > 0 or math.isinf(ratio):
        raise DomainError(f"power ratio must be positive and finite, got {ratio}")
    p_r = budget.ps_cap / (ratio + budget.relay_weight)
    return ratio * p_r, p_r


@dataclass(frozen=True)
class PowerSolution:
    p_s: float
    p_r: float
    throughput: float
    evaluations: int
    binding: bool
    std_error: float = 0.0


def _as_value(out) -> tuple[float, float]:
    if isinstance(out, ThroughputEstimate):
        return float(out.mean), float(out.std_error)
    if isinstance(out, tuple):
        return float(out[0]), float(out[1])
    return float(out), 0.0


def maximize(
    budget: PowerBudget,
    evaluator: Callable[[float, float], object],
    grid_points: int = 64,
    tol: float = 1e-4,
    workers: int = 1,
) -> PowerSolution:
    """Maximise ``evaluator(p_s, p_r)`` along the tight budget line.

    The split is parametrised by ``rho = p_s / ps_cap``. A coarse grid of
    ``grid_points`` interior values locates the best cell, then golden-section
    search refines inside the two neighbouring cells until the bracket is
    narrower than ``tol``. The evaluator may return a float, a
    ``(mean, std_error)`` pair or a ``ThroughputEstimate``; with nonzero
    standard errors refinement also stops once the two probe values differ by
    less than two combined standard errors.
    """
    if grid_points < 1:
        raise ConfigError("grid_points must be >= 1", key="grid_points")
    cap = budget.ps_cap
    seen: dict[float, tuple[float, float]] = {}

    def point(rho):
        p_s = rho * cap
        return p_s, pr_from_ps(budget, p_s)

    def f(rho):
        if rho not in seen:
            seen[rho] = _as_value(evaluator(*point(rho)))
        return seen[rho]

    grid = [(i + 1) / (grid_points + 1) for i in range(grid_points)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(lambda r: _as_value(evaluator(*point(r))), grid))
        seen.update(zip(grid, values))
    else:
        values = [f(r) for r in grid]

    best = max(range(grid_points), key=lambda i: values[i][0])
    lo = grid[best - 1] if best > 0 else 0.0
    hi = grid[best + 1] if best < grid_points - 1 else 1.0

    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        noise = 2.0 * math.hypot(fc[1], fd[1])
        if noise > 0 and abs(fc[0] - fd[0]) < noise:
            break
        if fc[0] >= fd[0]:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)

    rho = max(seen, key=lambda r: seen[r][0])
    p_s, p_r = point(rho)
    value, se = seen[rho]
    return PowerSolution(p_s, p_r, value, len(seen), budget.tight(p_s, p_r), se)
