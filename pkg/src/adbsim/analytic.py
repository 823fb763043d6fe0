"""Approximate closed-form ADB throughput in i.i.d. Rayleigh fading.

Source-relay expectations (``c11``, ``c21``) are exact. Relay-destination
expectations (``c22``, ``c12``) rest on the small-argument approximation of
the Rayleigh-sum law and are therefore approximate.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import mpmath

from .errors import ConfigError, DomainError
from .special import SAAParams, scaled_exp_e1

LN2 = math.log(2.0)

# Above this ratio of largest term to result the float evaluation of the
# alternating sums is redone at higher precision.
_CONDITION_LIMIT = 1e4
_MP_DPS = 50

clamp_count = 0


def _check_nonneg(**kw):
    for name, v in kw.items():
        if not v >= 0:
            raise DomainError(f"{name} must be nonnegative, got {v}")


def min_gain_rate(p_s: float, n: int, sigma_g2: float) -> float:
    """E[log2(1 + p_s * min of n exponential power gains)] in bps/Hz."""
    _check_nonneg(p_s=p_s)
    if int(n) != n or n < 1:
        raise DomainError(f"group size must be an integer >= 1, got {n}")
    if not sigma_g2 > 0:
        raise DomainError(f"sigma_g2 must be positive, got {sigma_g2}")
    if p_s == 0:
        return 0.0
    x = n / (2.0 * sigma_g2 * p_s)
    return scaled_exp_e1(x) / LN2


def _beamforming_terms(x0, n, scaled_e1, factorial):
    # With beta = 1/(p_r n) and x0 = beta / (2b), the (2b)^k and beta^k factors
    # collapse into powers of x0:
    #   S = e^x0 E1(x0) * sum_{k<n} (-x0)^k / k!
    #     + sum_{1<=k<n} sum_{1<=s<=k} (s-1)!/k! * (-x0)^(k-s)
    lead = [(-x0) ** k / factorial(k) for k in range(n)]
    tail = [
        factorial(s - 1) / factorial(k) * (-x0) ** (k - s)
        for k in range(1, n)
        for s in range(1, k + 1)
    ]
    return [scaled_e1 * t for t in lead] + tail


def beamforming_rate(p_r: float, n: int, sigma_h2: float) -> float:
    """SAA estimate of E[log2(1 + p_r * (sum of n Rayleigh amplitudes)^2)]."""
    global clamp_count
    _check_nonneg(p_r=p_r)
    if int(n) != n or n < 1:
        raise DomainError(f"group size must be an integer >= 1, got {n}")
    if p_r == 0:
        return 0.0
    b = SAAParams(n, sigma_h2).b
    x0 = 1.0 / (2.0 * b * p_r * n)
    terms = _beamforming_terms(x0, n, scaled_exp_e1(x0), math.factorial)
    total = math.fsum(terms)
    scale = max(abs(t) for t in terms)
    if total <= 0 or scale > _CONDITION_LIMIT * total:
        with mpmath.workdps(_MP_DPS):
            x = mpmath.mpf(1) / (2 * mpmath.mpf(b) * mpmath.mpf(p_r) * n)
            se1 = mpmath.exp(x) * mpmath.e1(x)
            total = float(mpmath.fsum(_beamforming_terms(x, n, se1, mpmath.factorial)))
    if total < 0:
        clamp_count += 1
        total = 0.0
    return total / LN2


def c11_closed(p_s: float, m: int, sigma_g2: float) -> float:
    return min_gain_rate(p_s, m, sigma_g2)


def c21_closed(p_s: float, L: int, m: int, sigma_g2: float) -> float:
    return min_gain_rate(p_s, L - m, sigma_g2)


def c22_closed(p_r: float, m: int, sigma_h2: float) -> float:
    return beamforming_rate(p_r, m, sigma_h2)


def c12_closed(p_r: float, L: int, m: int, sigma_h2: float) -> float:
    return beamforming_rate(p_r, L - m, sigma_h2)


class ActiveCase(enum.Enum):
    """Which term of each flow's min is binding, named by the two rates summed."""

    C11_C21 = "c11+c21"
    C11_C12 = "c11+c12"
    C22_C21 = "c22+c21"
    C22_C12 = "c22+c12"

    @classmethod
    def from_rates(cls, c11, c12, c21, c22) -> "ActiveCase":
        first_src = c11 < c22
        second_src = c21 < c12
        return {
            (True, True): cls.C11_C21,
            (True, False): cls.C11_C12,
            (False, True): cls.C22_C21,
            (False, False): cls.C22_C12,
        }[(first_src, second_src)]


@dataclass(frozen=True)
class AdbAnalyticConfig:
    L: int
    m: int
    p_s: float
    p_r: float
    sigma_g2: float = 1.0
    sigma_h2: float = 1.0

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise ConfigError(f"ADB needs at least 2 relays, got L={self.L}", key="L")
        if int(self.m) != self.m or not 1 <= self.m <= self.L - 1:
            raise ConfigError(f"group size must satisfy 1 <= m <= L-1, got m={self.m}", key="m")
        if not self.p_s >= 0:
            raise DomainError(f"p_s must be nonnegative, got {self.p_s}")
        if not self.p_r >= 0:
            raise DomainError(f"p_r must be nonnegative, got {self.p_r}")


@dataclass(frozen=True)
class AdbAnalyticResult:
    c11: float
    c12: float
    c21: float
    c22: float
    c_adb: float
    active_case: ActiveCase


def adb_closed_form(cfg: AdbAnalyticConfig) -> AdbAnalyticResult:
    c11 = c11_closed(cfg.p_s, cfg.m, cfg.sigma_g2)
    c21 = c21_closed(cfg.p_s, cfg.L, cfg.m, cfg.sigma_g2)
    c22 = c22_closed(cfg.p_r, cfg.m, cfg.sigma_h2)
    c12 = c12_closed(cfg.p_r, cfg.L, cfg.m, cfg.sigma_h2)
    c_adb = 0.5 * min(c11, c22) + 0.5 * min(c21, c12)
    return AdbAnalyticResult(c11, c12, c21, c22, c_adb, ActiveCase.from_rates(c11, c12, c21, c22))
