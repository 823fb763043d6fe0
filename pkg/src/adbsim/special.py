"""Special functions: exponential integral, Rayleigh-sum SAA law, min-of-exponentials law."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061

_SERIES_CUTOFF = 1.0
# Above this the asymptotic series is summed exactly and rounded once; the
# continued fraction alone is ~1 ulp off, which matters where e^x E1(x)
# sits within an ulp of 1/(x+1).
_ASYMPTOTIC_CUTOFF = 1e5
_EPS = 1e-17
_MAX_ITER = 10_000


def double_factorial_odd(m: int) -> int:
    """(2m-1)!! = (2m-1)(2m-3)...3*1 as an exact integer."""
    if int(m) != m or m < 1:
        raise DomainError(f"m must be an integer >= 1, got {m}")
    return math.prod(range(1, 2 * m, 2))


def log_double_factorial_odd(m: int) -> float:
    if int(m) != m or m < 1:
        raise DomainError(f"m must be an integer >= 1, got {m}")
    return math.fsum(math.log(2 * j - 1) for j in range(1, m + 1))


def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    term = 1.0
    terms = []
    for k in range(1, _MAX_ITER):
        term *= -x / k
        t = term / k
        terms.append(t)
        if abs(t) < _EPS * 1e-3:
            break
    return -EULER_GAMMA - math.log(x) - math.fsum(terms)


def _scaled_e1_cf(x: float) -> float:
    """e^x E1(x) by modified Lentz evaluation of the continued fraction, x >= 1."""
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    f = d
    for i in range(1, _MAX_ITER):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _EPS:
            return f
    raise ArithmeticError(f"continued fraction for E1({x}) did not converge")


def _scaled_e1_asymptotic(x: float) -> float:
    # e^x E1(x) ~ sum_k (-1)^k k! / x^(k+1); alternating, so the remainder is
    # bounded by the first omitted term.
    xf = Fraction(x)
    term = 1 / xf
    stop = term / 2**70
    total = Fraction(0)
    k = 0
    while abs(term) > stop:
        total += term
        k += 1
        term = -term * k / xf
    return float(total)


def exp_integral_e1(x: float) -> float:
    """E1(x) = int_x^inf e^-t / t dt for x > 0."""
    if not x > 0:
        raise DomainError(f"E1 requires x > 0, got {x}")
    if x < _SERIES_CUTOFF:
        return _e1_series(x)
    if x > 745.0:
        return 0.0
    return math.exp(-x) * _scaled_e1_cf(x)


def scaled_exp_e1(x: float) -> float:
    """e^x * E1(x) without forming either factor alone."""
    if not x > 0:
        raise DomainError(f"E1 requires x > 0, got {x}")
    if x < _SERIES_CUTOFF:
        return math.exp(x) * _e1_series(x)
    if x >= _ASYMPTOTIC_CUTOFF:
        return _scaled_e1_asymptotic(x)
    return _scaled_e1_cf(x)


@dataclass(frozen=True)
class SAAParams:
    """Small-argument approximation for a sum of ``m`` i.i.d. Rayleigh amplitudes.

    The law is stated for the normalised argument ``t = sum / sqrt(m)``.
    """

    m: int
    sigma_h2: float
    b: float = field(init=False)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be an integer >= 1, got {self.m}")
        if not self.sigma_h2 > 0:
            raise DomainError(f"sigma_h2 must be positive, got {self.sigma_h2}")
        if self.m == 1:
            b = float(self.sigma_h2)
        else:
            b = math.exp(
                math.log(self.sigma_h2) - math.log(self.m)
                + log_double_factorial_odd(self.m) / self.m
            )
        object.__setattr__(self, "b", b)


def saa_pdf(t: float, p: SAAParams) -> float:
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    if t == 0:
        return 0.0
    m, b = p.m, p.b
    log_f = (
        (2 * m - 1) * math.log(t) - t * t / (2 * b)
        - (m - 1) * math.log(2.0) - m * math.log(b) - math.lgamma(m)
    )
    return math.exp(log_f)


def saa_cdf(t: float, p: SAAParams) -> float:
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    y = t * t / (2 * p.b)
    if p.m == 1:
        return -math.expm1(-y)
    # Regularised lower gamma P(m, y); the tail sum form loses digits near 0.
    term = math.exp(-y)
    tail = [term]
    for k in range(1, p.m):
        term *= y / k
        tail.append(term)
    s = math.fsum(tail)
    if s < 0.5:
        return 1.0 - s
    # Series for P(m, y) = e^-y y^m / m! * sum_j y^j / ((m+1)...(m+j))
    lead = math.exp(-y + p.m * math.log(y) - math.lgamma(p.m + 1)) if y > 0 else 0.0
    acc, term, j = 1.0, 1.0, 1
    while term > 1e-18 * acc:
        term *= y / (p.m + j)
        acc += term
        j += 1
    return min(1.0, lead * acc)


def min_exponential_cdf(z: float, m: int, sigma2: float) -> float:
    """CDF of the minimum of ``m`` i.i.d. power gains with mean ``2 sigma2``."""
    if z < 0:
        raise DomainError(f"z must be nonnegative, got {z}")
    if int(m) != m or m < 1:
        raise DomainError(f"m must be an integer >= 1, got {m}")
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    return -math.expm1(-m * z / (2.0 * sigma2))
