"""Fast oracle checks runnable from the command line (``adbsim selftest``).

Each check compares a production path against an independent route:
a convergent series, numerical quadrature, or a plain Monte Carlo average
drawn with numpy's default generator rather than the package's streams.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from .analytic import AdbAnalyticConfig, adb_closed_form, c11_closed, c22_closed
from .channel import ChannelParams
from .experiments import format_rows, load_spec, run
from .power import PowerBudget, maximize
from .protocols import ProtocolKind, SimConfig, adb_flow_estimate, adb_queue_sim
from .special import EULER_GAMMA, SAAParams, exp_integral_e1, saa_cdf, saa_pdf, scaled_exp_e1


def _e1_series(x: float) -> float:
    s, term, k = 0.0, 1.0, 1
    while True:
        term *= -x / k
        s += term / k
        if abs(term / k) < 1e-18:
            return -EULER_GAMMA - math.log(x) - s
        k += 1


def check_e1() -> str:
    worst = max(abs(exp_integral_e1(x) - _e1_series(x)) for x in np.logspace(-6, 0.3, 200))
    assert worst <= 1e-10, worst
    for x in np.logspace(-6, 8, 500):
        v, xf = Fraction(scaled_exp_e1(x)), Fraction(x)
        assert 1 / (xf + 1) < v < 1 / xf, x
    return f"max |E1 - series| = {worst:.2e}"


def check_saa() -> str:
    worst = 0.0
    for m in (1, 2, 4, 8):
        p = SAAParams(m, 1.0)
        for t in (0.5, 1.0, 2.0, 4.0):
            q = quad(saa_pdf, 0, t, args=(p,), epsabs=1e-13, epsrel=1e-13)[0]
            worst = max(worst, abs(q - saa_cdf(t, p)))
    assert worst <= 1e-8, worst
    return f"max |quad(pdf) - cdf| = {worst:.2e}"


def check_c11_mc() -> str:
    rng = np.random.default_rng(20240501)
    z = rng.exponential(2.0, size=(400_000, 2)).min(axis=1)
    x = np.log2(1.0 + 4.0 * z)
    mc, se = x.mean(), x.std(ddof=1) / math.sqrt(x.size)
    val = c11_closed(4.0, 2, 1.0)
    assert abs(val - mc) <= 3.5 * se, (val, mc, se)
    return f"closed {val:.5f} vs MC {mc:.5f} +- {se:.1e}"


def check_c22_quad() -> str:
    p = SAAParams(2, 1.0)
    ref = quad(lambda t: math.log2(1 + 2.0 * 2 * t * t) * saa_pdf(t, p), 0, np.inf,
               epsabs=1e-13, epsrel=1e-13, limit=400)[0]
    val = c22_closed(2.0, 2, 1.0)
    assert abs(val - ref) <= 1e-8, (val, ref)
    return f"closed {val:.10f} vs quadrature {ref:.10f}"


def check_queue_flow() -> str:
    cfg = SimConfig(ProtocolKind.ADB, ChannelParams(4), 2.0, 4.0, m=2, n_slots=100_000, seed=3)
    flow = adb_flow_estimate(cfg)
    queue, _ = adb_queue_sim(cfg)
    tol = 3 * math.hypot(flow.std_error, queue.std_error)
    assert abs(flow.mean - queue.mean) <= tol
    an = adb_closed_form(AdbAnalyticConfig(4, 2, 2.0, 4.0)).c_adb
    assert abs(an / flow.mean - 1) <= 0.05
    return f"flow {flow.mean:.4f}, queue {queue.mean:.4f}, analytic {an:.4f}"


def check_power() -> str:
    sol = maximize(PowerBudget(10.0, ProtocolKind.ADB, 4), lambda a, b: min(a, b))
    assert abs(sol.p_s - 10 / 3) < 1e-3 and sol.binding
    return f"p_s = {sol.p_s:.5f}"


def check_determinism() -> str:
    texts = []
    for workers in (1, 4):
        spec = load_spec("ratio_sweep", overrides=dict(
            slots=20_000, workers=workers, ratio_grid=(0.5, 2.0), seed=11))
        texts.append(format_rows(run(spec).rows))
    assert texts[0] == texts[1]
    return "workers 1 vs 4 byte-identical"


CHECKS = {
    "exp_integral": check_e1,
    "saa_law": check_saa,
    "c11_monte_carlo": check_c11_mc,
    "c22_quadrature": check_c22_quad,
    "queue_vs_flow": check_queue_flow,
    "power_alloc": check_power,
    "determinism": check_determinism,
}


def run_selftest(out) -> bool:
    ok = True
    for name, fn in CHECKS.items():
        try:
            detail = fn()
            out.write(f"PASS {name}: {detail}\n")
        except AssertionError as exc:
            ok = False
            out.write(f"FAIL {name}: {exc}\n")
    return ok
