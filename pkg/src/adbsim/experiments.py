"""Figure sweeps: configuration loading, orchestration and CSV/JSON-lines output."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .analytic import AdbAnalyticConfig, adb_closed_form
from .channel import ChannelParams
from .errors import ConfigError
from .power import PowerBudget, maximize, powers_from_ratio
from .protocols import ProtocolKind, SimConfig, simulate

log = logging.getLogger(__name__)

KINDS = ("ratio_sweep", "snr_sweep", "grouping_sweep", "relay_count_sweep", "single_point")

CSV_COLUMNS = (
    "scheme", "estimator", "sweep_name", "sweep_value", "L", "m", "p_s", "p_r",
    "snr_total", "throughput", "std_error", "n_slots", "seed",
)

ALL_SCHEMES = (ProtocolKind.ADB, ProtocolKind.SFD_MMRS, ProtocolKind.CRS, ProtocolKind.DF)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def default_ratio_grid() -> tuple[float, ...]:
    return tuple(float(x) for x in np.logspace(-1.0, 1.0, 21))


_DEFAULTS = {
    "ratio_sweep": dict(snr_db=10.0, relays=4, group_size=2),
    "snr_sweep": dict(relays=4, group_size=2),
    "grouping_sweep": dict(relays=6, schemes=("ADB",)),
    "relay_count_sweep": dict(snr_db=10.0),
    "single_point": dict(snr_db=10.0, relays=4, group_size=2),
}


@dataclass(frozen=True)
class ExperimentSpec:
    """A validated sweep description. SNR values are stored in dB as given."""

    kind: str
    schemes: tuple = ALL_SCHEMES
    snr_db: float = 10.0
    snr_grid_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    ratio_grid: tuple = field(default_factory=default_ratio_grid)
    relay_grid: tuple = (2, 4, 6, 8, 10, 12, 14)
    group_grid: tuple | None = None
    relays: int = 4
    group_size: int | None = None
    sigma_g2: float = 1.0
    sigma_h2: float = 1.0
    slots: int = 10**6
    seed: int = 1
    workers: int = 1
    grid_points: int = 64
    p_s: float | None = None
    p_r: float | None = None
    analytic_only: bool = False
    json: bool = False
    out: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}", key="kind")
        schemes = tuple(
            s if isinstance(s, ProtocolKind) else ProtocolKind.parse(s) for s in self.schemes
        )
        if not schemes:
            raise ConfigError("at least one scheme is required", key="schemes")
        object.__setattr__(self, "schemes", tuple(dict.fromkeys(schemes)))
        for key in ("snr_grid_db", "ratio_grid", "relay_grid", "group_grid"):
            grid = getattr(self, key)
            if grid is None:
                continue
            grid = tuple(grid)
            if not grid:
                raise ConfigError("grid must be nonempty", key=key)
            if any(not math.isfinite(v) for v in grid):
                raise ConfigError("grid values must be finite", key=key)
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError("grid must be strictly increasing", key=key)
            object.__setattr__(self, key, grid)
        if any(r <= 0 for r in self.ratio_grid):
            raise ConfigError("power ratios must be positive", key="ratio_grid")
        if any(int(v) != v or v < 1 for v in self.relay_grid):
            raise ConfigError("relay counts must be integers >= 1", key="relay_grid")
        if int(self.relays) != self.relays or self.relays < 1:
            raise ConfigError("relay count must be an integer >= 1", key="relays")
        if self.group_size is not None and (
            int(self.group_size) != self.group_size or self.group_size < 1
        ):
            raise ConfigError("group size must be an integer >= 1", key="group_size")
        if int(self.slots) != self.slots or self.slots < 2 or self.slots % 2:
            raise ConfigError("slot count must be an even integer >= 2", key="slots")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer", key="seed")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1", key="workers")
        if self.grid_points < 1:
            raise ConfigError("grid_points must be >= 1", key="grid_points")
        for key in ("sigma_g2", "sigma_h2"):
            if not getattr(self, key) > 0:
                raise ConfigError("variance must be positive", key=key)
        if (self.p_s is None) != (self.p_r is None):
            raise ConfigError("p_s and p_r must be given together", key="p_s")
        if self.p_s is not None and not (self.p_s >= 0 and self.p_r >= 0):
            raise ConfigError("powers must be nonnegative", key="p_s")
        if ProtocolKind.ADB in self.schemes and self.kind in ("ratio_sweep", "snr_sweep", "single_point"):
            self.adb_group(self.relays)
        if self.kind == "grouping_sweep":
            if self.schemes != (ProtocolKind.ADB,):
                raise ConfigError("grouping sweep applies to ADB only", key="schemes")
            if self.relays < 2:
                raise ConfigError("grouping sweep needs L >= 2", key="relays")
            for m in self.groups():
                if int(m) != m or not 1 <= m <= self.relays - 1:
                    raise ConfigError(f"group size {m} outside 1..L-1", key="group_grid")
        if self.kind == "relay_count_sweep" and ProtocolKind.ADB in self.schemes:
            for L in self.relay_grid:
                self.adb_group(L)

    def adb_group(self, L: int) -> int:
        if self.group_size is None:
            if L % 2:
                raise ConfigError(f"odd L={L} needs an explicit group size for ADB", key="group_size")
            m = L // 2
        else:
            m = self.group_size
        if not 1 <= m <= L - 1:
            raise ConfigError(f"group size {m} outside 1..{L - 1}", key="group_size")
        return m

    def groups(self) -> tuple:
        return self.group_grid if self.group_grid is not None else tuple(range(1, self.relays))

    def channel(self, L: int) -> ChannelParams:
        return ChannelParams(L, self.sigma_g2, self.sigma_h2)


SPEC_KEYS = frozenset(f.name for f in fields(ExperimentSpec)) - {"kind"}


def load_spec(kind: str, config_path=None, overrides: dict | None = None) -> ExperimentSpec:
    """Merge a JSON config file with command-line overrides (overrides win)."""
    values: dict = dict(_DEFAULTS.get(kind, {}))
    if config_path is not None:
        try:
            text = Path(config_path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}", key="config") from None
        if text.strip():
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"malformed JSON: {exc}", key="config") from None
            if not isinstance(data, dict):
                raise ConfigError("config must be a JSON object", key="config")
            for key in data:
                if key not in SPEC_KEYS:
                    raise ConfigError("unknown configuration key", key=key)
            values.update(data)
    for key, v in (overrides or {}).items():
        if key not in SPEC_KEYS:
            raise ConfigError("unknown configuration key", key=key)
        if v is not None:
            values[key] = v
    if isinstance(values.get("schemes"), str):
        values["schemes"] = tuple(s for s in values["schemes"].split(",") if s.strip())
    try:
        return ExperimentSpec(kind=kind, **values)
    except TypeError as exc:
        raise ConfigError(str(exc), key="config") from None


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    estimator: str
    sweep_name: str
    sweep_value: float
    L: int
    m: int | None
    p_s: float
    p_r: float
    snr_total: float
    throughput: float
    std_error: float
    n_slots: int
    seed: int

    def check_budget(self):
        budget = PowerBudget(self.snr_total, ProtocolKind(self.scheme), self.L)
        if not budget.satisfied(self.p_s, self.p_r):
            raise ArithmeticError(f"row violates the {self.scheme} power budget: {self}")
        if self.estimator == "analytic" and self.std_error != 0:
            raise ArithmeticError("analytic rows carry no standard error")


@dataclass
class SweepResult:
    rows: list
    warnings: list


# -- evaluators ----------------------------------------------------------------

def simulated(spec: ExperimentSpec, scheme: ProtocolKind, L: int, m: int | None):
    channel = spec.channel(L)

    def evaluate(p_s, p_r):
        cfg = SimConfig(scheme, channel, p_s, p_r, m=m, n_slots=spec.slots, seed=spec.seed)
        return simulate(cfg)

    return evaluate


def analytic(spec: ExperimentSpec, L: int, m: int):
    def evaluate(p_s, p_r):
        cfg = AdbAnalyticConfig(L, m, p_s, p_r, spec.sigma_g2, spec.sigma_h2)
        return adb_closed_form(cfg).c_adb

    return evaluate


def _estimators(spec: ExperimentSpec, scheme: ProtocolKind, L: int, m: int | None):
    """(estimator name, evaluator) pairs to run for one scheme."""
    out = []
    if scheme is ProtocolKind.ADB:
        out.append(("analytic", analytic(spec, L, m)))
    if not spec.analytic_only:
        out.append(("simulated", simulated(spec, scheme, L, m)))
    return out


def _value(res):
    if hasattr(res, "mean"):
        return float(res.mean), float(res.std_error)
    return float(res), 0.0


def _scheme_ok(scheme: ProtocolKind, L: int) -> bool:
    return L >= 2 or scheme in (ProtocolKind.CRS, ProtocolKind.DF)


# -- sweeps --------------------------------------------------------------------

def _run_tasks(spec: ExperimentSpec, tasks):
    """Run zero-argument callables, each returning a list of rows, in grid order."""
    if spec.workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(spec.workers) as pool:
            chunks = list(pool.map(lambda t: t(), tasks))
    else:
        chunks = [t() for t in tasks]
    return [row for chunk in chunks for row in chunk]


def _point_rows(spec, scheme, L, m, snr, p_s, p_r, sweep_name, sweep_value):
    rows = []
    for est, fn in _estimators(spec, scheme, L, m):
        value, se = _value(fn(p_s, p_r))
        rows.append(ResultRow(
            scheme.value, est, sweep_name, sweep_value, L, m, p_s, p_r, snr,
            value, se, 0 if est == "analytic" else spec.slots, spec.seed,
        ))
    return rows


def _cmax_rows(spec, scheme, L, m, snr, sweep_name, sweep_value):
    budget = PowerBudget(snr, scheme, L)
    rows = []
    for est, fn in _estimators(spec, scheme, L, m):
        sol = maximize(budget, fn, grid_points=spec.grid_points)
        rows.append(ResultRow(
            scheme.value, est, sweep_name, sweep_value, L, m, sol.p_s, sol.p_r, snr,
            sol.throughput, sol.std_error, 0 if est == "analytic" else spec.slots, spec.seed,
        ))
    return rows


def _adb_m(spec, scheme, L):
    return spec.adb_group(L) if scheme is ProtocolKind.ADB else None


def run_ratio_sweep(spec: ExperimentSpec) -> SweepResult:
    L, snr = spec.relays, db_to_linear(spec.snr_db)
    tasks, warnings = [], []
    for ratio in spec.ratio_grid:
        for scheme in spec.schemes:
            if not _scheme_ok(scheme, L):
                warnings.append(f"skip {scheme.value} at ratio {ratio!r}: needs L >= 2")
                continue
            m = _adb_m(spec, scheme, L)
            p_s, p_r = powers_from_ratio(PowerBudget(snr, scheme, L), ratio)
            tasks.append(lambda s=scheme, m=m, a=p_s, b=p_r, r=ratio:
                         _point_rows(spec, s, L, m, snr, a, b, "ps_pr_ratio", r))
    return SweepResult(_run_tasks(spec, tasks), warnings)


def run_snr_sweep(spec: ExperimentSpec) -> SweepResult:
    L = spec.relays
    tasks, warnings = [], []
    for snr_db in spec.snr_grid_db:
        for scheme in spec.schemes:
            if not _scheme_ok(scheme, L):
                warnings.append(f"skip {scheme.value} at {snr_db} dB: needs L >= 2")
                continue
            m = _adb_m(spec, scheme, L)
            tasks.append(lambda s=scheme, m=m, d=snr_db:
                         _cmax_rows(spec, s, L, m, db_to_linear(d), "snr_db", d))
    return SweepResult(_run_tasks(spec, tasks), warnings)


def run_grouping_sweep(spec: ExperimentSpec) -> SweepResult:
    L = spec.relays
    tasks = []
    for snr_db in spec.snr_grid_db:
        for m in spec.groups():
            tasks.append(lambda m=m, d=snr_db:
                         _cmax_rows(spec, ProtocolKind.ADB, L, m, db_to_linear(d), "group_size", m))
    return SweepResult(_run_tasks(spec, tasks), [])


def run_relay_count_sweep(spec: ExperimentSpec) -> SweepResult:
    snr = db_to_linear(spec.snr_db)
    tasks, warnings = [], []
    for L in spec.relay_grid:
        for scheme in spec.schemes:
            if not _scheme_ok(scheme, L):
                warnings.append(f"skip {scheme.value} at L={L}: needs L >= 2")
                continue
            m = _adb_m(spec, scheme, L)
            tasks.append(lambda s=scheme, L=L, m=m:
                         _cmax_rows(spec, s, L, m, snr, "relays", L))
    return SweepResult(_run_tasks(spec, tasks), warnings)


def run_single_point(spec: ExperimentSpec) -> SweepResult:
    """Throughput at fixed ``(p_s, p_r)`` when given, otherwise C_max at ``snr_db``."""
    L, snr = spec.relays, db_to_linear(spec.snr_db)
    tasks, warnings = [], []
    for scheme in spec.schemes:
        if not _scheme_ok(scheme, L):
            warnings.append(f"skip {scheme.value}: needs L >= 2")
            continue
        m = _adb_m(spec, scheme, L)
        if spec.p_s is not None:
            if not PowerBudget(snr, scheme, L).satisfied(spec.p_s, spec.p_r):
                warnings.append(f"skip {scheme.value}: powers exceed its budget at {spec.snr_db} dB")
                continue
            tasks.append(lambda s=scheme, m=m:
                         _point_rows(spec, s, L, m, snr, spec.p_s, spec.p_r, "snr_db", spec.snr_db))
        else:
            tasks.append(lambda s=scheme, m=m:
                         _cmax_rows(spec, s, L, m, snr, "snr_db", spec.snr_db))
    return SweepResult(_run_tasks(spec, tasks), warnings)


RUNNERS = {
    "ratio_sweep": run_ratio_sweep,
    "snr_sweep": run_snr_sweep,
    "grouping_sweep": run_grouping_sweep,
    "relay_count_sweep": run_relay_count_sweep,
    "single_point": run_single_point,
}


def run(spec: ExperimentSpec) -> SweepResult:
    result = RUNNERS[spec.kind](spec)
    if spec.analytic_only:
        result.warnings.extend(
            f"no analytic model for {s.value}; skipped"
            for s in spec.schemes if s is not ProtocolKind.ADB
        )
    for row in result.rows:
        row.check_budget()
    return result


# -- output --------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_rows(rows, as_json: bool = False) -> str:
    buf = io.StringIO()
    if as_json:
        for row in rows:
            buf.write(json.dumps(asdict(row)) + "\n")
        return buf.getvalue()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        d = asdict(row)
        writer.writerow([_fmt(d[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_result(result: SweepResult, spec: ExperimentSpec, stream=None) -> None:
    """Write rows to ``spec.out`` (or ``stream``) and warnings to a ``.log`` sidecar."""
    text = format_rows(result.rows, spec.json)
    if spec.out:
        Path(spec.out).write_text(text)
        if result.warnings:
            Path(spec.out + ".log").write_text("".join(w + "\n" for w in result.warnings))
    else:
        stream.write(text)
        for w in result.warnings:
            log.warning(w)
