"""Seeded Monte Carlo runner: empirical error/regret curves next to their bounds."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bounds import (
    BoundConstants,
    Q_MEAN,
    avar_error_bound,
    entropy_error_bound,
    generic_error_bound,
    mv_error_bound,
    q_hoeffding,
    var_error_bound_from_density,
)
from .distributions import (
    CONTINUOUS,
    Rng,
    density_info,
    distribution_to_dict,
    mix_seed,
    quantile,
)
from .elimination import BanditInstance, Schedule, make_schedule, run_batch_elimination
from .errors import DomainError, FunBanditError
from .estimators import (
    AverageValueAtRisk,
    Mean,
    MeanVariance,
    ShannonEntropy,
    ValueAtRisk,
    functional_to_dict,
)

CSV_COLUMNS = (
    "T",
    "trials",
    "empirical_error",
    "mean_regret",
    "regret_stderr",
    "bound_error",
    "bound_regret",
    "wall_time_ms",
)

WORKERS_ENV = "FUNBANDIT_WORKERS"


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise DomainError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


@dataclass
class ExperimentConfig:
    instance: BanditInstance
    policy: str = "sh"
    budgets: Sequence[int] = ()
    trials: int = 1000
    master_seed: int = 0
    constants: BoundConstants = field(default_factory=BoundConstants)
    x: Optional[Sequence[int]] = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        self.schedule = make_schedule(self.instance.K, self.policy, self.x)

    @property
    def H(self) -> int:
        return self.schedule.H

    def to_dict(self) -> dict:
        out = {
            "arms": [distribution_to_dict(a) for a in self.instance.arms],
            "functional": functional_to_dict(self.instance.functional),
            "schedule": {"policy": self.policy},
            "budgets": list(self.budgets),
            "trials": self.trials,
            "seed": self.master_seed,
            "constants": {k: v for k, v in asdict(self.constants).items() if v is not None},
        }
        if self.policy == "custom":
            out["schedule"]["x"] = list(self.schedule.x)
        return out


@dataclass
class ReportRow:
    T: int
    trials: int
    empirical_error: float = math.nan
    mean_regret: float = math.nan
    regret_stderr: float = math.nan
    bound_error: float = math.nan
    bound_regret: float = math.nan
    wall_time_ms: float = 0.0
    error: Optional[str] = None
    error_kind: Optional[str] = None

    @property
    def error_stderr(self) -> float:
        e = self.empirical_error
        return math.sqrt(e * (1 - e) / self.trials)


@dataclass
class ExperimentReport:
    rows: list[ReportRow]
    metadata: dict

    def to_csv(self, timing: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            w.writerow(_format_row(row, timing))
        return buf.getvalue()

    def to_json(self, timing: bool = True) -> str:
        rows = []
        for row in self.rows:
            values = dict(zip(CSV_COLUMNS, (_json_number(v) for v in _row_numbers(row, timing))))
            if row.error is not None:
                values["error"] = row.error
            rows.append(values)
        return json.dumps({"metadata": self.metadata, "rows": rows}, indent=2, sort_keys=True) + "\n"


def _round12(v: float) -> float:
    return float(f"{v:.12g}")


def _row_numbers(row: ReportRow, timing: bool) -> list:
    wall = _round12(row.wall_time_ms) if timing else 0.0
    return [
        row.T,
        row.trials,
        *(_round12(v) for v in (
            row.empirical_error,
            row.mean_regret,
            row.regret_stderr,
            row.bound_error,
            row.bound_regret,
        )),
        wall,
    ]


def _format_row(row: ReportRow, timing: bool) -> list[str]:
    out = []
    for v in _row_numbers(row, timing):
        out.append(str(v) if isinstance(v, int) else f"{v:.12g}")
    return out


def _json_number(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


# ---------------------------------------------------------------------------
# Theoretical bounds for a row
# ---------------------------------------------------------------------------


def theoretical_error_bound(
    instance: BanditInstance, schedule: Schedule, T: int, constants: BoundConstants
) -> float:
    """Raw error bound matching the instance's functional, NaN when no bound applies.

    No bound applies when the gap is zero, a precondition fails, a needed
    constant is missing, or estimator bias swallows half the gap.
    """
    d = instance.gap_min
    if not d > 0:
        return math.nan
    H, K = schedule.H, schedule.K
    f = instance.functional
    lo = min(a.support_lo for a in instance.arms)
    hi = max(a.support_hi for a in instance.arms)
    try:
        if isinstance(f, Mean):
            width = hi - lo
            q = Q_MEAN if width <= math.sqrt(2) else q_hoeffding(width)
            return generic_error_bound(H, K, T, d, q)
        if isinstance(f, MeanVariance):
            return mv_error_bound(H, K, T, d, f.lam, lo, hi)
        if isinstance(f, ValueAtRisk):
            if not all(isinstance(a, CONTINUOUS) for a in instance.arms):
                return math.nan
            dens = [
                density_info(a, quantile(a, f.lam))
                for i, a in enumerate(instance.arms)
                if i != instance.best
            ]
            return var_error_bound_from_density(H, K, T, d, f.lam, dens, constants)
        if isinstance(f, AverageValueAtRisk):
            m = max(abs(lo), abs(hi))
            return avar_error_bound(H, K, T, d, f.lam, m, constants)
        if isinstance(f, ShannonEntropy):
            n = T // H
            k = f.k if f.k is not None else max(1, math.isqrt(n))
            return entropy_error_bound(H, K, T, d, n, constants, k)
    except FunBanditError:
        return math.nan
    return math.nan


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------


def trial_seed(master_seed: int, T: int, trial: int) -> int:
    return mix_seed(master_seed, T, trial)


def _run_chunk(
    instance: BanditInstance, schedule: Schedule, T: int, master_seed: int, start: int, stop: int
) -> list[int]:
    out = []
    for i in range(start, stop):
        rng = Rng(trial_seed(master_seed, T, i))
        try:
            res = run_batch_elimination(instance, schedule, T, instance.functional, rng)
        except FunBanditError as exc:
            raise type(exc)(f"trial {i}: {exc}") from exc
        out.append(res.recommended)
    return out


def _chunks(n: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, n))
    edges = np.linspace(0, n, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _recommendations(
    config: ExperimentConfig, T: int, workers: int, pool: Optional[ProcessPoolExecutor]
) -> list[int]:
    args = (config.instance, config.schedule, T, config.master_seed)
    if workers <= 1 or pool is None:
        return _run_chunk(*args, 0, config.trials)
    futures = [pool.submit(_run_chunk, *args, a, b) for a, b in _chunks(config.trials, workers)]
    recs: list[int] = []
    for fut in futures:
        recs.extend(fut.result())
    return recs


def run_trials(
    config: ExperimentConfig,
    T: int,
    workers: Optional[int] = None,
    _pool: Optional[ProcessPoolExecutor] = None,
) -> ReportRow:
    """Run ``config.trials`` independent eliminations at budget ``T``.

    Trial ``i`` is seeded by ``mix(master_seed, T, i)``, so the row does not
    depend on ``workers``.
    """
    workers = default_workers() if workers is None else workers
    t0 = time.perf_counter()
    owns_pool = _pool is None and workers > 1
    pool = ProcessPoolExecutor(workers) if owns_pool else _pool
    try:
        recs = _recommendations(config, T, workers, pool)
    finally:
        if owns_pool:
            pool.shutdown()

    inst = config.instance
    gaps = np.asarray(inst.gaps)[np.asarray(recs)]
    n = config.trials
    row = ReportRow(T=T, trials=n)
    row.empirical_error = float(np.mean(np.asarray(recs) != inst.best))
    row.mean_regret = float(np.mean(gaps))
    row.regret_stderr = float(np.std(gaps, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    row.bound_error = theoretical_error_bound(inst, config.schedule, T, config.constants)
    row.bound_regret = inst.gap_max * row.bound_error
    row.wall_time_ms = (time.perf_counter() - t0) * 1000.0
    return row


def sweep_budgets(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """One row per budget; a failing budget records its error and the sweep continues."""
    if not config.budgets:
        raise DomainError("budgets must be nonempty")
    workers = default_workers() if workers is None else workers
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    rows = []
    try:
        for T in config.budgets:
            try:
                rows.append(run_trials(config, int(T), workers, pool))
            except FunBanditError as exc:
                rows.append(
                    ReportRow(T=int(T), trials=config.trials, error=str(exc),
                              error_kind=type(exc).__name__)
                )
    finally:
        if pool is not None:
            pool.shutdown()
    meta = {
        "config": config.to_dict(),
        "seed": config.master_seed,
        "version": __version__,
        "H": config.H,
        "schedule_x": list(config.schedule.x),
        "best_arm": config.instance.best,
        "gap_min": config.instance.gap_min,
        "gap_max": config.instance.gap_max,
    }
    return ExperimentReport(rows, meta)
