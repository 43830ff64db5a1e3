from __future__ import annotations

import csv
import io
import json
import math
import random

import pytest

from funbandit.bounds import BoundConstants
from funbandit.distributions import Bernoulli, Beta, Categorical, TruncatedGaussian, Uniform
from funbandit.elimination import BanditInstance
from funbandit.errors import DomainError
from funbandit.estimators import (
    AverageValueAtRisk,
    Mean,
    MeanVariance,
    ShannonEntropy,
    ValueAtRisk,
)
from funbandit.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    default_workers,
    run_trials,
    sweep_budgets,
    trial_seed,
)


def bernoulli_config(ps, budgets=(), trials=400, seed=3, policy="sh"):
    inst = BanditInstance([Bernoulli(p) for p in ps], Mean())
    return ExperimentConfig(inst, policy=policy, budgets=list(budgets), trials=trials, master_seed=seed)


def strip_timing(row):
    d = dict(row.__dict__)
    d.pop("wall_time_ms")
    return d


class TestRunTrials:
    def test_deterministic_arms(self):
        inst = BanditInstance([Categorical([1.0], [1.0]), Categorical([0.0], [1.0])], Mean())
        cfg = ExperimentConfig(inst, policy="sr", trials=25)
        for T in (2, 3, 40):
            row = run_trials(cfg, T)
            assert row.empirical_error == 0.0 and row.mean_regret == 0.0

    def test_reproducible(self):
        cfg = bernoulli_config([0.5, 0.45, 0.4, 0.52], trials=300)
        assert strip_timing(run_trials(cfg, 200)) == strip_timing(run_trials(cfg, 200))

    def test_seed_changes_result(self):
        a = run_trials(bernoulli_config([0.5, 0.48, 0.46, 0.44], seed=1), 80)
        b = run_trials(bernoulli_config([0.5, 0.48, 0.46, 0.44], seed=2), 80)
        assert a.empirical_error != b.empirical_error

    def test_k8_bernoulli(self):
        cfg = bernoulli_config([0.9] + [0.5] * 7, trials=2000)
        row = run_trials(cfg, 14000)
        se = math.sqrt(max(row.empirical_error * (1 - row.empirical_error), 1e-12) / 2000)
        assert row.empirical_error < 0.01
        assert row.empirical_error <= min(1.0, row.bound_error) + 3 * se
        assert row.bound_regret == pytest.approx(0.4 * row.bound_error)

    def test_workers_do_not_change_rows(self):
        cfg = bernoulli_config([0.6, 0.5, 0.55, 0.45, 0.58], trials=120)
        serial = run_trials(cfg, 150, workers=1)
        parallel = run_trials(cfg, 150, workers=3)
        assert strip_timing(serial) == strip_timing(parallel)

    def test_trial_seed_is_stable(self):
        # frozen: the seed mix must not drift between releases
        assert trial_seed(0, 100, 0) == trial_seed(0, 100, 0)
        assert len({trial_seed(7, T, i) for T in (10, 20) for i in range(500)}) == 1000


class TestSweep:
    def test_single_row(self):
        cfg = bernoulli_config([0.7, 0.3], trials=50)
        cfg.budgets = [cfg.H + 1]
        rep = sweep_budgets(cfg)
        assert len(rep.rows) == 1 and rep.rows[0].T == cfg.H + 1

    def test_error_decreases_with_budget(self):
        cfg = bernoulli_config([0.6, 0.5, 0.5, 0.5], trials=1000)
        H = cfg.H
        cfg.budgets = [10 * H, 100 * H, 1000 * H]
        rows = sweep_budgets(cfg).rows
        for a, b in zip(rows, rows[1:]):
            slack = 2 * math.sqrt(a.error_stderr**2 + b.error_stderr**2)
            assert b.empirical_error <= a.empirical_error + slack

    def test_order_independent(self):
        budgets = [30, 60, 120, 240]
        shuffled = budgets[:]
        random.Random(1).shuffle(shuffled)
        a = bernoulli_config([0.6, 0.5, 0.55], budgets, trials=100)
        b = bernoulli_config([0.6, 0.5, 0.55], shuffled, trials=100)
        rows_a = sorted(map(strip_timing, sweep_budgets(a).rows), key=lambda r: r["T"])
        rows_b = sorted(map(strip_timing, sweep_budgets(b).rows), key=lambda r: r["T"])
        assert rows_a == rows_b

    def test_failed_row_recorded(self):
        cfg = bernoulli_config([0.6, 0.5, 0.55, 0.4], [1, 90], trials=20, policy="sr")
        rows = sweep_budgets(cfg).rows
        assert rows[0].error_kind == "InsufficientBudget" and math.isnan(rows[0].empirical_error)
        assert rows[1].error is None

    def test_empty_budgets(self):
        with pytest.raises(DomainError):
            sweep_budgets(bernoulli_config([0.6, 0.5]))

    def test_csv_and_json_agree(self):
        cfg = bernoulli_config([0.6, 0.5, 0.55, 0.4], [40, 400], trials=50)
        rep = sweep_budgets(cfg)
        rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
        assert tuple(rows[0]) == CSV_COLUMNS
        doc = json.loads(rep.to_json())
        assert doc["metadata"]["seed"] == 3 and doc["metadata"]["H"] == cfg.H
        for crow, jrow in zip(rows, doc["rows"]):
            for col in CSV_COLUMNS:
                assert float(crow[col]) == float(jrow[col])

    def test_invalid_trials(self):
        with pytest.raises(DomainError):
            bernoulli_config([0.6, 0.5], trials=0)


THREE_ARM = [
    (Mean(), [Bernoulli(0.3), Bernoulli(0.5), Bernoulli(0.6)], BoundConstants()),
    (MeanVariance(1.0), [Beta(2, 5), Beta(2, 2), Beta(5, 2)], BoundConstants()),
    (ValueAtRisk(0.3), [Uniform(0, 1), Beta(2, 2), TruncatedGaussian(0.4, 0.2, 0, 1)], BoundConstants()),
    (AverageValueAtRisk(0.3), [Uniform(0, 1), Beta(2, 2), Beta(5, 2)], BoundConstants(D=2.5, D_prime=10)),
    (
        ShannonEntropy("plugin"),
        [Categorical([0, 1], [0.5, 0.5]), Categorical([0, 1, 2], [0.8, 0.1, 0.1]), Bernoulli(0.2)],
        BoundConstants(c4=1.0, M_knn=1),
    ),
    (ShannonEntropy("knn", 3), [Uniform(0, 1), Uniform(0, 0.5), Beta(2, 2)], BoundConstants()),
]


@pytest.mark.parametrize("functional,arms,consts", THREE_ARM, ids=lambda v: getattr(v, "name", None))
def test_regret_within_gap_max(functional, arms, consts):
    inst = BanditInstance(arms, functional)
    cfg = ExperimentConfig(inst, policy="sr", budgets=[60, 300], trials=150, constants=consts)
    for row in sweep_budgets(cfg).rows:
        assert row.error is None
        assert 0.0 <= row.empirical_error <= 1.0
        assert 0.0 <= row.mean_regret <= inst.gap_max + 1e-12


def test_default_workers(monkeypatch):
    monkeypatch.delenv("FUNBANDIT_WORKERS", raising=False)
    assert default_workers() == 1
    monkeypatch.setenv("FUNBANDIT_WORKERS", "8")
    assert default_workers() == 8
    for bad in ("0", "x"):
        monkeypatch.setenv("FUNBANDIT_WORKERS", bad)
        with pytest.raises(DomainError):
            default_workers()
