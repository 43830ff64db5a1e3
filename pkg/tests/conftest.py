from __future__ import annotations

from importlib import resources
from pathlib import Path

import pytest

CONFIG_DIR = Path(str(resources.files("funbandit") / "configs"))

# The five functional configs used for bound-domination checks.
SHIPPED_FUNCTIONAL_CONFIGS = [
    "mean_bernoulli_k8.json",
    "mean_variance_beta_k4.json",
    "var_truncgauss_k8.json",
    "avar_beta_k4.json",
    "entropy_categorical_k4.json",
]


@pytest.fixture
def config_dir() -> Path:
    return CONFIG_DIR


# criterion number -> (passed, description); filled by test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, desc = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {desc}")
