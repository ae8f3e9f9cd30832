from __future__ import annotations

import sys
from pathlib import Path

import pytest

from masforge import chat_model_path, models_dir
from masforge.modelc import load_model

TESTS = Path(__file__).parent
ROOT = TESTS.parent
sys.path.insert(0, str(TESTS))

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    print(line)
    _ACCEPTANCE.append((name, passed, line))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, line in _ACCEPTANCE:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def chat_model():
    return load_model(chat_model_path())


@pytest.fixture(scope="session")
def corpus_paths() -> list[Path]:
    shipped = sorted(models_dir().glob("*.mas"))
    extra = sorted((ROOT / "examples").glob("*.mas"))
    return shipped + extra


@pytest.fixture
def acceptance():
    return record_acceptance


@pytest.fixture
def golden() -> Path:
    return TESTS / "golden"
