from __future__ import annotations

import shutil
from pathlib import Path

import pytest

from hypglue import cli, coxeter, lorentz, qforms

DATA = cli.default_data_dir()

# acceptance verdicts, filled in by test_acceptance.py and printed at the end
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def vectors():
    return lorentz.load_vectors(DATA / "q_vectors.txt")


@pytest.fixture(scope="session")
def diagram():
    return coxeter.load_diagram(DATA / "q.cox")


@pytest.fixture(scope="session")
def form():
    return qforms.load_form(DATA / "qform.txt")


@pytest.fixture(scope="session")
def full_run():
    """The whole pipeline on shipped data, run once per session."""
    return cli.run_pipeline("all")


@pytest.fixture(scope="session")
def cert(full_run):
    return full_run[0]


@pytest.fixture(scope="session")
def pipe(full_run):
    return full_run[1]


@pytest.fixture(scope="session")
def P(pipe):
    return pipe.p


@pytest.fixture(scope="session")
def X(pipe):
    return pipe.x


@pytest.fixture(scope="session")
def M(pipe):
    return pipe.m


@pytest.fixture
def scratch_data(tmp_path) -> Path:
    """A writable copy of the shipped data directory."""
    d = tmp_path / "data"
    shutil.copytree(DATA, d)
    return d


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, what = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {k}: {what}")
