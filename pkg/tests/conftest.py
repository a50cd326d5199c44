"""Shared fixtures: a small end-to-end pipeline run reused across tests,
plus a terminal summary that prints one pass/fail line per acceptance
criterion after the run."""

from __future__ import annotations

import pytest

from techrates.config import PipelineConfig
from techrates.pipeline import run_all

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def mini_config(outdir: str, **overrides) -> PipelineConfig:
    """A fast synthetic preset: 600 patents, 8 replicates, small domains."""
    values = dict(
        outdir=outdir,
        seed=2024,
        replicates=8,
        min_size=25,
        synth_patents=600,
        synth_year_start=1985,
        synth_year_end=1995,
        synth_upc_classes=6,
        synth_ipc_classes=8,
        synth_citation_rate=6.0,
    )
    values.update(overrides)
    return PipelineConfig(**values)


@pytest.fixture(scope="session")
def mini_artifacts(tmp_path_factory) -> str:
    """Artifact directory from one full mini pipeline run."""
    outdir = str(tmp_path_factory.mktemp("mini") / "artifacts")
    run_all(mini_config(outdir))
    return outdir


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE_RESULTS.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS:
        label = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"{label}  {name}")
